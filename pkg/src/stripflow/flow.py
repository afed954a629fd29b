"""Shear dynamics of the strip flows and the derived conserved quantities.

Each strip carries a piecewise-linear transverse profile c: [0, w] -> [0, 1]
(zero on the two smoothing margins, slope 1/(w - 2*smoothing) on the ramp)
whose derivative is the along-strip velocity.  The time-t map of a strip is
an exact piecewise translation; the scenario map is the ordered composition
of all strip maps (last listed acts first).  The composition's generating
function is evaluated through the pullback chain in the plane lift, which
carries the winding bookkeeping for free, and feeds the Hofer-length upper
bound and the Calabi integral.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidityWindowExceeded
from .surface import DIRECTION_VECTORS, Scenario, StripSpec

# Sign of each strip's contribution to the generating function: the strip
# Hamiltonian is +sigma*c(h) for H strips and -sigma*c(h) for V and D strips
# (with h the transverse chart coordinate and omega = dx ^ dy).
_HAMILTONIAN_SIGN = {"H": 1.0, "V": -1.0, "D": -1.0}


@dataclass(frozen=True)
class Profile:
    """Piecewise-linear cutoff across a strip of the given width."""

    width: float
    smoothing: float

    def __post_init__(self):
        if self.smoothing < 0 or 2 * self.smoothing >= self.width:
            raise ValueError("need 0 <= 2*smoothing < width")

    @property
    def ramp(self) -> float:
        return self.width - 2.0 * self.smoothing

    def value(self, h: float) -> float:
        """c(h): 0 on the low margin, linear ramp, 1 on the high margin."""
        return min(1.0, max(0.0, (h - self.smoothing) / self.ramp))

    def velocity(self, h: float) -> float:
        """c'(h) (one-sided at the kinks)."""
        if self.smoothing < h < self.width - self.smoothing:
            return 1.0 / self.ramp
        return 0.0


def strip_profile(strip: StripSpec) -> Profile:
    return Profile(width=strip.width, smoothing=strip.smoothing)


@dataclass(frozen=True)
class FlowStep:
    """One composed time step of a scenario, validated against the
    overlap-stability window at construction."""

    scenario: Scenario
    t: float

    def __post_init__(self):
        if self.t <= 0:
            raise ValueError("step duration must be positive")
        require_validity(self.scenario, self.t)

    def apply(self, p: tuple[float, float]):
        return apply_composed(self.scenario, self.t, p)


def profile_velocity(profile: Profile, h: float) -> float:
    if not 0.0 <= h <= profile.width:
        raise ValueError(f"h={h} outside [0, {profile.width}]")
    return profile.velocity(h)


# -- point maps ---------------------------------------------------------------


def apply_strip(strip: StripSpec, profile: Profile, t: float,
                p: tuple[float, float]):
    """Time-t map of one strip flow on a lifted point.

    Returns (image point, displacement segment or None).  Points off the
    ramp are fixed; ramp points translate along the strip direction by
    orientation * t * c'(h).  Exactly area preserving.
    """
    h = strip.transverse(p[0], p[1])
    speed = profile.velocity(h) if h <= profile.width else 0.0
    if t < 0:
        raise ValueError("t must be >= 0 (invert by reversing composition)")
    if speed == 0.0:
        return p, None
    d = strip.orientation * t * speed
    vx, vy = DIRECTION_VECTORS[strip.direction]
    q = (p[0] + d * vx, p[1] + d * vy)
    return q, (p, q)


def apply_composed(scenario: Scenario, t: float, p: tuple[float, float]):
    """One composed step: every strip map in scenario order, last listed first.

    Returns (image point, list of lifted displacement segments in the order
    they are traversed).
    """
    segments = []
    q = p
    for strip in reversed(scenario.strips):
        q, seg = apply_strip(strip, strip_profile(strip), t, q)
        if seg is not None:
            segments.append(seg)
    return q, segments


def apply_composed_inverse(scenario: Scenario, t: float, p: tuple[float, float]):
    """Inverse of apply_composed: reverse order, shears run backwards."""
    q = p
    for strip in scenario.strips:
        h = strip.transverse(q[0], q[1])
        speed = strip_profile(strip).velocity(h)
        if speed != 0.0:
            d = -strip.orientation * t * speed
            vx, vy = DIRECTION_VECTORS[strip.direction]
            q = (q[0] + d * vx, q[1] + d * vy)
    return q


# -- generating function -------------------------------------------------------


def _lifted_transverse(strip: StripSpec, x, y):
    if strip.direction == "H":
        return y - strip.offset
    if strip.direction == "V":
        return x - strip.offset
    return x - y - strip.offset


def _profile_lift(strip: StripSpec, s):
    """C~(s): the profile read on the transverse line, lifted (period 1 -> +1)."""
    base = np.floor(s)
    rel = s - base
    ramp = strip.width - 2.0 * strip.smoothing
    return base + np.clip((rel - strip.smoothing) / ramp, 0.0, 1.0)


def _generator_on_arrays(scenario: Scenario, t: float, x, y):
    """Generating function G(t) at lifted points via the pullback chain.

    Term j is the j-th strip Hamiltonian composed with the inverses of the
    maps of strips 0..j-1 (those act after it in the composition); working
    in the plane lift keeps every term single valued, and zero total flux
    makes the sum descend to the torus.  Normalized to vanish at (0, 0),
    i.e. on the hole's plateau.
    """
    x = np.append(np.asarray(x, dtype=float), 0.0)
    y = np.append(np.asarray(y, dtype=float), 0.0)
    g = np.zeros_like(x)
    for strip in scenario.strips:
        s = _lifted_transverse(strip, x, y)
        g += _HAMILTONIAN_SIGN[strip.direction] * strip.orientation \
            * _profile_lift(strip, s)
        # advance the chain: inverse time-t map of this strip
        rel = s % 1.0
        ramp = strip.width - 2.0 * strip.smoothing
        moving = (rel > strip.smoothing) & (rel < strip.width - strip.smoothing)
        d = np.where(moving, -strip.orientation * t / ramp, 0.0)
        vx, vy = DIRECTION_VECTORS[strip.direction]
        if vx:
            x = x + d * vx
        if vy:
            y = y + d * vy
    return g[:-1] - g[-1]


def generator_value(scenario: Scenario, t: float, p: tuple[float, float]) -> float:
    """G(t) at a single point, normalized to 0 near the hole."""
    return float(_generator_on_arrays(scenario, t, [p[0]], [p[1]])[0])


def _generator_grid(scenario: Scenario, t: float, n: int):
    xs = (np.arange(n) + 0.5) / n
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    return _generator_on_arrays(scenario, t, gx.ravel(), gy.ravel())


# -- validity window, Hofer bound, Calabi --------------------------------------


def require_validity(scenario: Scenario, t: float):
    """Enforce the overlap-stability window: nominal drift t/T per strip
    must stay below the recorded minimal overlap spacing."""
    report = scenario.validation
    if report is None:
        raise ValueError("scenario carries no validation report")
    drift = t / scenario.T
    if drift >= report.min_overlap_spacing:
        raise ValidityWindowExceeded(
            f"drift {drift:.6g} per strip exceeds the overlap spacing "
            f"{report.min_overlap_spacing:.6g}")


def copy_oscillation_bound(scenario: Scenario) -> float:
    """Combinatorial bound on the potential oscillation within one copy:
    the sum of the absolute signed jumps of its strips (3 for H/V/D)."""
    per_copy: dict[int, float] = {}
    for strip in scenario.strips:
        per_copy[strip.copy_id] = per_copy.get(strip.copy_id, 0.0) + \
            abs(strip.orientation)
    return max(per_copy.values(), default=0.0)


@dataclass(frozen=True)
class HoferBound:
    numeric: float
    analytic: float
    oscillation_bound: float
    oscillations: tuple[float, ...]


def hofer_upper_bound(scenario: Scenario, tau: float, time_samples: int = 8,
                      space_samples: int = 400) -> HoferBound:
    """Riemann estimate of the Hofer length of {Phi^t, t <= tau}.

    numeric = tau * mean over midpoint time nodes of (max G - min G) on a
    space grid; analytic = 2 * K * tau with K the combinatorial per-copy
    oscillation bound.  Raises ValidityWindowExceeded outside the window.
    """
    require_validity(scenario, tau)
    if not scenario.strips:
        return HoferBound(0.0, 0.0, 0.0, ())
    oscs = []
    for i in range(time_samples):
        t = (i + 0.5) / time_samples * tau
        g = _generator_grid(scenario, t, space_samples)
        oscs.append(float(g.max() - g.min()))
    k = copy_oscillation_bound(scenario)
    return HoferBound(
        numeric=tau * float(np.mean(oscs)),
        analytic=2.0 * k * tau,
        oscillation_bound=k,
        oscillations=tuple(oscs),
    )


def calabi(scenario: Scenario, tau: float, time_samples: int = 8,
           space_samples: int = 400) -> float:
    """Calabi value of Phi^tau: the space-time integral of the generator.

    The hole plateau is normalized to zero, so integrating over the full
    square equals integrating over the surface.
    """
    require_validity(scenario, tau)
    if not scenario.strips:
        return 0.0
    means = []
    for i in range(time_samples):
        t = (i + 0.5) / time_samples * tau
        means.append(float(_generator_grid(scenario, t, space_samples).mean()))
    return tau * float(np.mean(means))


_TRANSVERSE_GRADIENT = {"H": (0.0, 1.0), "V": (1.0, 0.0), "D": (1.0, -1.0)}


def generator_drift_rate(scenario: Scenario) -> float:
    """Exact d/dt of the surface integral of G(t).

    Term j is dragged by the inverse flows of the strips listed before it;
    each ordered cross-direction pair contributes sign_j * (-sigma_i) *
    (dir_i . grad_j): the ramp widths cancel against the intersection area,
    so the rate is an integer combination (N for the standard H/V/D layout).
    """
    rate = 0.0
    strips = scenario.strips
    for j, sj in enumerate(strips):
        gj = _TRANSVERSE_GRADIENT[sj.direction]
        sign_j = _HAMILTONIAN_SIGN[sj.direction] * sj.orientation
        for si in strips[:j]:
            di = DIRECTION_VECTORS[si.direction]
            rate += sign_j * (-si.orientation) * (di[0] * gj[0] + di[1] * gj[1])
    return rate


def calabi_region_decomposition(scenario: Scenario, tau: float) -> float:
    """Closed-form Calabi value from the region decomposition.

    tau * integral of the static potential G(0) (per strip the transverse
    integral of C~ over one period is (1 - offset - width) + smoothing +
    ramp/2, with the diagonal floor correction -1/2) plus the exact
    pairwise drag term: the generator integral changes at the constant
    rate generator_drift_rate while the overlap combinatorics is stable,
    contributing tau^2/2 * rate.
    """
    total = 0.0
    for strip in scenario.strips:
        level = (1.0 - strip.offset - strip.width) + strip.smoothing \
            + (strip.width - 2.0 * strip.smoothing) / 2.0
        if strip.direction == "D":
            level += -0.5
        total += _HAMILTONIAN_SIGN[strip.direction] * strip.orientation * level
    base = generator_value(scenario, 0.0, (0.0, 0.0))  # 0 by normalization
    return tau * (total - base) + 0.5 * tau * tau * generator_drift_rate(scenario)


# -- flux ----------------------------------------------------------------------


def flux_check(scenario: Scenario) -> tuple[float, float]:
    """Total flux per unit time across the two cut circles; (0, 0) iff
    the composed flow is Hamiltonian.  Exact integer arithmetic."""
    fa = 0
    fb = 0
    for strip in scenario.strips:
        vx, vy = DIRECTION_VECTORS[strip.direction]
        fa += strip.orientation * int(vx)
        fb += strip.orientation * int(vy)
    return float(fa), float(fb)


def per_copy_flux(scenario: Scenario) -> dict[int, tuple[float, float]]:
    out: dict[int, list[float]] = {}
    for strip in scenario.strips:
        vx, vy = DIRECTION_VECTORS[strip.direction]
        acc = out.setdefault(strip.copy_id, [0.0, 0.0])
        acc[0] += strip.orientation * vx
        acc[1] += strip.orientation * vy
    return {k: (v[0], v[1]) for k, v in out.items()}
