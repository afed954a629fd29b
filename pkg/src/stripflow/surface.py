"""Flat one-holed torus, shear strips, and exact homotopy-class reading.

The surface is the unit square with opposite sides identified, minus an
open axis-aligned square of half-width ``hole_halfwidth`` centered at the
identified vertex (0, 0).  Cutting along the two circles {x = 0} and
{y = 0} (both meet the hole) leaves a disk, so the signed sequence of
integer-line crossings of a lifted path reads off its exact class in
pi_1 = F(a, b): each crossing of x in Z contributes a^{+-1}, each
crossing of y in Z contributes b^{+-1}.

Strips are straight annuli in one of three directions:

========= ============ ==================== ===========
direction core curve   transverse coord     class word
========= ============ ==================== ===========
H         along (1,0)  y                    a
V         along (0,1)  x                    b
D         along (1,1)  u = x - y            ab
========= ============ ==================== ===========

In its shear chart every strip is a band of width ``width`` over a core
loop of unit length, so width = area = traversal period of the full-band
profile.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .errors import DegenerateCrossing, InfeasibleScenario
from .words import Word

DIRECTIONS = ("H", "V", "D")
DIRECTION_VECTORS = {"H": (1.0, 0.0), "V": (0.0, 1.0), "D": (1.0, 1.0)}
CLASS_WORDS = {"H": Word.from_text("a"), "V": Word.from_text("b"),
               "D": Word.from_text("ab")}
# Hole clearance required of the transverse band, in units of hole_halfwidth:
# the hole projects to |y| < hh, |x| < hh and |x - y| < 2 hh.
HOLE_CLEARANCE = {"H": 1.0, "V": 1.0, "D": 2.0}

CUT_LINE_TOL = 1e-12
NUDGE = 1e-9

# Default moving-band fraction of the strip width.  The narrow ramp keeps
# per-step drift below the overlap spacing of the default experiments while
# making foreign-band interactions measure-(ramp^2) rare; the time-step map
# and all conserved quantities are unchanged (steeper profile, smaller
# moving area).
DEFAULT_RAMP_FRACTION = 0.125

# Grid phases sit 2^-10 off a round decimal so that ramp edges never fall
# on coarse-grid cell boundaries used by the enumeration oracle.
PHASE_EPS = 2.0 ** -10
DEFAULT_PHASE_H = 0.31 + PHASE_EPS
DEFAULT_PHASE_V = 0.31 + PHASE_EPS
AUTO = "auto"


@dataclass(frozen=True)
class HoledTorus:
    hole_halfwidth: float

    def __post_init__(self):
        if not 0.0 < self.hole_halfwidth < 0.1:
            raise ValueError("hole_halfwidth must lie in (0, 0.1)")

    def in_hole(self, x: float, y: float) -> bool:
        hh = self.hole_halfwidth
        dx = abs(x - round(x))
        dy = abs(y - round(y))
        return dx < hh and dy < hh


@dataclass(frozen=True)
class StripSpec:
    direction: str
    offset: float
    width: float
    orientation: int
    smoothing: float
    copy_id: int

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        if not 0.0 < self.width < 1.0:
            raise ValueError("width must lie in (0, 1)")
        if self.smoothing < 0.0 or 2.0 * self.smoothing >= self.width:
            raise ValueError("need 0 <= 2*smoothing < width")

    @property
    def class_word(self) -> Word:
        return CLASS_WORDS[self.direction]

    @property
    def ramp_width(self) -> float:
        return self.width - 2.0 * self.smoothing

    def transverse(self, x: float, y: float) -> float:
        """Transverse chart coordinate relative to the band start, mod 1."""
        if self.direction == "H":
            raw = y - self.offset
        elif self.direction == "V":
            raw = x - self.offset
        else:
            raw = x - y - self.offset
        return raw % 1.0

    def contains(self, x: float, y: float) -> bool:
        return self.transverse(x, y) < self.width

    def on_ramp(self, x: float, y: float) -> bool:
        h = self.transverse(x, y)
        return self.smoothing < h < self.width - self.smoothing

    def avoids_hole(self, hole_halfwidth: float) -> bool:
        clearance = HOLE_CLEARANCE[self.direction] * hole_halfwidth
        return self.offset >= clearance and self.offset + self.width <= 1.0 - clearance


@dataclass(frozen=True)
class OverlapReport:
    pairwise_overlaps: tuple[tuple[int, int, float], ...]
    max_overlap_area: float
    bad_area_budget: float
    min_overlap_spacing: float
    triple_overlap_count: int = 0


@dataclass(frozen=True)
class Scenario:
    surface: HoledTorus
    strips: tuple[StripSpec, ...]
    N: int
    T: float
    m: int
    validation: OverlapReport | None = None

    @property
    def tau(self) -> float:
        return self.T / self.m

    def with_validation(self, report: OverlapReport) -> "Scenario":
        return replace(self, validation=report)


# -- overlap geometry -------------------------------------------------------


def _interval_intersects_mod1(a0: float, alen: float, b0: float, blen: float) -> bool:
    """Do the open intervals (a0, a0+alen) and (b0, b0+blen) meet on R/Z?"""
    a0 %= 1.0
    b0 %= 1.0
    for shift in (-1.0, 0.0, 1.0):
        lo = max(a0, b0 + shift)
        hi = min(a0 + alen, b0 + shift + blen)
        if hi - lo > 1e-15:
            return True
    return False


def pairwise_overlap_area(s1: StripSpec, s2: StripSpec) -> float:
    """Exact intersection area of two strips of different directions.

    In the product of their shear charts the overlap is a parallelogram of
    unit Jacobian, so the area is width * width regardless of the pair.
    """
    if s1.direction == s2.direction:
        return 0.0
    return s1.width * s2.width


def _triple_overlap(h: StripSpec, v: StripSpec, d: StripSpec) -> bool:
    # x in (v.o, v.o+v.w), y in (h.o, h.o+h.w) forces
    # u = x - y in (v.o - h.o - h.w, v.o + v.w - h.o).
    u0 = v.offset - h.offset - h.width
    ulen = v.width + h.width
    return _interval_intersects_mod1(u0, ulen, d.offset, d.width)


def _along_windows(strip: StripSpec, others: Sequence[StripSpec]):
    """Along-strip windows (start, length) where foreign overlaps project."""
    windows = []
    for other in others:
        if other.direction == strip.direction:
            continue
        pair = {strip.direction, other.direction}
        if pair == {"H", "V"}:
            windows.append((other.offset, other.width))
        elif pair == {"H", "D"}:
            if strip.direction == "H":
                windows.append((other.offset + strip.offset,
                                other.width + strip.width))
            else:  # D strip, along coordinate s = y
                windows.append((other.offset, other.width))
        else:  # {"V", "D"}
            if strip.direction == "V":
                windows.append((strip.offset - other.offset - other.width,
                                other.width + strip.width))
            else:
                windows.append((other.offset - strip.offset - strip.width,
                                other.width + strip.width))
    return windows


def _min_circular_gap(windows: list[tuple[float, float]]) -> float:
    if not windows:
        return 1.0
    # merge, then measure gaps between consecutive merged windows
    spans = sorted(((s % 1.0, (s % 1.0) + ln) for s, ln in windows))
    merged: list[list[float]] = []
    for lo, hi in spans:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    # wrap-around merge
    if len(merged) > 1 and merged[0][0] + 1.0 <= merged[-1][1]:
        merged[0][0] = merged[-1][0] - 1.0
        merged.pop()
    if len(merged) == 1 and merged[0][1] - merged[0][0] >= 1.0:
        return 0.0
    gaps = []
    for i, (lo, hi) in enumerate(merged):
        nxt = merged[(i + 1) % len(merged)][0] + (1.0 if i + 1 == len(merged) else 0.0)
        gaps.append(nxt - hi)
    return max(0.0, min(gaps))


def validate_scenario(scenario: Scenario) -> OverlapReport:
    """Check all scenario invariants; return the filled overlap report.

    Raises InfeasibleScenario naming the first violated constraint.
    """
    strips = scenario.strips
    N = scenario.N
    if len(strips) != 3 * N:
        raise InfeasibleScenario(f"expected {3 * N} strips, found {len(strips)}")
    for copy_id in range(N):
        members = [s for s in strips if s.copy_id == copy_id]
        dirs = sorted(s.direction for s in members)
        if dirs != ["D", "H", "V"]:
            raise InfeasibleScenario(
                f"copy {copy_id} must hold one strip of each direction, got {dirs}")
        flux = [0.0, 0.0]
        for s in members:
            vec = DIRECTION_VECTORS[s.direction]
            flux[0] += s.orientation * vec[0]
            flux[1] += s.orientation * vec[1]
        if flux != [0.0, 0.0]:
            raise InfeasibleScenario(f"copy {copy_id} has nonzero flux {flux}")
    for s in strips:
        if not s.avoids_hole(scenario.surface.hole_halfwidth):
            raise InfeasibleScenario(
                f"strip {s.direction}@{s.offset:.6g} meets the hole zone")
    for i, s1 in enumerate(strips):
        for s2 in strips[i + 1:]:
            if s1.direction == s2.direction and _interval_intersects_mod1(
                    s1.offset, s1.width, s2.offset, s2.width):
                raise InfeasibleScenario(
                    f"parallel strips {s1.direction}@{s1.offset:.6g} and "
                    f"@{s2.offset:.6g} overlap")
    triples = 0
    hs = [s for s in strips if s.direction == "H"]
    vs = [s for s in strips if s.direction == "V"]
    ds = [s for s in strips if s.direction == "D"]
    for h in hs:
        for v in vs:
            for d in ds:
                if _triple_overlap(h, v, d):
                    triples += 1
    if triples:
        raise InfeasibleScenario(f"{triples} triple overlap(s) present")

    pairs = []
    for i, s1 in enumerate(strips):
        for j in range(i + 1, len(strips)):
            area = pairwise_overlap_area(s1, strips[j])
            if area > 0.0:
                pairs.append((i, j, area))
    total = sum(a for _, _, a in pairs)
    spacing = min(
        (_min_circular_gap(_along_windows(s, [t for t in strips if t is not s]))
         for s in strips), default=1.0)
    return OverlapReport(
        pairwise_overlaps=tuple(pairs),
        max_overlap_area=max((a for _, _, a in pairs), default=0.0),
        bad_area_budget=scenario.m * total,
        min_overlap_spacing=spacing,
        triple_overlap_count=0,
    )


# -- scenario construction ---------------------------------------------------


def _grid_offsets(phase: float, n: int) -> list[float]:
    return [(phase + i / n) % 1.0 for i in range(n)]


def _offsets_feasible(offsets: Iterable[float], width: float,
                      clearance: float) -> bool:
    return all(o >= clearance and o + width <= 1.0 - clearance for o in offsets)


def _auto_phase_d(N: int, T: float, phase_h: float, phase_v: float,
                  hole_halfwidth: float) -> float:
    """Deterministic search for the diagonal-family phase.

    The triple-overlap condition only constrains theta = (phase_V -
    phase_H - phase_D) mod 1/N to avoid a window of length 3T; theta is
    started at T/2 + 1/(2N) (which aligns the foreign-band windows seen
    by moving points of the other two families) and scanned until all
    diagonal bands clear the hole zone.
    """
    cell = 1.0 / N
    clearance = 2.0 * hole_halfwidth
    base = T / 2.0 + cell / 2.0 + PHASE_EPS
    step = cell / 256.0
    lo, hi = 2.0 * T + 4.0 * step, cell - T - 4.0 * step
    if lo >= hi:
        raise InfeasibleScenario(
            "no triple-free diagonal placement: 3T leaves no room in 1/N cell")
    deltas = [0.0]
    for j in range(1, 129):
        deltas.extend((j * step, -j * step))
    for delta in deltas:
        theta = base + delta
        if not lo <= theta <= hi:
            continue
        phase_d = (phase_v - phase_h - theta) % cell
        offsets = _grid_offsets(phase_d, N)
        if _offsets_feasible(offsets, T, clearance):
            return phase_d
    raise InfeasibleScenario(
        "no diagonal phase satisfies both the triple-overlap window and the "
        "hole clearance")


def build_scenario(N: int, T: float, m: int, hole_halfwidth: float,
                   phases: tuple[float, float, float | str] | None = None,
                   offsets: dict[str, Sequence[float]] | None = None,
                   ramp_fraction: float = DEFAULT_RAMP_FRACTION,
                   smoothing: float | None = None) -> Scenario:
    """Place 3N strips (one H, V, D per copy) and validate the layout.

    Offsets default to arithmetic 1/N grids with per-direction phases;
    phase_D may be ``"auto"``.  ``smoothing`` overrides the default
    ramp_fraction rule (smoothing = width * (1 - ramp_fraction) / 2).
    Raises InfeasibleScenario when the constraints cannot be met.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if not 0.0 < T <= 1.0 / (4 * N):
        raise ValueError("need 0 < T <= 1/(4N) to fit 3N strips and the hole")
    if m < 1:
        raise ValueError("m must be >= 1")
    surface = HoledTorus(hole_halfwidth)
    if smoothing is None:
        if not 0.0 < ramp_fraction <= 1.0:
            raise ValueError("ramp_fraction must lie in (0, 1]")
        smoothing = T * (1.0 - ramp_fraction) / 2.0

    if offsets is None:
        if phases is None:
            phases = (DEFAULT_PHASE_H, DEFAULT_PHASE_V, AUTO)
        phase_h, phase_v, phase_d = phases
        if phase_d == AUTO:
            phase_d = _auto_phase_d(N, T, phase_h, phase_v, hole_halfwidth)
        offsets = {"H": _grid_offsets(phase_h, N),
                   "V": _grid_offsets(phase_v, N),
                   "D": _grid_offsets(float(phase_d), N)}
    for direction in DIRECTIONS:
        if len(offsets[direction]) != N:
            raise ValueError(f"need {N} offsets for direction {direction}")

    strips = []
    for i in range(N):
        for direction, orientation in (("H", 1), ("V", 1), ("D", -1)):
            strips.append(StripSpec(
                direction=direction,
                offset=float(offsets[direction][i]) % 1.0,
                width=T,
                orientation=orientation,
                smoothing=smoothing,
                copy_id=i,
            ))
    scenario = Scenario(surface=surface, strips=tuple(strips), N=N, T=T, m=m)
    report = validate_scenario(scenario)
    return scenario.with_validation(report)


def membership(scenario: Scenario, p: tuple[float, float]):
    """All strips containing p, with the transverse coordinate h in (0, width)."""
    out = []
    for idx, s in enumerate(scenario.strips):
        h = s.transverse(p[0], p[1])
        if 0.0 < h < s.width:
            out.append((idx, h))
    return out


# -- crossing words ----------------------------------------------------------


def _check_off_cut_lines(p: tuple[float, float]):
    for coord in p:
        if abs(coord - round(coord)) < CUT_LINE_TOL:
            raise DegenerateCrossing(f"point {p} lies on a cut line")


def segment_crossings(p: tuple[float, float], q: tuple[float, float]):
    """Ordered (t, letter) crossings of integer lines along the lifted segment."""
    _check_off_cut_lines(p)
    _check_off_cut_lines(q)
    events = []
    for axis, letter in ((0, 1), (1, 2)):
        lo, hi = p[axis], q[axis]
        delta = hi - lo
        if delta == 0.0:
            continue
        sign = 1 if delta > 0 else -1
        k0 = math.floor(min(lo, hi)) + 1
        k1 = math.floor(max(lo, hi))
        for k in range(k0, k1 + 1):
            events.append(((k - lo) / delta, letter * sign))
    events.sort()
    for (t1, _), (t2, _) in zip(events, events[1:]):
        if t2 - t1 < CUT_LINE_TOL:
            raise DegenerateCrossing(
                f"simultaneous crossings on segment {p} -> {q}")
    return events


def crossing_word(p: tuple[float, float], q: tuple[float, float]) -> Word:
    """Exact crossing word of a lifted segment avoiding the lifted holes.

    Letters read a^{+-1} per crossing of x in Z (sign = crossing
    direction) and b^{+-1} per crossing of y in Z, ordered along the
    segment.
    """
    return Word(letter for _, letter in segment_crossings(p, q))


def _segment_hits_hole(p, q, hole_halfwidth: float) -> bool:
    hh = hole_halfwidth
    dx, dy = q[0] - p[0], q[1] - p[1]
    x_lo, x_hi = min(p[0], q[0]) - hh, max(p[0], q[0]) + hh
    y_lo, y_hi = min(p[1], q[1]) - hh, max(p[1], q[1]) + hh
    for lx in range(math.floor(x_lo), math.ceil(x_hi) + 1):
        if not x_lo <= lx <= x_hi:
            continue
        for ly in range(math.floor(y_lo), math.ceil(y_hi) + 1):
            if not y_lo <= ly <= y_hi:
                continue
            # parameter window where |x(t) - lx| < hh
            t0, t1 = 0.0, 1.0
            ok = True
            for delta, start, center in ((dx, p[0], lx), (dy, p[1], ly)):
                if delta == 0.0:
                    if abs(start - center) >= hh:
                        ok = False
                        break
                else:
                    a = (center - hh - start) / delta
                    b = (center + hh - start) / delta
                    t0 = max(t0, min(a, b))
                    t1 = min(t1, max(a, b))
            if ok and t1 - t0 > 1e-15:
                return True
    return False


_DETOUR_OFFSETS = ((2.5, 0.4), (0.4, 2.5), (-2.5, 0.4), (0.4, -2.5),
                   (2.5, 2.5), (-2.5, 2.5), (2.5, -2.5), (-2.5, -2.5))


def _hole_hit_specific(p, q, L, hh):
    dx, dy = q[0] - p[0], q[1] - p[1]
    t0, t1 = 0.0, 1.0
    for delta, start, center in ((dx, p[0], L[0]), (dy, p[1], L[1])):
        if delta == 0.0:
            if abs(start - center) >= hh:
                return False
        else:
            a = (center - hh - start) / delta
            b = (center + hh - start) / delta
            t0 = max(t0, min(a, b))
            t1 = min(t1, max(a, b))
    return t1 - t0 > 1e-15


def closing_word(end: tuple[float, float], start: tuple[float, float],
                 hole_halfwidth: float) -> tuple[Word, list]:
    """Hole-avoiding chain of at most 3 segments from end to (a lift of) start.

    The wrapped shortest displacement is tried straight; if it enters a
    lifted hole the path detours around the offending lattice square via
    deterministic waypoint candidates (the +x side first).  Returns the
    crossing word together with the lifted segment chain.
    """
    dx = ((start[0] - end[0]) + 0.5) % 1.0 - 0.5
    dy = ((start[1] - end[1]) + 0.5) % 1.0 - 0.5
    target = (end[0] + dx, end[1] + dy)
    if dx == 0.0 and dy == 0.0:
        return Word(), []
    if not _segment_hits_hole(end, target, hole_halfwidth):
        chain = [(end, target)]
    else:
        chain = None
        offender = None
        # find the offending lattice square (scan the bounding box)
        for lx in range(math.floor(min(end[0], target[0]) - 1),
                        math.ceil(max(end[0], target[0]) + 1) + 1):
            for ly in range(math.floor(min(end[1], target[1]) - 1),
                            math.ceil(max(end[1], target[1]) + 1) + 1):
                if _hole_hit_specific(end, target, (lx, ly), hole_halfwidth):
                    offender = (lx, ly)
                    break
            if offender:
                break
        if offender is None:  # numerical corner case: treat as direct
            chain = [(end, target)]
        else:
            candidates: list[list[tuple[float, float]]] = []
            for ox, oy in _DETOUR_OFFSETS:
                candidates.append([(offender[0] + ox * hole_halfwidth,
                                    offender[1] + oy * hole_halfwidth)])
            # two-waypoint routes skirting the square on one side
            for side in (2.5, -2.5):
                ly = offender[1] + side * hole_halfwidth
                lx = offender[0] + side * hole_halfwidth
                candidates.append([(end[0], ly), (target[0], ly)])
                candidates.append([(lx, end[1]), (lx, target[1])])
            for waypoints in candidates:
                pts = [end, *waypoints, target]
                segs = list(zip(pts, pts[1:]))
                if all(not _segment_hits_hole(a, b, hole_halfwidth)
                       for a, b in segs):
                    chain = segs
                    break
            if chain is None:
                raise DegenerateCrossing(
                    f"no hole-avoiding closing path from {end} to {start}")
    letters = []
    for a, b in chain:
        letters.extend(letter for _, letter in segment_crossings(a, b))
    return Word(letters), chain


def nudge_off_cut_lines(p: tuple[float, float]) -> tuple[float, float]:
    """Deterministically push a point off the cut lines if within tolerance."""
    x, y = p
    if abs(x - round(x)) < CUT_LINE_TOL:
        x += NUDGE
    if abs(y - round(y)) < CUT_LINE_TOL:
        y += NUDGE
    return (x, y)


# -- serialization -----------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def scenario_to_text(scenario: Scenario) -> str:
    lines = [
        "# stripflow scenario v1",
        f"N = {scenario.N}",
        f"T = {_fmt(scenario.T)}",
        f"m = {scenario.m}",
        f"hole_halfwidth = {_fmt(scenario.surface.hole_halfwidth)}",
    ]
    for s in scenario.strips:
        lines.append(
            f"strip = {s.direction} {_fmt(s.offset)} {_fmt(s.width)} "
            f"{s.orientation:+d} {_fmt(s.smoothing)}")
    return "\n".join(lines) + "\n"


def scenario_from_text(text: str) -> Scenario:
    fields: dict[str, str] = {}
    strip_rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InfeasibleScenario(f"unparseable scenario line: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "strip":
            strip_rows.append(value.split())
        else:
            fields[key] = value
    try:
        N = int(fields["N"])
        T = float(fields["T"])
        m = int(fields["m"])
        hh = float(fields["hole_halfwidth"])
    except KeyError as exc:
        raise InfeasibleScenario(f"scenario document missing field {exc}") from exc
    strips = []
    copy_counter: dict[int, int] = {}
    for row in strip_rows:
        if len(row) != 5:
            raise InfeasibleScenario(f"strip row needs 5 fields, got {row}")
        direction = row[0]
        copy_id = len(strips) // 3
        copy_counter[copy_id] = copy_counter.get(copy_id, 0) + 1
        strips.append(StripSpec(
            direction=direction, offset=float(row[1]), width=float(row[2]),
            orientation=int(row[3]), smoothing=float(row[4]), copy_id=copy_id))
    scenario = Scenario(surface=HoledTorus(hh), strips=tuple(strips), N=N, T=T, m=m)
    return scenario.with_validation(validate_scenario(scenario))
