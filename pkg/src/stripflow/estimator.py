"""Trajectory-class estimation of the induced quasimorphism on the scenario map.

Samples are drawn on the moving bands (profile ramps) of the strips: the
complement of the ramps is exactly fixed by every strip map, so it
contributes nothing.  Points on several moving bands are weighted by one
over their multiplicity, which makes the stratified sum an unbiased
integral over the union.  Periodic points contribute the exact homogenized
value of their period class; the rest contribute the finite-horizon
quotient of their accumulated crossing word.
"""
from __future__ import annotations

import concurrent.futures
import os
from dataclasses import dataclass

import numpy as np

from . import batch
from .counting import CountingQM, homogenized_tuple
from .errors import DegenerateCrossing
from .flow import flux_check, require_validity
from .surface import Scenario, StripSpec, closing_word, nudge_off_cut_lines
from .words import Word, reduce_letters

RETURN_TOL = 1e-9
NUDGE_RETRIES = 3
_CHUNK_SAMPLES = 180_000


@dataclass(frozen=True)
class TrajectoryRecord:
    start: tuple[float, float]
    end: tuple[float, float]
    iterates: int
    word: Word
    kind: str  # "stationary" | "periodic" | "bad"
    period: int | None = None
    class_word: Word | None = None


@dataclass(frozen=True)
class RhoEstimate:
    value: float
    stderr: float
    per_class: dict[str, tuple[float, float]]
    bad_area: float
    bad_contribution_bound: float
    samples: int


@dataclass(frozen=True)
class RhoPrediction:
    value: float
    error_radius: float


def deficiency(q: CountingQM) -> float:
    """d_r = r(a) + r(b) - r(ab) for the homogenized quasimorphism."""
    pat = q.pattern.letters
    return (homogenized_tuple(pat, (1,)) + homogenized_tuple(pat, (2,))
            - homogenized_tuple(pat, (1, 2)))


def bad_rate_bound(scenario: Scenario) -> float:
    """Per-unit-area bound on |word|/K for any orbit: at most two letters
    per strip application per step plus the amortized closing chain."""
    return 6.0 * scenario.N + 1.0


def rho_predicted(scenario: Scenario, q: CountingQM) -> RhoPrediction:
    """Analytic prediction tau * N * d_r with the bad-set error radius."""
    value = scenario.tau * scenario.N * deficiency(q)
    budget = scenario.validation.bad_area_budget if scenario.validation else 0.0
    return RhoPrediction(value=value, error_radius=budget * bad_rate_bound(scenario))


# -- sample generation ---------------------------------------------------------


def _ramp_points(strip: StripSpec, n: int, seed: int, strip_index: int):
    """Deterministic uniform points on the strip's moving band."""
    rng = np.random.Generator(
        np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, strip_index]))
    along = rng.random(n)
    h = strip.smoothing + rng.random(n) * strip.ramp_width
    if strip.direction == "H":
        x, y = along, strip.offset + h
    elif strip.direction == "V":
        x, y = strip.offset + h, along
    else:
        y = along
        x = strip.offset + h + y
    # deterministic nudge off the cut lines
    x = np.where(np.abs(x - np.rint(x)) < 1e-12, x + 1e-9, x)
    y = np.where(np.abs(y - np.rint(y)) < 1e-12, y + 1e-9, y)
    return x, y


def _ramp_multiplicity(scenario: Scenario, x: np.ndarray, y: np.ndarray):
    mult = np.zeros(x.shape, dtype=np.int64)
    for s in scenario.strips:
        if s.direction == "H":
            tr = (y - s.offset) % 1.0
        elif s.direction == "V":
            tr = (x - s.offset) % 1.0
        else:
            tr = (x - y - s.offset) % 1.0
        mult += (tr > s.smoothing) & (tr < s.width - s.smoothing)
    return np.maximum(mult, 1)


def _canonical_class(core: tuple[int, ...]) -> str:
    """Lexicographically minimal cyclic rotation, as word text."""
    if not core:
        return ""
    best = min(core[i:] + core[:i] for i in range(len(core)))
    return Word(best, _reduced=True).text()


def _cyclic_core(letters: tuple[int, ...]) -> tuple[int, ...]:
    i, j = 0, len(letters)
    while j - i >= 2 and letters[i] == -letters[j - 1]:
        i += 1
        j -= 1
    return letters[i:j]


# -- batch evaluation ------------------------------------------------------------


def _evaluate_batch(scenario: Scenario, q: CountingQM, K: int,
                    x: np.ndarray, y: np.ndarray, home: np.ndarray):
    """Classify a batch and return per-sample values and class keys.

    Returns (values, kinds, class_keys, degenerate) with kinds
    0 = stationary, 1 = periodic, 2 = bad.
    """
    m = scenario.m
    pattern = q.pattern.letters
    run = batch.run_batch(scenario, scenario.tau, K, x, y,
                          home=home, collect=True, m_snapshot=m)
    returned = batch.wrapped_return(run.x_m, run.y_m, x, y, RETURN_TOL)
    periodic = returned & ~run.foreign & run.moved
    bad = run.moved & ~periodic
    n = x.size
    values = np.zeros(n)
    kinds = np.zeros(n, dtype=np.int64)
    kinds[periodic] = 1
    kinds[bad] = 2
    class_keys: dict[int, str] = {}

    apps = run.applications_per_step
    m_words = batch.assemble_words(run, n, max_key=float(m * apps),
                                   only=np.nonzero(periodic)[0])
    cache: dict[tuple[int, ...], tuple[str, float]] = {}
    for i in np.nonzero(periodic)[0]:
        core = _cyclic_core(reduce_letters(m_words.get(int(i), ())))
        hit = cache.get(core)
        if hit is None:
            hit = (_canonical_class(core), homogenized_tuple(pattern, core))
            cache[core] = hit
        class_keys[int(i)] = hit[0]
        values[i] = hit[1] / m

    bad_idx = np.nonzero(bad)[0]
    if bad_idx.size:
        full_words = batch.assemble_words(run, n, only=bad_idx)
        hh = scenario.surface.hole_halfwidth
        for i in bad_idx:
            letters = list(full_words.get(int(i), ()))
            end = (float(run.x_end[i]), float(run.y_end[i]))
            start = (float(x[i]), float(y[i]))
            close, _ = closing_word(end, start, hh)
            letters.extend(close.letters)
            values[i] = homogenized_tuple(pattern, reduce_letters(letters)) / K
    return values, kinds, class_keys, run.degenerate


def _chunk_task(args):
    (scenario, q, K, strip_indices, n, seed) = args
    xs, ys, homes = [], [], []
    for si in strip_indices:
        x, y = _ramp_points(scenario.strips[si], n, seed, si)
        xs.append(x)
        ys.append(y)
        homes.append(np.full(n, si, dtype=np.int64))
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    home = np.concatenate(homes)
    mult = _ramp_multiplicity(scenario, x, y)
    values, kinds, class_keys, degenerate = _evaluate_batch(
        scenario, q, K, x, y, home)
    attempt = 0
    while degenerate.any():
        if attempt >= NUDGE_RETRIES:
            raise DegenerateCrossing(
                f"degenerate samples persisted after {NUDGE_RETRIES} nudges")
        attempt += 1
        idx = np.nonzero(degenerate)[0]
        shift = attempt * 1e-9
        v2, k2, c2, d2 = _evaluate_batch(
            scenario, q, K, x[idx] + shift, y[idx] + shift, home[idx])
        values[idx], kinds[idx] = v2, k2
        for local, orig in enumerate(idx):
            class_keys.pop(int(orig), None)
            if local in c2:
                class_keys[int(orig)] = c2[local]
        degenerate = np.zeros_like(degenerate)
        degenerate[idx[d2]] = True

    weights = 1.0 / mult
    contrib = values * weights
    stats = []
    for block, si in enumerate(strip_indices):
        sel = slice(block * n, (block + 1) * n)
        strip = scenario.strips[si]
        area = strip.ramp_width  # chart area of the moving band
        per_class: dict[str, tuple[float, float]] = {}
        for i in range(sel.start, sel.stop):
            key = class_keys.get(i)
            if key is None:
                continue
            a, c = per_class.get(key, (0.0, 0.0))
            per_class[key] = (a + weights[i] * area / n,
                              c + contrib[i] * area / n)
        block_contrib = contrib[sel]
        stats.append({
            "area": area,
            "n": n,
            "mean": float(block_contrib.mean()),
            "var": float(block_contrib.var()),
            "bad_weight": float(weights[sel][kinds[sel] == 2].sum()),
            "per_class": per_class,
        })
    return stats


def rho_estimate(scenario: Scenario, q: CountingQM, K: int | None = None,
                 samples_per_strip: int = 1000, seed: int = 0,
                 workers: int | None = None) -> RhoEstimate:
    """Monte Carlo estimate of the induced quasimorphism at the scenario map.

    Stratified over the strips' moving bands with multiplicity-deduped
    weights; per-strip sample streams are seeded independently, so the
    result is reproducible and independent of worker partitioning.
    """
    fa, fb = flux_check(scenario)
    if (fa, fb) != (0.0, 0.0):
        raise ValueError(f"nonzero flux {(fa, fb)}: map is not Hamiltonian")
    require_validity(scenario, scenario.tau)
    m = scenario.m
    if K is None:
        K = 4 * m
    if K % m != 0:
        raise ValueError(f"K={K} must be a multiple of m={m}")
    if samples_per_strip < 1:
        raise ValueError("samples_per_strip must be >= 1")
    if workers is None:
        workers = int(os.environ.get("STRIPFLOW_WORKERS", "1"))

    strips_per_chunk = max(1, _CHUNK_SAMPLES // max(samples_per_strip, 1))
    indices = list(range(len(scenario.strips)))
    chunks = [indices[i:i + strips_per_chunk]
              for i in range(0, len(indices), strips_per_chunk)]
    tasks = [(scenario, q, K, chunk, samples_per_strip, seed)
             for chunk in chunks]
    if workers > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            chunk_stats = list(pool.map(_chunk_task, tasks))
    else:
        chunk_stats = [_chunk_task(t) for t in tasks]

    value = 0.0
    variance = 0.0
    bad_area = 0.0
    per_class: dict[str, tuple[float, float]] = {}
    total = 0
    for stats in chunk_stats:  # fixed strip order: reproducible reduction
        for s in stats:
            a, n = s["area"], s["n"]
            value += a * s["mean"]
            variance += (a * a / n) * s["var"]
            bad_area += a * s["bad_weight"] / n
            total += n
            for key, (ca, cc) in s["per_class"].items():
                pa, pc = per_class.get(key, (0.0, 0.0))
                per_class[key] = (pa + ca, pc + cc)
    return RhoEstimate(
        value=value,
        stderr=float(np.sqrt(variance)),
        per_class=per_class,
        bad_area=bad_area,
        bad_contribution_bound=bad_area * bad_rate_bound(scenario),
        samples=total,
    )


def iterate_word(scenario: Scenario, q: CountingQM, p: tuple[float, float],
                 K: int) -> TrajectoryRecord:
    """Track one point for K composed steps and classify its orbit."""
    if K < 1:
        raise ValueError("K must be >= 1")
    m = scenario.m
    p = nudge_off_cut_lines(p)
    for _ in range(NUDGE_RETRIES + 1):
        x = np.array([p[0]])
        y = np.array([p[1]])
        home = np.full(1, -1, dtype=np.int64)
        on_own = [i for i, s in enumerate(scenario.strips) if s.on_ramp(*p)]
        if on_own:
            home[0] = on_own[0]
        run = batch.run_batch(scenario, scenario.tau, K, x, y,
                              home=home, collect=True,
                              m_snapshot=min(m, K))
        if not run.degenerate[0]:
            break
        p = (p[0] + 1e-9, p[1] + 1e-9)
    else:
        raise DegenerateCrossing(f"point {p} degenerate after retries")

    end = (float(run.x_end[0]), float(run.y_end[0]))
    letters = list(batch.assemble_words(run, 1).get(0, ()))
    close, _ = closing_word(end, p, scenario.surface.hole_halfwidth)
    word = Word(tuple(letters) + close.letters)
    if not run.moved[0]:
        return TrajectoryRecord(start=p, end=end, iterates=K, word=word,
                                kind="stationary")
    returned = K >= m and bool(
        batch.wrapped_return(run.x_m, run.y_m, x, y, RETURN_TOL)[0])
    if returned and not run.foreign[0]:
        m_letters = reduce_letters(
            batch.assemble_words(
                run, 1, max_key=float(m * run.applications_per_step)).get(0, ()))
        core = _cyclic_core(m_letters)
        return TrajectoryRecord(start=p, end=end, iterates=K, word=word,
                                kind="periodic", period=m,
                                class_word=Word(core, _reduced=True))
    return TrajectoryRecord(start=p, end=end, iterates=K, word=word, kind="bad")


def grid_estimate(scenario: Scenario, q: CountingQM, K: int | None = None,
                  grid: int = 400) -> RhoEstimate:
    """Full enumeration over an evenly spaced grid (no sampling).

    Every cell center on some moving band is iterated; the rest of the
    surface is exactly fixed and contributes zero.  Serves as the
    independent cross-check for rho_estimate.
    """
    fa, fb = flux_check(scenario)
    if (fa, fb) != (0.0, 0.0):
        raise ValueError(f"nonzero flux {(fa, fb)}: map is not Hamiltonian")
    require_validity(scenario, scenario.tau)
    m = scenario.m
    if K is None:
        K = 4 * m
    if K % m != 0:
        raise ValueError(f"K={K} must be a multiple of m={m}")
    xs = (np.arange(grid) + 0.5) / grid
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    gx, gy = gx.ravel(), gy.ravel()
    home = np.full(gx.size, -1, dtype=np.int64)
    covered = np.zeros(gx.size, dtype=bool)
    for idx, s in enumerate(scenario.strips):
        if s.direction == "H":
            tr = (gy - s.offset) % 1.0
        elif s.direction == "V":
            tr = (gx - s.offset) % 1.0
        else:
            tr = (gx - gy - s.offset) % 1.0
        on = (tr > s.smoothing) & (tr < s.width - s.smoothing)
        home[on & ~covered] = idx
        covered |= on
    sel = np.nonzero(covered)[0]
    x, y = gx[sel], gy[sel]
    values, kinds, class_keys, degenerate = _evaluate_batch(
        scenario, q, K, x, y, home[sel])
    if degenerate.any():
        idx = np.nonzero(degenerate)[0]
        v2, k2, _, _ = _evaluate_batch(
            scenario, q, K, x[idx] + 1e-9, y[idx] + 1e-9, home[sel][idx])
        values[idx], kinds[idx] = v2, k2
    cell = 1.0 / (grid * grid)
    value = float(values.sum() * cell)
    count = values.size
    covered_area = count * cell
    stderr = covered_area * float(values.std()) / np.sqrt(max(count, 1))
    per_class: dict[str, tuple[float, float]] = {}
    for i, key in class_keys.items():
        a, c = per_class.get(key, (0.0, 0.0))
        per_class[key] = (a + cell, c + values[i] * cell)
    bad_area = float((kinds == 2).sum()) * cell
    return RhoEstimate(
        value=value,
        stderr=stderr,
        per_class=per_class,
        bad_area=bad_area,
        bad_contribution_bound=bad_area * bad_rate_bound(scenario),
        samples=count,
    )
