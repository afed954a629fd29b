"""Trajectory estimator: classification, iterate_word, rho estimates."""
import numpy as np
import pytest

from stripflow.counting import CountingQM, estimate_defect, homogenized
from stripflow.errors import ValidityWindowExceeded
from stripflow.estimator import (RhoEstimate, deficiency, grid_estimate,
                                 iterate_word, rho_estimate, rho_predicted)
from stripflow.surface import (HoledTorus, Scenario, build_scenario,
                               validate_scenario)
from stripflow.words import Word

AB = CountingQM.from_text("ab")
COMM = CountingQM.from_text("abAB")


def _scenario(N=1, T=0.16, m=16, **kw):
    return build_scenario(N, T, m, 0.02, **kw)


def test_deficiency_values():
    assert deficiency(AB) == -1.0
    assert deficiency(COMM) == 0.0


def test_stationary_point():
    s = _scenario()
    rec = iterate_word(s, AB, (0.2, 0.2), 64)
    assert rec.kind == "stationary"
    assert rec.word == Word()
    assert rec.end == (0.2, 0.2)


def test_h_strip_period_class_unsmoothed():
    # delta' = 0, sparse-window regime T*m << 1: ramp points traverse the
    # loop in m steps; find a clean one and check its class is a.
    s = _scenario(T=0.01, m=8, smoothing=0.0)
    strip = s.strips[0]
    for frac in np.linspace(0.05, 0.95, 25):
        p = (0.52 + frac / 7, strip.offset + frac * strip.width)
        rec = iterate_word(s, AB, p, s.m)
        if rec.kind == "periodic":
            core, _ = rec.class_word.cyclic_reduce()
            assert core == Word.from_text("a")
            assert rec.period == s.m
            break
    else:
        pytest.fail("no clean H-strip point found")


def test_d_strip_period_class_unsmoothed():
    s = _scenario(T=0.01, m=8, smoothing=0.0)
    strip = s.strips[2]
    for frac in np.linspace(0.05, 0.95, 25):
        u = strip.offset + frac * strip.width
        p = (u + 0.29, 0.29)
        rec = iterate_word(s, AB, p, s.m)
        if rec.kind == "periodic":
            assert homogenized(AB, rec.class_word) == -1.0  # class (ab)^-1
            break
    else:
        pytest.fail("no clean D-strip point found")


def test_iterate_word_narrow_ramp_loop_counts():
    s = _scenario()  # default ramp = width/8: 8 loops per m steps
    strip = s.strips[0]
    p = (0.53, strip.offset + strip.width / 2)
    rec = iterate_word(s, AB, p, 4 * s.m)
    assert rec.kind == "periodic"
    assert rec.word == Word.from_text("a" * 32)  # 8 loops/period * 4 periods
    core, _ = rec.class_word.cyclic_reduce()
    assert core == Word.from_text("a" * 8)


def test_iterate_word_nudges_degenerate_start():
    s = _scenario()
    rec = iterate_word(s, AB, (1.0, 0.5), 16)  # exactly on a cut line
    assert rec.kind in ("stationary", "periodic", "bad")


def test_rho_predicted_examples():
    s4 = _scenario(N=4, T=0.04, m=64)
    pred = rho_predicted(s4, AB)
    assert pred.value == pytest.approx(-4 * s4.tau)
    assert pred.error_radius > 0
    assert rho_predicted(s4, COMM).value == 0.0
    empty = Scenario(HoledTorus(0.02), (), 0, 0.1, 4)
    empty = empty.with_validation(validate_scenario(empty))
    assert rho_predicted(empty, AB).value == 0.0


def test_rho_estimate_zero_strips():
    empty = Scenario(HoledTorus(0.02), (), 0, 0.1, 4)
    empty = empty.with_validation(validate_scenario(empty))
    est = rho_estimate(empty, AB, K=4, samples_per_strip=10)
    assert est.value == 0.0 and est.stderr == 0.0 and est.samples == 0


def test_rho_estimate_rejects_bad_K():
    s = _scenario()
    with pytest.raises(ValueError):
        rho_estimate(s, AB, K=10)  # not a multiple of m


def test_rho_estimate_matches_prediction():
    s = _scenario()
    est = rho_estimate(s, AB, samples_per_strip=3000, seed=5)
    assert isinstance(est, RhoEstimate)
    pred = rho_predicted(s, AB)
    assert est.value == pytest.approx(pred.value, rel=0.12)
    assert est.stderr < abs(pred.value)
    assert est.samples == 9000
    # accounting identity: per-class + bad contributions add to the value
    tallied = sum(c for _, c in est.per_class.values())
    assert abs(est.value - tallied) <= est.bad_area * (6 * s.N + 1) + 1e-12


def test_rho_estimate_deterministic():
    s = _scenario(N=2, T=0.08, m=32)
    a = rho_estimate(s, AB, samples_per_strip=500, seed=42)
    b = rho_estimate(s, AB, samples_per_strip=500, seed=42)
    assert a == b
    c = rho_estimate(s, AB, samples_per_strip=500, seed=43)
    assert a.value != c.value


def test_rho_estimate_orientation_antisymmetry():
    s = _scenario()
    flipped = Scenario(
        surface=s.surface,
        strips=tuple(type(st)(st.direction, st.offset, st.width,
                              -st.orientation, st.smoothing, st.copy_id)
                     for st in s.strips),
        N=s.N, T=s.T, m=s.m, validation=s.validation)
    a = rho_estimate(s, AB, samples_per_strip=2000, seed=7)
    b = rho_estimate(flipped, AB, samples_per_strip=2000, seed=7)
    assert a.value + b.value == pytest.approx(0.0, abs=2 * (a.stderr + b.stderr) + 1e-9)


def test_periodic_homogenization_consistency():
    # for periodic samples, hom(class)/m equals the K-word quotient within D/K
    s = _scenario()
    demp = estimate_defect(AB, 4)
    K = 4 * s.m
    strip = s.strips[2]
    found = 0
    for frac in np.linspace(0.05, 0.95, 12):
        u = strip.offset + strip.smoothing + frac * strip.ramp_width
        p = (u + 0.63, 0.63)
        rec = iterate_word(s, AB, p, K)
        if rec.kind != "periodic":
            continue
        exact = homogenized(AB, rec.class_word) / s.m
        finite = homogenized(AB, rec.word) / K
        assert abs(exact - finite) <= demp / K + 1e-12
        found += 1
    assert found >= 6


def test_grid_estimate_agrees_with_monte_carlo_small():
    # band width an exact number of grid cells keeps the enumeration
    # quantization-free
    s = _scenario(T=0.05, m=8, smoothing=0.0)
    K = 2 * s.m
    grid = grid_estimate(s, AB, K=K, grid=240)
    mc = rho_estimate(s, AB, K=K, samples_per_strip=4000, seed=11)
    combined = np.hypot(grid.stderr, mc.stderr)
    assert abs(grid.value - mc.value) <= 3 * combined


def test_validity_propagates():
    s = _scenario(N=1, T=0.24, m=2, smoothing=0.0)
    with pytest.raises(ValidityWindowExceeded):
        rho_estimate(s, AB, K=2, samples_per_strip=10)


def test_stationary_dominance_for_small_budget_scenario():
    # fraction classified periodic >= 1 - 2 * budget / strip area when the
    # overlap budget is small
    s = _scenario(T=0.008, m=4, smoothing=0.0)
    est = rho_estimate(s, AB, samples_per_strip=4000, seed=21)
    budget = s.validation.bad_area_budget
    total_area = sum(st.width for st in s.strips)
    periodic_fraction = 1.0 - est.bad_area / sum(st.ramp_width for st in s.strips)
    assert periodic_fraction >= 1.0 - 2.0 * budget / total_area
