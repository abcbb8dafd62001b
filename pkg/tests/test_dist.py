import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transit_sota.dist import (
    DiscreteCdf,
    DiscretePmf,
    ExhaustedLineError,
    GridMismatchError,
    HeadwayModel,
    LognormalSpec,
    convolve,
    discretize_lognormal,
    interleave_station_pmfs,
    propagate_headway,
    renormalize_waiting,
    station_tie_mass,
    waiting_from_headway,
)
from transit_sota.grid import TimeGrid

from conftest import random_pmf

GRID = TimeGrid(delta_seconds=15.0, budget_ticks=80)


def pmf(points, tail=0.0, grid=GRID):
    return DiscretePmf.from_dict(grid, points, tail=tail)


# --- type invariants ---------------------------------------------------------


def test_pmf_mass_conservation_enforced():
    with pytest.raises(ValueError):
        DiscretePmf.from_dict(GRID, {1: 0.5})
    with pytest.raises(ValueError):
        DiscretePmf.from_dict(GRID, {1: 0.9}, tail=0.2)


def test_pmf_rejects_negative_mass():
    mass = np.zeros(GRID.budget_ticks + 1)
    mass[1] = 1.5
    mass[2] = -0.5
    with pytest.raises(ValueError):
        DiscretePmf(GRID, mass)


def test_survival_matches_prefix_sums():
    p = pmf({1: 0.05, 3: 0.05, 10: 0.90})
    s = p.survival
    prefix = np.cumsum(p.mass)
    assert np.all(np.abs(s - (1.0 - prefix)) < 1e-12)
    assert np.all(np.diff(s) <= 1e-15)
    assert s[0] == pytest.approx(1.0)  # one-tick floor: nothing arrives at 0
    assert s[1] == pytest.approx(0.95)


def test_survival_exact_zero_after_support_ends():
    p = pmf({2: 0.5, 6: 0.5})
    assert p.survival[6] == 0.0
    assert p.survival[5] == 0.5


def test_cdf_must_be_monotone():
    with pytest.raises(ValueError):
        DiscreteCdf(GRID, np.linspace(1.0, 0.0, GRID.budget_ticks + 1))


# --- convolution -------------------------------------------------------------


def test_convolve_point_masses():
    a, b = pmf({2: 1.0}), pmf({3: 1.0})
    out = convolve(a, b)
    assert out.mass[5] == pytest.approx(1.0, abs=1e-12)
    assert out.tail_mass == pytest.approx(0.0, abs=1e-12)


def test_convolve_identity_element():
    a = pmf({1: 0.3, 7: 0.7})
    delta0 = pmf({0: 1.0})
    out = convolve(a, delta0)
    assert np.allclose(out.mass, a.mass, atol=1e-12)


def test_convolve_uniforms_enumerated():
    # enumerate the four outcome pairs of two uniform-on-{1,2} pmfs
    u = pmf({1: 0.5, 2: 0.5})
    out = convolve(u, u)
    assert out.mass[2] == pytest.approx(0.25, abs=1e-12)
    assert out.mass[3] == pytest.approx(0.5, abs=1e-12)
    assert out.mass[4] == pytest.approx(0.25, abs=1e-12)


def test_convolve_overflow_goes_to_tail():
    a = pmf({GRID.budget_ticks - 1: 1.0})
    out = convolve(a, pmf({2: 1.0}))
    assert out.tail_mass == pytest.approx(1.0, abs=1e-12)


def test_convolve_grid_mismatch():
    other = TimeGrid(delta_seconds=30.0, budget_ticks=80)
    with pytest.raises(GridMismatchError):
        convolve(pmf({1: 1.0}), DiscretePmf.from_dict(other, {1: 1.0}))


@given(st.integers(0, 2**31 - 1), st.integers(0, 2**31 - 1))
@settings(max_examples=25, deadline=None)
def test_convolve_commutative_associative(seed_a, seed_b):
    rng = np.random.default_rng(seed_a ^ (seed_b << 1))
    a = random_pmf(rng, GRID)
    b = random_pmf(rng, GRID)
    c = random_pmf(rng, GRID)
    ab = convolve(a, b)
    ba = convolve(b, a)
    assert np.allclose(ab.mass, ba.mass, atol=1e-9)
    left = convolve(ab, c)
    right = convolve(a, convolve(b, c))
    assert np.allclose(left.mass, right.mass, atol=1e-9)
    assert abs(left.tail_mass - right.tail_mass) < 1e-9
    assert abs(left.mass.sum() + left.tail_mass - 1.0) < 1e-9


# --- waiting renormalization -------------------------------------------------


def test_renormalize_r_zero_is_identity():
    w = pmf({1: 0.05, 3: 0.05, 10: 0.90})
    assert renormalize_waiting(w, 0) is w


def test_renormalize_showcase_line1():
    # waiting {1: .05, 3: .05, 10: .9} conditioned on r=2:
    # staying mass .95; arrivals at +1 and +8
    w = pmf({1: 0.05, 3: 0.05, 10: 0.90})
    out = renormalize_waiting(w, 2)
    assert out.mass[1] == pytest.approx(0.05 / 0.95, abs=1e-12)
    assert out.mass[8] == pytest.approx(0.90 / 0.95, abs=1e-12)
    assert out.mass.sum() == pytest.approx(1.0, abs=1e-12)


def test_renormalize_showcase_line3():
    w = pmf({2: 0.5, 6: 0.5})
    out = renormalize_waiting(w, 2)
    assert out.mass[4] == pytest.approx(1.0, abs=1e-12)


def test_renormalize_exhausted_line_raises():
    w = pmf({2: 0.5, 6: 0.5})
    with pytest.raises(ExhaustedLineError):
        renormalize_waiting(w, 6)


@given(st.integers(0, 2**31 - 1), st.integers(0, 60))
@settings(max_examples=40, deadline=None)
def test_renormalize_identity_property(seed, r):
    rng = np.random.default_rng(seed)
    w = random_pmf(rng, GRID, floor=True)
    s = w.survival
    if s[r] <= 0.0:
        return
    out = renormalize_waiting(w, r)
    for theta in range(1, GRID.budget_ticks - r + 1):
        assert abs(out.mass[theta] * s[r] - w.mass[r + theta]) < 1e-12
    # deficit equals the conditional no-arrival tail exactly
    assert abs(out.mass.sum() + out.tail_mass - 1.0) < 1e-9


# --- lognormal discretization --------------------------------------------------


def test_lognormal_mode_calibration():
    # mode fixed at 10 min = 40 ticks with sigma 0.25 -> mu = ln(40) + 0.0625
    sigma = 0.25
    spec = LognormalSpec(mu=math.log(40.0) + sigma**2, sigma=sigma, shift=20)
    grid = TimeGrid(delta_seconds=15.0, budget_ticks=200)
    out = discretize_lognormal(spec, grid)
    assert spec.mode_ticks == pytest.approx(40.0)
    argmax = int(np.argmax(out.mass))
    assert abs(argmax - (20 + 40)) <= 1
    assert abs(out.mass.sum() + out.tail_mass - 1.0) < 1e-9
    assert out.mass[:20].sum() == 0.0


def test_lognormal_degenerate_sigma_concentrates():
    # sigma -> 0 limit: relative spread 1% of a 10-tick mode is well inside
    # one cell, so the mass collapses onto the ticks bracketing shift + mode
    sigma = 0.01
    spec = LognormalSpec(mu=math.log(10.0) + sigma**2, sigma=sigma, shift=20)
    grid = TimeGrid(delta_seconds=15.0, budget_ticks=200)
    out = discretize_lognormal(spec, grid)
    assert out.mass[29] + out.mass[30] + out.mass[31] >= 0.999
    top2 = np.sort(out.mass)[-2:].sum()
    assert top2 >= 0.99


def test_lognormal_sigma_quarter_cdf_at_1_5_mode():
    # F(1.5 * mode) is about 0.9 for sigma = 0.25
    sigma = 0.25
    spec = LognormalSpec(mu=math.log(40.0) + sigma**2, sigma=sigma, shift=20)
    grid = TimeGrid(delta_seconds=15.0, budget_ticks=200)
    out = discretize_lognormal(spec, grid)
    upto = 20 + 60  # shift + 1.5 * mode
    assert out.cumulative[upto] == pytest.approx(0.9, abs=0.03)


def test_lognormal_rejects_bad_params():
    with pytest.raises(ValueError):
        LognormalSpec(mu=1.0, sigma=0.0, shift=5)
    with pytest.raises(ValueError):
        LognormalSpec(mu=1.0, sigma=0.5, shift=0)


# --- headway propagation and waiting ------------------------------------------


def test_propagate_deterministic_travel_is_step():
    travel = pmf({5: 1.0})
    cdf = propagate_headway(10, travel)
    assert cdf.values[9] == pytest.approx(0.0, abs=1e-12)
    assert cdf.values[10] == pytest.approx(1.0, abs=1e-12)


def test_propagate_uniform_travel_enumerated():
    # X1, X2 uniform on {4, 5}; X2 shifted by 10: support {9, 10, 11}
    travel = pmf({4: 0.5, 5: 0.5})
    cdf = propagate_headway(10, travel)
    masses = np.diff(np.concatenate(([0.0], cdf.values)))
    assert masses[9] == pytest.approx(0.25, abs=1e-12)
    assert masses[10] == pytest.approx(0.5, abs=1e-12)
    assert masses[11] == pytest.approx(0.25, abs=1e-12)


@given(st.integers(0, 2**31 - 1), st.integers(10, 25))
@settings(max_examples=30, deadline=None)
def test_propagate_mean_preserved(seed, h):
    rng = np.random.default_rng(seed)
    # pmf fully inside the grid and headway above the travel spread, so the
    # inter-vehicle difference never goes negative and E equals h exactly
    small = TimeGrid(delta_seconds=15.0, budget_ticks=80)
    k = int(rng.integers(1, 4))
    ticks = rng.choice(np.arange(1, 10), size=k, replace=False)
    probs = rng.dirichlet(np.ones(k))
    travel = DiscretePmf.from_dict(small, {int(t): float(p) for t, p in zip(ticks, probs)})
    cdf = propagate_headway(h, travel)
    assert cdf.implied_mean() == pytest.approx(h, abs=1e-6)


def test_waiting_from_deterministic_headway_uniform():
    h = 8
    values = np.zeros(GRID.budget_ticks + 1)
    values[h:] = 1.0
    model = HeadwayModel(origin_headway=h, cdf=DiscreteCdf(GRID, values), mean_headway=float(h))
    w = waiting_from_headway(model)
    assert np.allclose(w.mass[1 : h + 1], 1.0 / h, atol=1e-12)
    assert w.mass[0] == 0.0
    assert w.mass[h + 1 :].sum() == pytest.approx(0.0, abs=1e-12)


def test_waiting_from_geometric_headway_memoryless():
    q = 0.2
    T = GRID.budget_ticks
    # geometric gap on ticks 1.. with P(G = g) = q (1-q)^(g-1)
    values = np.array([1.0 - (1.0 - q) ** t for t in range(T + 1)])
    mean = 1.0 / q
    model = HeadwayModel(origin_headway=5, cdf=DiscreteCdf(GRID, values), mean_headway=mean)
    w = waiting_from_headway(model)
    for theta in range(1, 30):
        expected = q * (1.0 - q) ** (theta - 1)
        assert abs(w.mass[theta] - expected) < 1e-6
    # memoryless: conditioning on r leaves the shape unchanged
    out = renormalize_waiting(w, 7)
    for theta in range(1, 20):
        assert abs(out.mass[theta] - w.mass[theta]) < 1e-6


def test_headway_model_validation():
    values = np.zeros(GRID.budget_ticks + 1)
    values[8:] = 1.0
    cdf = DiscreteCdf(GRID, values)
    with pytest.raises(ValueError):
        HeadwayModel(origin_headway=8, cdf=cdf, mean_headway=0.0)
    with pytest.raises(ValueError):
        HeadwayModel(origin_headway=0, cdf=cdf, mean_headway=8.0)


def test_waiting_instant_arrival_point_mass():
    # H hits 1 from tick 1 on: the next vehicle is always one tick away
    values = np.ones(GRID.budget_ticks + 1)
    values[0] = 0.0
    model = HeadwayModel(origin_headway=1, cdf=DiscreteCdf(GRID, values), mean_headway=1.0)
    w = waiting_from_headway(model)
    assert w.mass[1] == pytest.approx(1.0, abs=1e-12)


# --- interleaving -------------------------------------------------------------


def test_interleave_makes_supports_disjoint():
    rng = np.random.default_rng(5)
    pmfs = [random_pmf(rng, GRID, floor=True) for _ in range(3)]
    out = interleave_station_pmfs(pmfs)
    assert station_tie_mass(out) == 0.0
    for k, p in enumerate(out):
        support = np.nonzero(p.mass)[0]
        assert all(tick % 3 == (k + 1) % 3 for tick in support)
        # mass conserved
        assert abs(p.mass.sum() + p.tail_mass - 1.0) < 1e-9


def test_interleave_single_line_unchanged():
    rng = np.random.default_rng(6)
    p = random_pmf(rng, GRID)
    assert interleave_station_pmfs([p])[0] is p
