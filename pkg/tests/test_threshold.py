import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from tailreg.errors import GridExhausted, InputError, InsufficientData
from tailreg.model import TailSample
from tailreg.samplers import DgpSpec, SeedSpec, generate_dataset
from tailreg.threshold import (
    DEFAULT_GRID,
    _discrepancy_u,
    discrepancy,
    percentile_threshold,
    select_threshold,
    uniformized_residuals,
)

TRUE_BETA = np.array([0.1, 1.0, 1.0])


def pareto(n, seed, stream=0):
    d = generate_dataset(DgpSpec(), n, SeedSpec(seed, stream))
    return TailSample(d.responses, d.covariates, 1.0)


def test_default_grid():
    assert DEFAULT_GRID[0] == 0.02 and DEFAULT_GRID[-1] == 0.5
    assert len(DEFAULT_GRID) == 49


def test_uniformized_residual_collapses():
    rng = np.random.default_rng(0)
    X = np.column_stack([np.ones(20), rng.normal(size=20)])
    beta = np.array([0.2, -0.4])
    y = 2.0 * np.exp(np.exp(-(X @ beta)))
    u = uniformized_residuals(TailSample(y, X, 2.0), beta)
    np.testing.assert_allclose(u, math.exp(-1), rtol=1e-12)


def test_uniformized_residuals_ks_band():
    passed = 0
    for seed in range(50):
        s = pareto(2000, seed)
        u = uniformized_residuals(s, TRUE_BETA)
        assert np.all((u > 0) & (u < 1))
        passed += stats.kstest(u, "uniform").statistic < 1.36 / math.sqrt(s.n0)
    assert passed >= 45


def test_wrong_beta_concentrates_near_zero():
    s = pareto(1000, 1)
    u = uniformized_residuals(s, TRUE_BETA + np.array([10.0, 0, 0]))
    assert np.max(u) < 0.1 and np.median(u) < 1e-3


def test_discrepancy_examples():
    n = 1000
    assert _discrepancy_u(np.arange(1, n + 1) / n) == 0.0
    assert _discrepancy_u(np.full(n, 0.5)) == 0.25


def test_ties_share_highest_rank():
    u = np.array([0.1, 0.4, 0.4, 0.9])
    expected = np.mean((np.array([0.1, 0.4, 0.4, 0.9]) - np.array([0.25, 0.75, 0.75, 1.0])) ** 2)
    assert _discrepancy_u(u) == pytest.approx(expected, rel=1e-15)


def test_discrepancy_order_one_over_n():
    hits = sum(discrepancy(pareto(10_000, seed), TRUE_BETA) < 5e-4 for seed in range(40))
    assert hits >= 38


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(min_value=1e-6, max_value=1 - 1e-6), min_size=1, max_size=200), st.randoms(use_true_random=False))
def test_discrepancy_nonnegative_and_permutation_invariant(u, rnd):
    d = _discrepancy_u(np.array(u))
    shuffled = list(u)
    rnd.shuffle(shuffled)
    assert d >= 0
    assert _discrepancy_u(np.array(shuffled)) == d


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e3), st.integers(0, 1000))
def test_ratio_invariance(c, seed):
    s = pareto(300, seed)
    s2 = TailSample(s.responses * c, s.covariates, s.threshold * c)
    np.testing.assert_allclose(uniformized_residuals(s2, TRUE_BETA), uniformized_residuals(s, TRUE_BETA), rtol=1e-9, atol=1e-300)
    assert discrepancy(s2, TRUE_BETA) == pytest.approx(discrepancy(s, TRUE_BETA), rel=1e-9, abs=1e-15)


def test_percentile_linear():
    y = np.arange(1.0, 102.0)  # 1..101
    assert percentile_threshold(y, 0.1) == 91.0
    assert percentile_threshold([1.0, 2.0], 0.75) == 1.25


def test_scan_invariants():
    d = generate_dataset(DgpSpec(family="burr"), 2000, SeedSpec(3, 0))
    scan = select_threshold(d.responses, d.covariates)
    assert scan.discrepancy[scan.best] == scan.discrepancy.min()
    assert np.all(np.floor(scan.kappa_grid * 2000) > 30)
    assert scan.kappa_star == scan.kappa_grid[np.argmin(scan.discrepancy)]
    assert scan.w_star == percentile_threshold(d.responses, scan.kappa_star)
    assert scan.tail_sizes[scan.best] == np.sum(d.responses > scan.w_star)
    assert len(scan.fits) == scan.kappa_grid.size


def test_floor_drops_small_fractions():
    d = generate_dataset(DgpSpec(), 500, SeedSpec(4, 0))
    scan = select_threshold(d.responses, d.covariates)
    # floor(kappa * 500) > 30 needs kappa >= 0.07
    assert scan.kappa_grid[0] == pytest.approx(0.07)


def test_ties_choose_smallest_kappa():
    from tailreg.threshold import ThresholdScan

    scan = ThresholdScan(np.array([0.1, 0.2, 0.3]), np.ones(3), np.ones(3, int), np.array([0.5, 0.2, 0.2]), ((),) * 3, "ols", 10)
    assert scan.kappa_star == 0.2


def test_scan_deterministic():
    d = generate_dataset(DgpSpec(family="burr"), 1000, SeedSpec(5, 0))
    a = select_threshold(d.responses.copy(), d.covariates.copy(), "mle")
    b = select_threshold(d.responses.copy(), d.covariates.copy(), "mle")
    assert a.to_csv() == b.to_csv()
    assert a.kappa_star == b.kappa_star


def test_scan_csv_layout():
    d = generate_dataset(DgpSpec(), 400, SeedSpec(6, 0))
    lines = select_threshold(d.responses, d.covariates, grid=[0.2, 0.4]).to_csv().splitlines()
    assert lines[0] == "kappa,w,discrepancy"
    assert len(lines) == 3
    assert float(lines[1].split(",")[0]) == 0.2


def test_scan_errors():
    d = generate_dataset(DgpSpec(), 400, SeedSpec(7, 0))
    with pytest.raises(InsufficientData):
        select_threshold(d.responses[:150], d.covariates[:150])
    with pytest.raises(GridExhausted):
        select_threshold(d.responses, d.covariates, grid=[0.02, 0.05])
    with pytest.raises(InputError):
        select_threshold(d.responses, d.covariates, grid=[0.3, 0.2])
    with pytest.raises(InputError):
        select_threshold(d.responses, d.covariates[:-1])


def test_nonpositive_thresholds_skipped():
    rng = np.random.default_rng(8)
    y = np.concatenate([-rng.uniform(1, 2, 700), 1 + rng.pareto(2.0, 300)])
    X = np.ones((1000, 1))
    scan = select_threshold(y, X)
    assert np.all(scan.thresholds > 0)
    assert scan.kappa_grid.max() < 0.31
