import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from checkertail.bootstrap import (
    BLOCK_SIZE,
    BootstrapDistribution,
    MultiplierBootstrap,
    MultiplierDraw,
    MultiplierLaw,
    bootstrap_distribution,
    bootstrap_tail_replicate,
    bootstrap_values,
    confidence_interval,
    draw_multipliers,
    multiplier_tail_values,
    replicate_stream,
)
from checkertail.checkerboard import CheckerboardGrid, build_grid
from checkertail.copula_models import Clayton, Comonotone, Independence
from checkertail.empirical import WeightedEmpiricalCopula, rank_sample
from checkertail.tail import TailCopulaEstimator


def test_exponential_moments():
    d = draw_multipliers(MultiplierLaw.exponential(), 10**6, np.random.default_rng(1))
    assert d.xi_bar == pytest.approx(1.0, abs=0.01)
    assert d.xi.std() == pytest.approx(1.0, abs=0.01)
    assert np.all(d.xi > 0)


def test_normalised_weights_sum_to_n(rng):
    d = draw_multipliers(MultiplierLaw.exponential(), 777, rng)
    assert np.sum(d.xi / d.xi_bar) == pytest.approx(777, abs=1e-9)
    assert d.delta == pytest.approx(d.xi.max() / (d.n * d.xi_bar))


def test_gamma_law_moments():
    law = MultiplierLaw.gamma(4.0)
    assert (law.mean, law.std, law.scale) == (1.0, 0.5, 2.0)
    d = law.draw(200_000, np.random.default_rng(2))
    assert d.xi.std() == pytest.approx(0.5, abs=0.01)


def test_custom_law_guarded():
    law = MultiplierLaw("bad", 1.0, 1.0, lambda rng, size: rng.normal(size=size))
    with pytest.raises(ValueError, match="positive"):
        draw_multipliers(law, 100, 0)
    X = Clayton(1.0).sample(200, 0)
    with pytest.raises(ValueError, match="nonpositive"):
        bootstrap_distribution(X, law, k=10, m=20, B=4, random_state=0)
    with pytest.raises(ValueError):
        MultiplierLaw("zero", 1.0, 0.0, None)
    with pytest.raises(ValueError):
        MultiplierDraw(np.array([]))


def test_delta_is_order_log_n_over_n():
    n = 10_000
    rng = np.random.default_rng(3)
    deltas = [draw_multipliers(MultiplierLaw.exponential(), n, rng).delta for _ in range(100)]
    assert max(deltas) <= 3 * math.log(n) / n


def test_replicate_streams_are_counter_based():
    root = np.random.SeedSequence(99)
    a = replicate_stream(root, 5).random(3)
    b = np.random.default_rng(np.random.SeedSequence(99, spawn_key=(5,))).random(3)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, replicate_stream(root, 6).random(3))


def test_replicate_matches_direct_construction(rng):
    # oracle: weighted copula grid, bilinear smoothing, tail rescaling
    n, k, m = 800, 40, 150
    X = Clayton(1.0).sample(n, rng)
    xi = rng.exponential(size=n)
    wc = WeightedEmpiricalCopula(rank_sample(X), xi)
    g = np.arange(m + 1) / m
    U, V = np.meshgrid(g, g, indexing="ij")
    grid = CheckerboardGrid(wc(U.ravel(), V.ravel()).reshape(U.shape))
    for x, y in [(1.0, 1.0), (0.5, 2.0)]:
        expected = grid(k * x / n, k * y / n) / (k / n)
        got = bootstrap_tail_replicate(X, MultiplierDraw(xi), k, m, x=x, y=y)
        assert got == pytest.approx(expected, abs=1e-12)
        raw = bootstrap_tail_replicate(X, xi, k, m, x=x, y=y, smoothing="raw")
        assert raw == pytest.approx(wc(k * x / n, k * y / n) / (k / n), abs=1e-12)


def test_equal_weights_collapse(rng):
    # k / n and every corner i / m are multiples of 1 / n here
    n, k, m = 1000, 100, 50
    X = Clayton(1.0).sample(n, rng)
    for side in ("lower", "upper"):
        est = TailCopulaEstimator(k=k, m=m, side=side).fit(X)
        val = bootstrap_tail_replicate(X, np.full(n, 3.0), k, m, side=side)
        assert val == pytest.approx(est.lambda_, abs=1e-12)
    # off the rank grid the gap stays within the 1/n discreteness, rescaled
    n, k, m = 997, 37, 101
    X = Clayton(1.0).sample(n, rng)
    est = TailCopulaEstimator(k=k, m=m).fit(X)
    val = bootstrap_tail_replicate(X, np.ones(n), k, m)
    assert abs(val - est.lambda_) <= 2.0 / k + 1e-12


def test_near_degenerate_law_hugs_point_estimate(rng):
    X = Clayton(1.0).sample(1000, rng)
    est = TailCopulaEstimator(k=100, m=50).fit(X)
    law = MultiplierLaw.gamma(1e6)
    dist = bootstrap_distribution(X, law, k=100, m=50, B=50, random_state=1)
    # the unscaled replicates collapse to within one rank per axis; the
    # scaled ones do not, since mean / std = 1000 magnifies that rank jitter
    assert np.max(np.abs(dist.values - est.lambda_)) <= 2.0 / 100 + 1e-9


def test_comonotone_replicate(rng):
    n, k, m = 1000, 100, 50
    X = Comonotone().sample(n, rng)
    for _ in range(20):
        d = draw_multipliers(MultiplierLaw.exponential(), n, rng)
        val = bootstrap_tail_replicate(X, d, k, m)
        # the inverse overshoots by at most one atom: [1, 1 + n delta / k)
        assert 1.0 - 1e-12 <= val <= 1.0 + n * d.delta / k + 1e-12


def test_zero_argument_bounded_by_first_atom(rng):
    n, k, m = 1000, 100, 50
    X = Clayton(1.0).sample(n, rng)
    d = draw_multipliers(MultiplierLaw.exponential(), n, rng)
    val = bootstrap_tail_replicate(X, d, k, m, x=0.0, y=1.0)
    assert 0.0 <= val <= n * d.delta / k


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(4, 200))
def test_weighted_grid_gap(seed, m):
    rng = np.random.default_rng(seed)
    n = 600
    R = rank_sample(Clayton(1.0).sample(n, rng))
    d = draw_multipliers(MultiplierLaw.exponential(), n, rng)
    wc = WeightedEmpiricalCopula(R, d.xi)
    grid = build_grid(wc, m)
    u, v = rng.uniform(0, 1, (2, 2000))
    gap = np.abs(grid(u, v) - wc(u, v))
    assert np.all(gap <= 2 * (2 / m) + 2 * d.delta + 1e-12)


def test_weighted_modulus_counterexample_off_the_top_edge():
    # |dC - du| <= delta fails for v < 1: at v = 0 every increment is 0
    n = 500
    R = rank_sample(Independence().sample(n, 4))
    wc = WeightedEmpiricalCopula(R, np.random.default_rng(4).exponential(size=n))
    d = wc(0.9, 0.0) - wc(0.1, 0.0)
    assert abs(d - 0.8) > wc.delta


def test_values_share_draws_between_raw_and_checkerboard(rng):
    R = rank_sample(Clayton(1.0).sample(500, rng))
    xi = rng.exponential(size=(3, 500))
    both = multiplier_tail_values(R, xi, 25, 80)
    raw_only = multiplier_tail_values(R, xi, 25, None)
    np.testing.assert_array_equal(both["raw"], raw_only["raw"])
    assert set(raw_only) == {"raw"}


def test_determinism_and_thread_independence():
    X = Clayton(1.0).sample(1500, 8)
    a = bootstrap_distribution(X, k=40, m=300, B=3 * BLOCK_SIZE + 7, random_state=11)
    b = bootstrap_distribution(X, k=40, m=300, B=3 * BLOCK_SIZE + 7, random_state=11)
    c = bootstrap_distribution(X, k=40, m=300, B=3 * BLOCK_SIZE + 7, random_state=11, n_jobs=4)
    np.testing.assert_array_equal(a.replicates, b.replicates)
    np.testing.assert_array_equal(a.replicates, c.replicates)
    d = bootstrap_distribution(X, k=40, m=300, B=3 * BLOCK_SIZE + 7, random_state=12)
    assert not np.array_equal(a.replicates, d.replicates)


def test_replicates_do_not_depend_on_b():
    # replicate b uses its own stream, so a longer run extends a shorter one
    R = rank_sample(Clayton(1.0).sample(700, 2))
    law = MultiplierLaw.exponential()
    short = bootstrap_values(R, law, 30, 100, 20, 5)
    long = bootstrap_values(R, law, 30, 100, 130, 5)
    np.testing.assert_array_equal(short["checkerboard"], long["checkerboard"][:20])


def test_scaled_replicates_definition(rng):
    X = Clayton(1.0).sample(1000, rng)
    law = MultiplierLaw.gamma(4.0)
    dist = bootstrap_distribution(X, law, k=50, m=100, B=10, random_state=0)
    lam = TailCopulaEstimator(k=50, m=100).fit(X).lambda_
    np.testing.assert_allclose(dist.replicates, 2.0 * math.sqrt(50) * (dist.values - lam))
    assert dist.estimate == lam and dist.B == 10


def test_independence_replicates_centred():
    X = Independence().sample(5000, 3)
    dist = bootstrap_distribution(X, k=200, m=800, B=300, random_state=2)
    assert np.all(np.isfinite(dist.replicates))
    assert abs(dist.replicates.mean()) < 3 * dist.replicates.std() / math.sqrt(300) + 0.05


# confidence intervals


def test_interval_from_zero_replicates():
    ci = confidence_interval(BootstrapDistribution(np.zeros(10), 0.4, 25), 0.4, 25, 0.9)
    assert (ci.lower, ci.upper) == (0.4, 0.4)
    assert ci.length == 0.0 and 0.4 in ci


def test_interval_hand_quantiles():
    # sorted {-1, -1, 1, 1}: lower-nearest order statistic at floor(p (B - 1))
    dist = BootstrapDistribution(np.array([1.0, -1.0, 1.0, -1.0]), 0.5, 16)
    assert dist.quantile(0.75) == 1.0
    assert dist.quantile(0.25) == -1.0
    ci = confidence_interval(dist, 0.5, 16, level=0.5)
    assert ci.lower == pytest.approx(0.5 - 1 / 4)
    assert ci.upper == pytest.approx(0.5 + 1 / 4)
    assert ci.length == pytest.approx(2 / 4)


def test_interval_clamping_keeps_raw_endpoints():
    # q(0.95) is the third order statistic, q(0.05) the first
    dist = BootstrapDistribution(np.array([1.0, 0.05, -1.0, 0.0]), 0.95, 4)
    ci = dist.confidence_interval(0.9)
    assert ci.raw_lower == pytest.approx(0.925) and ci.raw_upper == pytest.approx(1.45)
    assert ci.clamped and ci.upper == 1.0 and ci.lower == ci.raw_lower
    raw = dist.confidence_interval(0.9, clamp=False)
    assert not raw.clamped and raw.upper == ci.raw_upper
    assert raw.lower <= raw.upper


def test_interval_errors():
    with pytest.raises(ValueError, match="Empty"):
        confidence_interval(BootstrapDistribution(np.array([]), 0.5, 4), 0.5, 4)
    with pytest.raises(ValueError, match="level"):
        confidence_interval(BootstrapDistribution(np.zeros(3), 0.5, 4), 0.5, 4, level=1.0)
    with pytest.raises(ValueError, match="B"):
        bootstrap_distribution(Clayton(1.0).sample(100, 0), k=10, m=10, B=1)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), level=st.floats(0.05, 0.99))
def test_interval_ordered(seed, level):
    rng = np.random.default_rng(seed)
    dist = BootstrapDistribution(rng.normal(size=50), 0.5, 30)
    ci = dist.confidence_interval(level, clamp=False)
    assert ci.lower <= ci.upper


def test_estimator_api():
    X = Clayton(1.0).sample(2000, 0)
    mb = MultiplierBootstrap(k=44, m=437, n_bootstrap=200, random_state=1).fit(X)
    assert mb.k_ == 44 and mb.m_ == 437
    assert mb.ci_.lower <= mb.lambda_ <= mb.ci_.upper
    assert mb.distribution_.B == 200
    twin = clone(mb)
    assert twin.get_params()["n_bootstrap"] == 200
    again = twin.fit(X)
    np.testing.assert_array_equal(again.distribution_.replicates, mb.distribution_.replicates)
    with pytest.raises(ValueError):
        MultiplierBootstrap(k=10, m=10, side="sideways").fit(X)


@pytest.mark.slow
def test_replicate_sd_matches_asymptotic_sd():
    # average over Monte Carlo datasets of the bootstrap sd vs sqrt(0.1875)
    sds = []
    for r in range(40):
        X = Clayton(1.0).sample(2000, np.random.default_rng(1000 + r))
        dist = bootstrap_distribution(X, k=44, m=437, B=500, random_state=r)
        sds.append(dist.replicates.std(ddof=1))
    assert np.mean(sds) == pytest.approx(math.sqrt(0.1875), rel=0.25)
