import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from occtime.errors import DegenerateVarianceError, InvalidRangeError
from occtime.laws import Deterministic, Exponential, Gamma, IndependentProduct, MarshallOlkin, Uniform
from occtime.renewal_core import (
    LatticeConfig,
    exact_cdf_alpha,
    exact_cdf_beta,
    moments,
    normal_approx_cdf,
    simulate_alternating,
)
from occtime.storage_stats import StorageLaw, sojourn_moments


def exp_pair_alpha_cdf(t, x, nmax=200):
    """P(alpha(t) < x) for independent Exp(1) sojourns.

    In A-time the exits from A form a Poisson process of rate 1; alpha(t) < x
    means the first exit precedes x and, with n exits before A-time x, the n
    completed B-visits fill more than t - x.
    """
    n = np.arange(1, nmax)
    return (1 - math.exp(-x)) - float(np.sum(stats.gamma.cdf(t - x, n) * stats.poisson.pmf(n, x)))


# frozen after agreement with the oracle above (and with 1e7-path simulation)
FROZEN_ALPHA = {(2.0, 1.0): 0.34575736838829474, (1.0, 0.3): 0.14199228622216759, (5.0, 4.0): 0.8766238287698165}


def test_deterministic_path():
    law = IndependentProduct(Deterministic(1.0), Deterministic(1.0))
    p = simulate_alternating(law, 2.5, rng=0)
    assert (p.alpha_t, p.beta_t) == (1.5, 1.0)
    assert p.in_A_at_t and p.cycle_pairs == [(1.0, 1.0), (1.0, 1.0)]


@given(st.floats(0.1, 50.0), st.integers(0, 2**32), st.sampled_from(["A", "B"]))
def test_alpha_plus_beta_is_t(t, seed, start):
    law = MarshallOlkin(1.0, 2.0, 0.5)
    ps = simulate_alternating(law, t, rng=seed, replications=50, start=start)
    assert np.all(np.abs(ps.alpha_t + ps.beta_t - t) <= 1e-12 * t)
    assert np.all(ps.alpha_t >= 0) and np.all(ps.beta_t >= 0)
    one = simulate_alternating(law, t, rng=seed, start=start)
    assert all(d > 0 and u > 0 for d, u in one.cycle_pairs)


def test_beta_atom_at_zero_simulated(exp_law):
    ps = simulate_alternating(exp_law, 1.0, rng=11, replications=1_000_000)
    assert abs(np.mean(ps.beta_t == 0) - math.exp(-1)) < 0.002


def test_beta_atom_at_zero_series(exp_law):
    assert exact_cdf_beta(exp_law, 1.0, 0.0) == pytest.approx(math.exp(-1), abs=1e-12)


def test_deterministic_cdfs(det_law):
    assert exact_cdf_beta(det_law, 2.5, 1.2) == 1.0
    assert exact_cdf_alpha(det_law, 2.5, 1.4) == 0.0


@pytest.mark.parametrize("t,x", list(FROZEN_ALPHA))
def test_alpha_cdf_against_poisson_gamma_oracle(exp_law, t, x):
    value, res = exact_cdf_alpha(exp_law, t, x, full_output=True)
    assert abs(value - exp_pair_alpha_cdf(t, x)) <= float(res.error[0]) + 1e-6
    assert value == pytest.approx(FROZEN_ALPHA[(t, x)], abs=1e-12)


def test_alpha_and_beta_cdfs_are_complementary(exp_law):
    for t, x in [(2.0, 1.0), (3.0, 0.7), (1.0, 0.9)]:
        a = exact_cdf_alpha(exp_law, t, x)
        b = exact_cdf_beta(exp_law, t, np.nextafter(t - x, 0.0))
        assert a == pytest.approx(1 - b, abs=1e-4)


def test_series_against_simulation(exp_law):
    n = 10_000_000
    ps = simulate_alternating(exp_law, 2.0, rng=12, replications=n)
    p_beta = np.mean(ps.beta_t <= 1.0)
    p_alpha = np.mean(ps.alpha_t < 1.0)
    se_b, se_a = math.sqrt(p_beta * (1 - p_beta) / n), math.sqrt(p_alpha * (1 - p_alpha) / n)
    assert abs(exact_cdf_beta(exp_law, 2.0, 1.0) - p_beta) < 3 * se_b + 1e-4
    assert abs(exact_cdf_alpha(exp_law, 2.0, 1.0) - p_alpha) < 3 * se_a + 1e-4


def test_independent_convolution_form_matches_bivariate(exp_law):
    xs = np.array([0.3, 1.0, 1.7])
    grid = LatticeConfig(h=0.02)
    a = exact_cdf_alpha(exp_law, 2.0, xs, grid, method="product")
    b = exact_cdf_alpha(exp_law, 2.0, xs, grid, method="bivariate")
    assert np.max(np.abs(a - b)) < 1e-4


def test_start_in_b_swaps_roles():
    law = IndependentProduct(Exponential(1.0), Exponential(3.0))
    swapped = simulate_alternating(law, 4.0, rng=5, replications=200_000, start="B")
    p = np.mean(swapped.alpha_t < 1.0)
    value = exact_cdf_alpha(law, 4.0, 1.0, start="B")
    assert abs(value - p) < 3 * math.sqrt(p * (1 - p) / 200_000) + 1e-4


@given(st.floats(1.0, 3.0), st.floats(0.5, 2.0))
def test_beta_cdf_monotone_and_bounded(t, rate):
    law = IndependentProduct(Gamma(2.0, 2.0), Exponential(rate))
    xs = np.linspace(0.0, t * 0.99, 9)
    v = exact_cdf_beta(law, t, xs, LatticeConfig(h=0.02))
    assert np.all((v >= 0) & (v <= 1))
    assert np.all(np.diff(v) >= -1e-4)


def test_cdf_range_errors(exp_law):
    with pytest.raises(InvalidRangeError):
        exact_cdf_beta(exp_law, 2.0, 2.0)
    with pytest.raises(InvalidRangeError):
        exact_cdf_beta(exp_law, 2.0, -0.1)
    with pytest.raises(InvalidRangeError):
        exact_cdf_alpha(exp_law, 0.0, 0.0)


def test_moments_exp_and_deterministic(exp_law):
    m = moments(exp_law)
    assert (m.alpha, m.beta, m.var_D, m.var_U, m.cov_DU, m.clt_scale) == pytest.approx((1, 1, 1, 1, 0, 0.25))
    d = moments(IndependentProduct(Deterministic(2.0), Deterministic(3.0)))
    assert (d.var_D, d.var_U, d.cov_DU, d.clt_scale) == (0.0, 0.0, 0.0, 0.0)


def test_storage_covariance_against_simulation(mm1):
    d, u = StorageLaw(mm1, 1.0).sample(1_000_000, np.random.default_rng(21))
    prod = (d - d.mean()) * (u - u.mean())
    se = prod.std(ddof=1) / math.sqrt(prod.size)
    assert abs(prod.mean() - moments(StorageLaw(mm1, 1.0)).cov_DU) < 3 * se
    assert moments(StorageLaw(mm1, 1.0)) == sojourn_moments(mm1, 1.0)


@given(st.floats(0.1, 5.0), st.floats(0.1, 5.0), st.floats(0.0, 5.0))
def test_clt_scale_nonnegative(ld, lu, lc):
    assert MarshallOlkin(ld, lu, lc).moments().clt_scale >= 0


def test_normal_approx_cdf(exp_law):
    m = moments(exp_law)
    assert normal_approx_cdf(m, 10.0, 5.0) == 0.5
    assert normal_approx_cdf(m, 10.0, 1e6) == 1.0
    xs = np.linspace(-50, 60, 200)
    v = normal_approx_cdf(m, 10.0, xs)
    assert np.all(np.diff(v) >= 0) and v[0] < 1e-12
    with pytest.raises(DegenerateVarianceError):
        normal_approx_cdf(moments(IndependentProduct(Deterministic(1.0), Deterministic(1.0))), 10.0, 5.0)


def test_clt_ks_exp_pair(exp_law):
    t, n = 2000.0, 10_000
    ps = simulate_alternating(exp_law, t, rng=31, replications=n)
    z = (ps.alpha_t - 0.5 * t) / math.sqrt(0.25 * t)
    assert stats.kstest(z, "norm").statistic <= 0.02


def test_replications_are_reproducible_and_uniform_law():
    law = IndependentProduct(Uniform(0.5, 1.5), Exponential(2.0))
    a = simulate_alternating(law, 7.0, rng=99, replications=70_000)
    b = simulate_alternating(law, 7.0, rng=99, replications=70_000)
    assert np.array_equal(a.alpha_t, b.alpha_t)
    assert np.array_equal(a.n_cycles, b.n_cycles)
