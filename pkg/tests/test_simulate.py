import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from occtime import _accel
from occtime.errors import EmptySampleError, InvalidRangeError, UnstableModelError
from occtime.inversion import invert
from occtime.levy_scale import Brownian, CompoundPoissonExp, CompoundPoissonPhaseType, inverse_exponent
from occtime.simulate import (
    SimConfig,
    empirical_cdf,
    free_bm_boundary_atoms,
    ks_critical_value,
    ks_statistic,
    ks_two_sample,
    sample_storage_cycles,
    simulate_rbm,
    simulate_storage,
    supremum_epoch_sample,
)
from occtime.storage_stats import rbm_double_transform, sojourn_moments

from .conftest import mc_se

BIAS_FACTOR = 1 / (2**0.25 - 1)


@pytest.fixture
def numpy_backend():
    old = _accel.set_backend("numpy")
    yield
    _accel.set_backend(old)


def test_sim_config_validation():
    with pytest.raises(InvalidRangeError):
        SimConfig(replications=0)
    with pytest.raises(InvalidRangeError):
        SimConfig(horizon=0.0)
    with pytest.raises(InvalidRangeError):
        SimConfig(dt=-1.0)
    with pytest.raises(InvalidRangeError):
        SimConfig(tau=-0.5)


def test_long_run_fraction_below_level(mm1):
    paths, cycles = simulate_storage(mm1, SimConfig(seed=71, replications=1, horizon=1e6, tau=1.0))
    assert abs(paths.alpha_t / 1e6 - (1 - 0.5 * math.exp(-0.5))) < 0.002
    assert len(cycles.d) > 100_000


def test_cycle_means(mm1):
    cyc = sample_storage_cycles(mm1, 1.0, 1_000_000, seed=72)
    assert abs(cyc.d.mean() - 4.594885) < 3 * mc_se(cyc.d)
    assert abs(cyc.u.mean() - 2.0) < 3 * mc_se(cyc.u)


def test_overshoot_is_exponential(mm1):
    cyc = sample_storage_cycles(mm1, 1.0, 200_000, seed=73)
    assert stats.kstest(cyc.overshoot, "expon").pvalue > 0.01
    assert np.all(cyc.d > 0) and np.all(cyc.u > 0) and np.all(cyc.overshoot > 0)


@pytest.mark.parametrize("model", [CompoundPoissonExp(0.5, 1.0), CompoundPoissonPhaseType.erlang(0.6, 2, 1.0)])
def test_cycle_dependence_structure(model):
    _, cyc = simulate_storage(model, SimConfig(seed=74, replications=1, horizon=2e6, tau=1.0))
    d, u = cyc.d, cyc.u
    # within a cycle: covariance matches the closed form
    cross = (d - d.mean()) * (u - u.mean())
    assert abs(cross.mean() - sojourn_moments(model, 1.0).cov_DU) < 3 * mc_se(cross)
    # across cycles: U_i and D_{i+1} are uncorrelated
    nxt = (u[:-1] - u[:-1].mean()) * (d[1:] - d[1:].mean())
    assert abs(nxt.mean()) < 3 * mc_se(nxt)


@given(st.floats(0.5, 200.0), st.integers(0, 2**40))
def test_storage_paths_partition_time(t, seed):
    paths, _ = simulate_storage(CompoundPoissonExp(0.5, 1.0), SimConfig(seed=seed, replications=20, horizon=t, tau=1.0))
    assert np.all(np.abs(paths.alpha_t + paths.beta_t - t) <= 1e-12 * t)
    assert np.all(paths.alpha_t > 0)


def test_storage_reproducible_and_chunk_independent(mm1):
    cfg = SimConfig(seed=75, replications=150_000, horizon=20.0, tau=1.0)
    a, _ = simulate_storage(mm1, cfg)
    b, _ = simulate_storage(mm1, cfg)
    assert np.array_equal(a.alpha_t, b.alpha_t)
    # replication i does not depend on how many others are run
    small, _ = simulate_storage(mm1, SimConfig(seed=75, replications=10, horizon=20.0, tau=1.0))
    assert np.array_equal(small.alpha_t, a.alpha_t[:10])
    tail = sample_storage_cycles(mm1, 1.0, 5, seed=3, first=100)
    full = sample_storage_cycles(mm1, 1.0, 105, seed=3)
    assert np.array_equal(tail.d, full.d[100:])


def test_unstable_storage_rejected():
    with pytest.raises(UnstableModelError):
        simulate_storage(CompoundPoissonExp(1.5, 1.0), SimConfig(horizon=5.0, tau=1.0))


def test_driftless_rbm_at_zero_level_has_no_occupation():
    fractions = []
    for dt in (1e-2, 1e-3, 1e-4):
        paths = simulate_rbm(0.0, 1.0, SimConfig(seed=76, replications=2_000, horizon=2.0, tau=0.0, dt=dt))
        fractions.append(paths.alpha_t.mean() / 2.0)
    assert fractions[-1] < 0.02
    assert fractions[0] > fractions[1] > fractions[2]


def test_rbm_transform_against_inversion():
    exact = invert(lambda q: rbm_double_transform(-1.0, 1.0, 1.0, 1.0, q), 5.0)
    paths = simulate_rbm(-1.0, 1.0, SimConfig(seed=77, replications=100_000, horizon=5.0, tau=1.0, dt=1e-3),
                         coupled=True)
    fine, coarse = np.exp(-paths.alpha_t), np.exp(-paths.alpha_coarse)
    tol = 3 * mc_se(fine) + BIAS_FACTOR * abs(coarse.mean() - fine.mean())
    assert abs(fine.mean() - exact) < tol


def test_rbm_bias_ratio_when_doubling_step():
    exact = invert(lambda q: rbm_double_transform(-1.0, 1.0, 1.0, 1.0, q), 5.0)
    paths = simulate_rbm(-1.0, 1.0, SimConfig(seed=78, replications=1_000_000, horizon=5.0, tau=1.0, dt=0.05),
                         coupled=True)
    bias_fine = np.exp(-paths.alpha_t).mean() - exact
    bias_coarse = np.exp(-paths.alpha_coarse).mean() - exact
    assert 1.2 <= bias_coarse / bias_fine <= 2.8


def test_rbm_step_validation():
    with pytest.raises(InvalidRangeError):
        simulate_rbm(-1.0, 1.0, SimConfig(horizon=1.0, dt=0.3))
    with pytest.raises(InvalidRangeError):
        simulate_rbm(-1.0, 1.0, SimConfig(horizon=0.3, dt=0.1), coupled=True)
    with pytest.raises(InvalidRangeError):
        simulate_rbm(-1.0, 0.0, SimConfig(horizon=1.0, dt=0.1))


def test_supremum_identity_in_distribution():
    # the grid identity is exact, so two-sample p-values over independent pairs are uniform
    pvals = []
    for k in range(40):
        res, _ = supremum_epoch_sample(0.0, 1.0, 1.0, rng=1000 + 2 * k, n=20_000, dt=1e-2)
        _, alpha = supremum_epoch_sample(0.0, 1.0, 1.0, rng=1001 + 2 * k, n=20_000, dt=1e-2)
        pvals.append(stats.ks_2samp(res, alpha).pvalue)
    assert stats.kstest(pvals, "uniform").pvalue > 0.01


def test_supremum_identity_ks_at_full_size():
    res, _ = supremum_epoch_sample(0.0, 1.0, 1.0, rng=1100, n=100_000, dt=1e-2)
    _, alpha = supremum_epoch_sample(0.0, 1.0, 1.0, rng=1101, n=100_000, dt=1e-2)
    assert ks_two_sample(res, alpha) <= ks_critical_value(100_000, 100_000, 0.01)


def test_supremum_transform():
    _, alpha = supremum_epoch_sample(-1.0, 1.0, 1.0, rng=81, n=100_000, dt=1e-3)
    v = np.exp(-3.0 * alpha)
    model = Brownian(-1.0, 1.0)
    target = inverse_exponent(model, 1.0) / inverse_exponent(model, 4.0)
    assert abs(v.mean() - target) < 3 * mc_se(v)


def test_supremum_residual_vanishes_for_large_rate():
    res, _ = supremum_epoch_sample(0.0, 1.0, 100.0, rng=82, n=10_000)
    assert np.quantile(res, 0.99) < 0.1


def test_free_bm_atoms_from_zero_are_null():
    assert free_bm_boundary_atoms(-1.0, 1.0, 1.0, n=2_000, seed=83) == (0.0, 0.0)
    below, above = free_bm_boundary_atoms(-1.0, 1.0, 1.0, n=20_000, seed=84, x0=-0.5)
    assert below > 0.3 and above == 0.0


def test_empirical_tools():
    assert empirical_cdf([1, 2, 3], 2) == pytest.approx(2 / 3)
    rng = np.random.default_rng(85)
    z = rng.standard_normal(100_000)
    assert ks_statistic(z, stats.norm.cdf) <= 0.006
    assert ks_statistic(z, lambda x: stats.norm.cdf(x - 1)) >= 0.3
    assert ks_critical_value(100_000, level=0.01) == pytest.approx(1.6276 / math.sqrt(100_000), rel=1e-3)
    with pytest.raises(EmptySampleError):
        empirical_cdf([], 0.0)
    with pytest.raises(EmptySampleError):
        ks_statistic([], stats.norm.cdf)


def test_storage_clt_exp_scale(mm1):
    m = sojourn_moments(mm1, 1.0)
    t = 2000.0
    paths, _ = simulate_storage(mm1, SimConfig(seed=86, replications=10_000, horizon=t, tau=1.0))
    z = (paths.alpha_t - m.mean_fraction * t) / math.sqrt(m.clt_scale * t)
    assert ks_statistic(z, stats.norm.cdf) <= 0.02


def test_backends_agree(numpy_backend, mm1):
    cfg = SimConfig(seed=87, replications=3_000, horizon=10.0, tau=1.0)
    np_paths, _ = simulate_storage(mm1, cfg)
    np_rbm = simulate_rbm(-0.5, 1.0, SimConfig(seed=88, replications=300, horizon=1.0, tau=0.5, dt=1e-3), coupled=True)
    np_cyc = sample_storage_cycles(mm1, 1.0, 5_000, seed=89)
    np_sup = supremum_epoch_sample(0.0, 1.0, 1.0, rng=90, n=2_000, dt=1e-2)
    _accel.set_backend("numba")
    nb_paths, _ = simulate_storage(mm1, cfg)
    nb_rbm = simulate_rbm(-0.5, 1.0, SimConfig(seed=88, replications=300, horizon=1.0, tau=0.5, dt=1e-3), coupled=True)
    nb_cyc = sample_storage_cycles(mm1, 1.0, 5_000, seed=89)
    nb_sup = supremum_epoch_sample(0.0, 1.0, 1.0, rng=90, n=2_000, dt=1e-2)
    np.testing.assert_allclose(np_paths.alpha_t, nb_paths.alpha_t, rtol=1e-12, atol=1e-12)
    np.testing.assert_array_equal(np_paths.n_cycles, nb_paths.n_cycles)
    np.testing.assert_allclose(np_rbm.alpha_t, nb_rbm.alpha_t, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(np_rbm.alpha_coarse, nb_rbm.alpha_coarse, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(np_cyc.d, nb_cyc.d, rtol=1e-12)
    np.testing.assert_allclose(np_sup[0], nb_sup[0], rtol=1e-12, atol=1e-12)


def test_backend_selected_by_environment():
    code = "from occtime._accel import get_backend; print(get_backend())"
    for name in ("numpy", "numba"):
        out = subprocess.run([sys.executable, "-c", code], env={**os.environ, "OCCTIME_BACKEND": name},
                             capture_output=True, text=True, check=True)
        assert out.stdout.strip() == name
    bad = subprocess.run([sys.executable, "-c", code], env={**os.environ, "OCCTIME_BACKEND": "cuda"},
                         capture_output=True, text=True)
    assert bad.returncode != 0
    with pytest.raises(ValueError):
        _accel.set_backend("cuda")
