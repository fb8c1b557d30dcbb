import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from occtime.errors import DegenerateLevelError, InvalidRangeError
from occtime.inversion import invert
from occtime.levy_scale import Brownian, CompoundPoissonExp, CompoundPoissonPhaseType
from occtime.simulate import SimConfig, free_bm_boundary_atoms, sample_storage_cycles, simulate_rbm, simulate_storage
from occtime.storage_stats import (
    StorageLaw,
    bm_free_occupation_density,
    driftless_rbm_double_transform,
    free_occupation_double_transform,
    occupation_cdf,
    occupation_double_transform,
    rbm_double_transform,
    sojourn_joint_transform,
    sojourn_means,
    sojourn_moments,
)

from .conftest import mc_se

MM1_ED = (2 - math.exp(-0.5)) / (0.5 * math.exp(-0.5))
# order of the Euler bias in dt is taken to be at least 1/4
BIAS_FACTOR = 1 / (2**0.25 - 1)


def euler_allowance(paths, fn):
    """3 s.e. plus a bias bound from the coupled run on the doubled step."""
    fine, coarse = fn(paths.alpha_t), fn(paths.alpha_coarse)
    return 3 * mc_se(fine) + BIAS_FACTOR * abs(coarse.mean() - fine.mean()), fine.mean()


def test_mm1_means(mm1):
    ed, eu = sojourn_means(mm1, 1.0)
    assert ed == pytest.approx(MM1_ED, abs=1e-12) and ed == pytest.approx(4.59489, abs=5e-6)
    assert eu == pytest.approx(2.0, abs=1e-12)
    assert ed / (ed + eu) == pytest.approx(1 - 0.5 * math.exp(-0.5), abs=1e-12)


@pytest.mark.parametrize("model", [CompoundPoissonExp(0.5, 1.0), CompoundPoissonExp(0.8, 0.5), CompoundPoissonExp(0.3, 2.0)])
@pytest.mark.parametrize("tau", [0.2, 1.0, 4.0])
def test_renewal_reward_equals_stationary_probability(model, tau):
    ed, eu = sojourn_means(model, tau)
    assert ed / (ed + eu) == pytest.approx(model.stationary_cdf(tau), abs=1e-10)


def test_small_level_limit(mm1):
    ed, _ = sojourn_means(mm1, 1e-9)
    assert ed == pytest.approx(2.0, abs=1e-6)  # time to the first jump


def test_cycle_needs_bounded_variation(bm, mm1):
    with pytest.raises(DegenerateLevelError):
        sojourn_means(bm, 1.0)
    with pytest.raises(InvalidRangeError):
        sojourn_means(mm1, -1.0)
    with pytest.raises(InvalidRangeError):
        occupation_double_transform(mm1, -1.0, 1.0, 1.0)


def test_joint_transform_at_origin(mm1):
    assert sojourn_joint_transform(mm1, 1.0, 0.0, 0.0) == pytest.approx(1.0, abs=1e-14)
    h = 1e-6
    slope = (sojourn_joint_transform(mm1, 1.0, h, 0.0) - sojourn_joint_transform(mm1, 1.0, -h, 0.0)) / (2 * h)
    assert slope == pytest.approx(-MM1_ED, abs=1e-5)


def test_variance_from_transform_curvature(mm1):
    h = 1e-3
    f = lambda a: sojourn_joint_transform(mm1, 1.0, a, 0.0)
    second = (f(h) - 2 * f(0.0) + f(-h)) / h**2
    assert sojourn_moments(mm1, 1.0).var_D == pytest.approx(second - MM1_ED**2, rel=1e-4)


def test_cycles_against_simulation(mm1):
    cyc = sample_storage_cycles(mm1, 1.0, 10_000_000, seed=41)
    m = sojourn_moments(mm1, 1.0)
    d, u = cyc.d, cyc.u
    assert abs(d.mean() - m.alpha) < 3 * mc_se(d)
    assert abs(u.mean() - m.beta) < 3 * mc_se(u)
    cross = (d - d.mean()) * (u - u.mean())
    assert abs(cross.mean() - m.cov_DU) < 3 * mc_se(cross)
    val = np.exp(-0.3 * d - 0.2 * u)
    assert abs(val.mean() - sojourn_joint_transform(mm1, 1.0, 0.3, 0.2)) < 3 * mc_se(val)


def test_phase_type_cycles_against_simulation():
    model = CompoundPoissonPhaseType.erlang(0.6, 2, 1.0)
    cyc = sample_storage_cycles(model, 1.5, 2_000_000, seed=42)
    m = sojourn_moments(model, 1.5)
    for sample, mean in ((cyc.d, m.alpha), (cyc.u, m.beta)):
        assert abs(sample.mean() - mean) < 3 * mc_se(sample)
    cross = (cyc.d - cyc.d.mean()) * (cyc.u - cyc.u.mean())
    assert abs(cross.mean() - m.cov_DU) < 3 * mc_se(cross)


@given(st.floats(0.0, 5.0), st.floats(0.05, 5.0), st.floats(0.0, 5.0))
def test_double_transform_range(theta, q, tau):
    v = occupation_double_transform(CompoundPoissonExp(0.5, 1.0), tau, theta, q)
    assert 0 < v <= 1 / q * (1 + 1e-12)


def test_double_transform_trivial_cases(mm1, bm):
    for q in (0.3, 1.0, 4.0):
        assert occupation_double_transform(mm1, 1.0, 0.0, q) == pytest.approx(1 / q, rel=1e-14)
        assert occupation_double_transform(bm, 0.0, 2.0, q) == pytest.approx(1 / q, rel=1e-14)
        assert free_occupation_double_transform(mm1, 0.0, q) == pytest.approx(1 / q, rel=1e-14)
        assert rbm_double_transform(-1.0, 1.0, 1.0, 0.0, q) == pytest.approx(1 / q, rel=1e-14)


def test_brownian_scale_route_matches_rbm_formula(bm):
    assert occupation_double_transform(bm, 1.0, 1.0, 1.0) == pytest.approx(rbm_double_transform(-1, 1, 1, 1, 1), abs=1e-10)


def test_large_theta_is_stable(mm1):
    # both routes of the storage formula agree where neither cancels badly
    th, q = 1.5 + 2.0j, 0.7 - 0.3j
    a = occupation_double_transform(mm1, 1.0, th, q)
    r = occupation_double_transform(mm1, 1.0, np.array([th, 0.9]), np.array([q, q]))
    assert a == pytest.approx(r[0], rel=1e-12)
    big = occupation_double_transform(mm1, 1.0, -12.5 - 100j, 13 + 100j)
    assert np.isfinite(big)


def test_sparre_andersen_limit(mm1):
    assert occupation_double_transform(mm1, 200.0, 1.0, 1.0) == pytest.approx(
        free_occupation_double_transform(mm1, 1.0, 1.0), abs=1e-6)
    assert rbm_double_transform(-1.0, 1.0, 50.0, 1.0, 1.0) == pytest.approx(
        free_occupation_double_transform(Brownian(-1.0, 1.0), 1.0, 1.0), abs=1e-8)


def test_near_driftless_free_transform():
    assert free_occupation_double_transform(Brownian(-1e-8, 1.0), 3.0, 1.0) == pytest.approx(0.5, abs=1e-4)


@pytest.mark.parametrize("tau", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("q", [0.5, 1.0, 3.0])
def test_driftless_reflected_bm_closed_form(tau, q):
    for theta in (0.5, 1.0, 4.0):
        assert rbm_double_transform(0.0, 1.0, tau, theta, q) == pytest.approx(
            driftless_rbm_double_transform(tau, theta, q), abs=1e-12)


@pytest.mark.slow
def test_driftless_reflected_bm_against_euler():
    for t in (0.5, 1.0, 2.0):
        exact = invert(lambda q: driftless_rbm_double_transform(1.0, 1.0, q), t)
        paths = simulate_rbm(0.0, 1.0, SimConfig(seed=51, replications=100_000, horizon=t, tau=1.0, dt=1e-4),
                             coupled=True)
        tol, est = euler_allowance(paths, lambda a: np.exp(-a))
        assert abs(est - exact) < tol


def test_arcsine_density():
    assert bm_free_occupation_density(0.0, 1.0, 0.5) == pytest.approx(2 / math.pi, abs=1e-15)
    for t in (0.5, 3.0):
        u = np.linspace(0.01, 0.49, 17) * t
        assert np.allclose(bm_free_occupation_density(0.0, t, u), bm_free_occupation_density(0.0, t, t - u),
                           rtol=1e-14)
        assert np.allclose(bm_free_occupation_density(0.0, t, u), 1 / (math.pi * np.sqrt(u * (t - u))), rtol=1e-14)


def test_density_total_mass_with_drift():
    mass, _ = integrate.quad(lambda u: float(bm_free_occupation_density(-1.0, 1.0, u)), 0, 1, limit=200, epsabs=1e-12)
    at_t, at_0 = free_bm_boundary_atoms(-1.0, 1.0, 1.0, n=20_000, seed=52)
    assert mass + at_t + at_0 == pytest.approx(1.0, abs=1e-5)


def test_density_range():
    with pytest.raises(InvalidRangeError):
        bm_free_occupation_density(0.0, 1.0, 1.0)


def test_occupation_cdf_endpoint(mm1):
    assert occupation_cdf(mm1, 1.0, 10.0, 10.0) == 1.0


def test_occupation_cdf_mm1_against_simulation(mm1):
    n = 1_000_000
    paths, _ = simulate_storage(mm1, SimConfig(seed=53, replications=n, horizon=10.0, tau=1.0))
    for x in (3.0, 7.0, 9.0, 9.9):
        value, info = occupation_cdf(mm1, 1.0, 10.0, x, full_output=True)
        p = np.mean(paths.alpha_t <= x)
        assert info["converged"]
        assert abs(value - p) < 3 * math.sqrt(p * (1 - p) / n) + info["error"]


def test_occupation_cdf_rbm_against_euler():
    model = Brownian(-1.0, 1.0)
    value, info = occupation_cdf(model, 1.0, 5.0, 4.0, full_output=True)
    paths = simulate_rbm(-1.0, 1.0, SimConfig(seed=54, replications=100_000, horizon=5.0, tau=1.0, dt=1e-3),
                         coupled=True)
    tol, est = euler_allowance(paths, lambda a: (a <= 4.0).astype(float))
    assert abs(value - est) < tol + info["error"]


def test_storage_law_interface(mm1):
    law = StorageLaw(mm1, 1.0)
    assert law.moments() == sojourn_moments(mm1, 1.0)
    assert law.joint_laplace(0.3, 0.2) == pytest.approx(sojourn_joint_transform(mm1, 1.0, 0.3, 0.2))
    with pytest.raises(TypeError):
        StorageLaw("mm1", 1.0)
