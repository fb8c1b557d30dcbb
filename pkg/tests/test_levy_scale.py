import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from occtime.errors import UnstableModelError
from occtime.levy_scale import (
    Brownian,
    CompoundPoissonExp,
    CompoundPoissonPhaseType,
    inverse_exponent,
    laplace_exponent,
    model_from_dict,
    scale_W,
    scale_W_deriv,
    scale_W_qderiv,
    scale_W_selfconv,
    scale_Z,
    tilted_scale,
)

MODELS = {
    "mm1": CompoundPoissonExp(0.5, 1.0),
    "bm": Brownian(-1.0, 1.0),
    "bm_wide": Brownian(-0.4, 2.0),
    "erlang2": CompoundPoissonPhaseType.erlang(0.6, 2, 1.0),
    "hyperexp": CompoundPoissonPhaseType.hyperexponential(0.4, (0.3, 0.7), (0.5, 3.0)),
}


def mm1_W0(x):
    # partial fractions of 1/(phi(a)) with phi(a) = a - 0.5 a/(1+a)
    return 2 - math.exp(-x / 2)


def laplace_of_W_by_quadrature(model, q, theta, upper=60.0):
    val, _ = integrate.quad(lambda x: math.exp(-theta * x) * float(scale_W(model, q, x)), 0, upper,
                            limit=400, epsabs=1e-12, epsrel=1e-12)
    return val


def test_laplace_exponent_values(mm1, bm):
    assert laplace_exponent(bm, 2.0) == pytest.approx(4.0, abs=1e-15)
    assert laplace_exponent(mm1, 1.0) == pytest.approx(0.75, abs=1e-15)
    for m in MODELS.values():
        assert laplace_exponent(m, 0.0) == 0.0


def test_inverse_exponent_values(bm):
    assert inverse_exponent(bm, 4.0) == pytest.approx(2.0, abs=1e-14)
    assert inverse_exponent(Brownian(-1e-6, 1.0), 1.0) == pytest.approx(math.sqrt(2), abs=1e-4)
    for m in MODELS.values():
        assert inverse_exponent(m, 0.0) == 0.0


def test_unstable_model_rejected():
    with pytest.raises(UnstableModelError):
        inverse_exponent(Brownian(0.5, 1.0), 1.0)
    with pytest.raises(UnstableModelError):
        inverse_exponent(CompoundPoissonExp(2.0, 1.0), 1.0)


@pytest.mark.parametrize("name", list(MODELS))
@given(q=st.floats(0.0, 100.0))
def test_phi_of_psi(name, q):
    m = MODELS[name]
    assert laplace_exponent(m, inverse_exponent(m, q)) == pytest.approx(q, rel=1e-12, abs=1e-13)


def test_mm1_scale_function(mm1):
    assert scale_W(mm1, 0.0, 1.0) == pytest.approx(mm1_W0(1.0), abs=1e-14)
    assert scale_W(mm1, 0.0, 1.0) == pytest.approx(1.39347, abs=1e-5)
    assert scale_W_deriv(mm1, 0.0, 1.0) == pytest.approx(0.5 * math.exp(-0.5), abs=1e-14)


def test_boundary_values(mm1, bm):
    for q in (0.0, 1.0, 5.0):
        assert scale_W(mm1, q, 0.0) == pytest.approx(1.0)   # unit drift
        assert scale_W(bm, q, 0.0) == 0.0                   # unbounded variation
        assert scale_W(bm, q, -1.0) == 0.0 and scale_W(mm1, q, -0.5) == 0.0
    assert scale_W_deriv(bm, 1.0, 1e-10) == pytest.approx(2.0, rel=1e-6)
    assert scale_W_deriv(Brownian(-1.0, 0.5), 1.0, 1e-10) == pytest.approx(4.0, rel=1e-6)


@pytest.mark.parametrize("name", ["bm", "mm1", "erlang2", "hyperexp"])
def test_defining_identity(name):
    m = MODELS[name]
    q = 1.0
    theta = inverse_exponent(m, q) + 1.0
    assert laplace_of_W_by_quadrature(m, q, theta) == pytest.approx(1 / (laplace_exponent(m, theta) - q), abs=1e-6)


def test_numeric_kind_matches_closed_form():
    closed = CompoundPoissonPhaseType.erlang(0.6, 2, 1.0)
    numeric = CompoundPoissonPhaseType.erlang(0.6, 2, 1.0, method="inversion")
    xs = np.array([0.1, 0.7, 2.0, 5.0])
    for q in (0.0, 0.5, 2.0):
        assert np.max(np.abs(scale_W(numeric, q, xs) - scale_W(closed, q, xs))) < 1e-6 * np.max(scale_W(closed, q, xs))


@pytest.mark.parametrize("name", list(MODELS))
@given(q=st.floats(0.0, 5.0))
def test_W_and_Z_shape(name, q):
    m = MODELS[name]
    xs = np.linspace(0.0, 6.0, 61)
    w, z = scale_W(m, q, xs), scale_Z(m, q, xs)
    assert np.all(w >= 0) and np.all(np.diff(w) >= -1e-12 * np.max(w))
    assert np.all(z >= 1 - 1e-12) and np.all(np.diff(z) >= -1e-12 * np.max(z))


def test_Z_trivial_cases(mm1):
    assert scale_Z(mm1, 0.0, 3.7) == 1.0
    assert scale_Z(mm1, 2.0, 0.0) == 1.0


def test_Z_against_antiderivative(mm1):
    # W^(1) is a two-term exponential sum; integrate it symbolically term by term
    r, c = mm1.scale_expansion(1.0)
    exact = 1 + 1.0 * np.sum(c * np.expm1(r * 1.0) / r).real
    assert scale_Z(mm1, 1.0, 1.0) == pytest.approx(exact, abs=1e-10)
    quad = 1 + integrate.quad(lambda y: float(scale_W(mm1, 1.0, y)), 0, 1, epsabs=1e-13)[0]
    assert scale_Z(mm1, 1.0, 1.0) == pytest.approx(quad, abs=1e-10)


def test_tilted_scale_trivial_cases(mm1):
    _, z = tilted_scale(mm1, 1.0, 0.0, 1.0)
    assert z == 1.0
    w, _ = tilted_scale(mm1, 0.0, 1.0, 1.0)
    assert w == pytest.approx(scale_W(mm1, 1.0, 1.0), rel=1e-14)


@pytest.mark.parametrize("name", list(MODELS))
@given(q=st.floats(0.0, 3.0), theta=st.floats(0.0, 3.0), x=st.floats(0.0, 4.0))
def test_tilt_consistency(name, q, theta, x):
    m = MODELS[name]
    w, _ = tilted_scale(m, q, theta, x)
    assert math.exp(inverse_exponent(m, q) * x) * w == pytest.approx(scale_W(m, q + theta, x), rel=1e-12, abs=1e-300)


def test_tilted_scale_by_quadrature(mm1):
    q, theta, x = 1.0, 1.0, 1.0
    psi = inverse_exponent(mm1, q)
    w, z = tilted_scale(mm1, q, theta, x)
    w_direct = math.exp(-psi * x) * scale_W(mm1, q + theta, x)
    z_direct = 1 + theta * integrate.quad(lambda y: math.exp(-psi * y) * float(scale_W(mm1, q + theta, y)), 0, x,
                                          epsabs=1e-13)[0]
    assert w == pytest.approx(w_direct, abs=1e-8)
    assert z == pytest.approx(z_direct, abs=1e-8)


def test_selfconv_zero_at_origin(mm1):
    assert scale_W_selfconv(mm1, 0.0, 0.0) == 0.0


@pytest.mark.parametrize("name,q,x", [("mm1", 0.0, 1.0), ("bm", 1.0, 2.0)])
def test_selfconv_equals_q_derivative(name, q, x):
    m = MODELS[name]
    assert scale_W_selfconv(m, q, x) == pytest.approx(scale_W_qderiv(m, q, x), abs=1e-5)


@pytest.mark.parametrize("name", ["mm1", "bm", "erlang2"])
def test_selfconv_grid(name):
    m = MODELS[name]
    worst = max(abs(scale_W_selfconv(m, q, x) - scale_W_qderiv(m, q, x))
                for q in np.linspace(0.0, 2.0, 5) for x in np.linspace(0.2, 3.0, 5))
    assert worst <= 1e-5


def test_derivative_finite_difference_self_check(mm1):
    worst = 0.0
    for q in (0.0, 0.5, 2.0):
        for x in (0.3, 1.0, 3.0):
            h = 1e-5 * max(1.0, x)
            fd = (scale_W(mm1, q, x + h) - scale_W(mm1, q, x - h)) / (2 * h)
            worst = max(worst, abs(fd / scale_W_deriv(mm1, q, x) - 1))
    assert worst <= 1e-6


def test_model_from_dict():
    assert model_from_dict({"kind": "brownian", "mu": -1, "sigma2": 2}) == Brownian(-1.0, 2.0)
    assert model_from_dict({"kind": "cp_exp_drift", "lam": 0.5}) == CompoundPoissonExp(0.5, 1.0)
    erl = model_from_dict({"kind": "cp_phase_type_drift", "lam": 0.6, "erlang_shape": 2})
    assert erl == MODELS["erlang2"]
    hyp = model_from_dict({"kind": "cp_phase_type_drift", "lam": 0.4, "probs": [0.3, 0.7], "rates": [0.5, 3.0]})
    assert scale_W(hyp, 1.0, 2.0) == pytest.approx(scale_W(MODELS["hyperexp"], 1.0, 2.0))
    with pytest.raises(ValueError):
        model_from_dict({"kind": "alpha_stable"})
