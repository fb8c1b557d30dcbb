"""Occupation times of [0, tau] for reflected spectrally positive processes.

The reflected process Q starts at level tau. The cycle pair is D, the time
until Q first exceeds tau, and U, the time until Q comes back down to tau.
Upcrossings happen by a jump, so U and D are linked through the overshoot.

All closed forms are written in terms of the scale functions of
:mod:`occtime.levy_scale`; with ``W = W^(0)``:

* ``E D = W(tau) / W'(tau)`` and ``E U = (psi'(0) - W(tau)) / W'(tau)``;
* the joint transform of (D, U) uses the tilted scale functions at rate
  ``psi(theta2)`` and index ``theta1 - theta2``;
* the double transform of alpha(t) uses the tilt at rate ``psi(q)`` and index
  ``theta``.
"""
from __future__ import annotations

import logging
import math

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import norm

from . import levy_scale as ls
from .errors import DegenerateLevelError, InvalidRangeError, UnsupportedKindError
from .inversion import DEFAULT_CONFIG
from .laws import MomentSummary, SojournLaw
from .levy_scale import Brownian, CompoundPoissonExp, CompoundPoissonPhaseType, LevyModel
from .transforms import occupation_cdf_via_inversion

__all__ = [
    "Brownian", "CompoundPoissonExp", "CompoundPoissonPhaseType", "StorageLaw",
    "bm_free_occupation_density", "driftless_rbm_double_transform", "free_occupation_double_transform", "occupation_cdf",
    "occupation_double_transform", "rbm_double_transform", "sojourn_joint_transform",
    "sojourn_means", "sojourn_moments", "transform_moments",
]

log = logging.getLogger(__name__)

# relative disagreement that triggers the moment diagnostic
MOMENT_CHECK_RTOL = 1e-3


def _scalar(v):
    v = np.asarray(v)
    if np.iscomplexobj(v) and np.all(v.imag == 0):
        v = v.real
    return v[()] if v.ndim == 0 else v


def _check_cycle_model(model, tau):
    # with unbounded variation the process leaves tau immediately, so D = 0
    if not model.bounded_variation:
        raise DegenerateLevelError(f"{model.kind} paths cross every level continuously; "
                                   "the (D, U) cycle decomposition needs a bounded-variation model")
    if tau < 0:
        raise InvalidRangeError("tau must be nonnegative")


def _level_quantities(model, tau):
    model.require_stable()
    ev = ls.evaluator(model)
    w = float(ev.W(0.0, tau))
    dw = float(ev.W_deriv(0.0, tau))
    if not (dw > 0 and w > 0):
        raise DegenerateLevelError(f"W(tau) = {w:g}, W'(tau) = {dw:g}: no proper cycle at tau = {tau:g}")
    return ev, w, dw


def sojourn_means(model, tau):
    """(E D, E U) for the cycle at level ``tau``."""
    _check_cycle_model(model, tau)
    _, w, dw = _level_quantities(model, tau)
    p1, _ = model.psi_derivs()
    ed = w / dw
    eu = (p1 - w) / dw
    if not (ed > 0 and eu > 0):
        raise DegenerateLevelError(f"non-positive sojourn mean ({ed:g}, {eu:g})")
    return ed, eu


def sojourn_joint_transform(model, tau, theta1, theta2):
    """E exp(-theta1 D - theta2 U).

    Arguments broadcast and may be complex for closed-form models (in the
    region where the transform is analytic, which includes a disc around 0).
    """
    _check_cycle_model(model, tau)
    model.require_stable()
    th1 = np.asarray(theta1)
    th2 = np.asarray(theta2)
    psi = ls.inverse_exponent(model, th2)
    ev = ls.evaluator(model)
    if not ev.closed_form:
        return _scalar(np.vectorize(lambda a, b, c: _joint_numeric(ev, tau, a, b, c))(th1, th2, psi))
    w, dw, z, _ = ev.tilted_parts(th1, psi, th1 - th2, tau)
    num = dw + (psi - (th1 - th2)) * w - psi * z
    den = dw + psi * w
    return _scalar(ls._realify(num / den, th1, th2))


def _joint_numeric(ev, tau, th1, th2, psi):
    w, dw, z, _ = ev.tilted_parts(th1, psi, th1 - th2, tau)
    p = th1 - th2
    return (dw + (psi - p) * w - psi * z) / (dw + psi * w)


def _taylor(fn, radius, n):
    """Taylor coefficients a_0..a_2 of fn at 0 from values on a circle."""
    z = radius * np.exp(2j * np.pi * np.arange(n) / n)
    vals = fn(z)
    coef = np.fft.fft(vals) / n
    return np.real(coef[:3]) / radius ** np.arange(3)


def transform_moments(model, tau, radius=None, n=64):
    """(E D, E U, Var D, Var U, Cov) from derivatives of the joint transform.

    The derivatives are Cauchy integrals on a circle of ``radius`` around the
    origin, which must stay inside the analyticity region of ``psi``; the
    default is a quarter of the distance to its branch point.
    """
    _check_cycle_model(model, tau)
    model.require_stable()
    if not ls.evaluator(model).closed_form:
        raise UnsupportedKindError("complex transform moments need a closed-form scale function")
    if radius is None:
        radius = 0.25 * abs(_phi_min(model))
    fd = _taylor(lambda z: sojourn_joint_transform(model, tau, z, 0 * z), radius, n)
    fu = _taylor(lambda z: sojourn_joint_transform(model, tau, 0 * z, z), radius, n)
    fs = _taylor(lambda z: sojourn_joint_transform(model, tau, z, z), radius, n)
    ed, eu = -fd[1], -fu[1]
    var_d = 2 * fd[2] - ed**2
    var_u = 2 * fu[2] - eu**2
    var_s = 2 * fs[2] - (ed + eu) ** 2
    return ed, eu, var_d, var_u, 0.5 * (var_s - var_d - var_u)


def _phi_min(model):
    """Minimum of phi on the negative axis (the branch point of psi)."""
    if isinstance(model, Brownian):
        return -model.mu**2 / (2 * model.sigma2)
    lo = model.phi_abscissa
    if not np.isfinite(lo):
        lo = -1.0
        while float(model.dphi(lo)) > 0 and lo > -1e6:
            lo *= 2
    else:
        lo *= 1 - 1e-9
    res = minimize_scalar(lambda a: float(np.real(model.phi(a))), bounds=(lo, 0.0), method="bounded",
                          options={"xatol": 1e-12})
    return float(res.fun)


def sojourn_moments(model, tau, check=True):
    """MomentSummary of (D, U) from the scale-function closed forms.

    With ``check=True`` (closed-form models) the values are compared with
    derivatives of the joint transform; on a relative disagreement above
    ``MOMENT_CHECK_RTOL`` the transform values are used and a warning is
    logged.
    """
    ed, eu = sojourn_means(model, tau)
    ev, w, dw = _level_quantities(model, tau)
    p1, p2 = model.psi_derivs()
    i0 = float(ev.W_integral(0.0, tau))
    ww = float(ev.selfconv(0.0, tau))
    dww = float(ev.selfconv_deriv(0.0, tau))
    var_d = -2 * ww / dw + w * (2 * dww - w) / dw**2
    var_u = (2 * p1 / dw) * (i0 + w / dw) - (p2 + 2 * p1**2 * tau + p1**2 / dw + w**2 / dw) / dw
    cov = (p1 - w) * (dww - w) / dw**2 + ww / dw - p1 * i0 / dw
    vals = [ed, eu, var_d, var_u, cov]
    if check and ev.closed_form:
        ref = transform_moments(model, tau)
        names = ("E D", "E U", "Var D", "Var U", "Cov")
        scale = [abs(ref[0]), abs(ref[1]), abs(ref[2]), abs(ref[3]), math.sqrt(abs(ref[2] * ref[3]))]
        for i, name in enumerate(names):
            if abs(vals[i] - ref[i]) > MOMENT_CHECK_RTOL * max(scale[i], 1e-300):
                log.warning("%s: closed form %.10g disagrees with transform derivative %.10g; "
                            "using the latter", name, vals[i], ref[i])
                vals[i] = ref[i]
    var_d, var_u = max(vals[2], 0.0), max(vals[3], 0.0)
    bound = math.sqrt(var_d * var_u)
    cov = min(max(vals[4], -bound), bound)
    return MomentSummary(vals[0], vals[1], var_d, var_u, cov)


def _expsum_ratio(model, tau, theta, q, psi):
    """Cancellation-free form of the double transform for W = sum c exp(r x).

    The partial fractions of W^(q+theta) give sum c / (psi(q) - r) = -1/theta,
    which removes the leading 1 from Z exactly; what remains is
    ``psi S_0 / (q S_1)`` with ``S_j = sum c r^j e^{r tau} / (r - psi)``.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        r, c = model.scale_expansion(np.asarray(q + theta))
        e = r * tau
        ex = np.exp(e - np.max(np.real(e), axis=-1, keepdims=True))
        k = c * ex / (r - np.asarray(psi)[..., None])
        return psi * np.sum(k, -1) / (q * np.sum(k * r, -1))


def occupation_double_transform(model, tau, theta, q):
    """int_0^inf e^{-qt} E e^{-theta alpha(t)} dt, alpha the time in [0, tau].

    Broadcasts over ``theta`` and ``q``; complex arguments are accepted for
    closed-form models.
    """
    if tau < 0:
        raise InvalidRangeError("tau must be nonnegative")
    model.require_stable()
    theta = np.asarray(theta)
    q = np.asarray(q)
    if np.isrealobj(q) and np.any(q <= 0):
        raise InvalidRangeError("q must be positive")
    ev = ls.evaluator(model)
    psi = ls.inverse_exponent(model, q)
    if ev.closed_form:
        # values at |theta| >= 1 are replaced below, overflow there is harmless
        with np.errstate(over="ignore", invalid="ignore"):
            w, _, z, _ = ev.tilted_parts(q + theta, psi, theta, tau)
            out = psi * z / (q * (theta * w + psi * z))
        far = np.abs(theta) >= 1.0
        if np.any(far):
            out = np.where(far, _expsum_ratio(model, tau, theta, q, psi), out)
        return _scalar(ls._realify(out, theta, q))
    else:
        def one(th, qq, ps):
            w1, _, z1, _ = ev.tilted_parts(qq + th, ps, th, tau)
            return w1, z1
        w, z = np.vectorize(one)(theta, q, psi)
    out = psi * z / (q * (theta * w + psi * z))
    return _scalar(ls._realify(out, theta, q))


def free_occupation_double_transform(model, theta, q):
    """Double transform of the time the free process spends in (-inf, 0]."""
    q = np.asarray(q)
    if np.isrealobj(q) and np.any(q <= 0):
        raise InvalidRangeError("q must be positive")
    return _scalar(ls.inverse_exponent(model, q) / (q * ls.inverse_exponent(model, q + np.asarray(theta))))


def _tanh(a):
    # stable for large Re a and complex a with Re a >= 0
    e = np.exp(-2 * a)
    return (1 - e) / (1 + e)


def rbm_double_transform(mu, sigma2, tau, theta, q):
    """Double transform of the time reflected Brownian motion spends in [0, tau].

    ``mu`` is the drift of the free process (``mu < 0`` for stability; ``mu = 0``
    is accepted). Arguments broadcast and may be complex.
    """
    if not sigma2 > 0:
        raise InvalidRangeError("sigma2 must be positive")
    theta = np.asarray(theta)
    q = np.asarray(q)
    big_d = lambda z: 2 * sigma2 * z + mu * mu
    root_dq = np.sqrt(big_d(q) + 0j)
    root_delta = np.sqrt(big_d(q + theta) + 0j)
    psi = (mu + root_dq) / sigma2
    th = _tanh(root_delta * tau / sigma2)
    frac = 2 * theta * sigma2 * th / ((root_delta**2 + mu * root_dq) * th + sigma2 * psi * root_delta)
    out = (1 - frac) / q
    return _scalar(ls._realify(out, theta, q, mu, sigma2, tau))


def driftless_rbm_double_transform(tau, theta, q):
    """Double transform of the time driftless unit-variance reflected BM spends in [0, tau].

    Solves the Feynman-Kac equation ``u''/2 - (q + theta 1[0,tau]) u = -1``
    with ``u'(0) = 0`` piecewise in closed form; independent of the scale
    function route and used as its reference when ``mu = 0``.
    """
    a, b = np.sqrt(2 * (np.asarray(q) + theta)), np.sqrt(2 * np.asarray(q))
    amp = theta / (q * (q + theta)) / (np.cosh(a * tau) + a * np.sinh(a * tau) / b)
    return _scalar(1 / q - a * np.sinh(a * tau) / b * amp)


def bm_free_occupation_density(mu, t, u, sigma2=1.0):
    """Density at ``u`` of the time Brownian motion with drift ``mu`` spends below 0 up to ``t``.

    For ``sigma2 != 1`` the drift is rescaled to ``mu / sqrt(sigma2)``; the law
    of the occupation time has no atoms.
    """
    u = np.asarray(u, dtype=float)
    if not t > 0 or np.any(u <= 0) or np.any(u >= t):
        raise InvalidRangeError("u must lie in (0, t)")
    m = mu / math.sqrt(sigma2)
    a = np.sqrt(t - u)
    b = np.sqrt(u)
    left = norm.pdf(m * a) / a + m * norm.cdf(m * a)
    right = norm.pdf(m * b) / b - m * norm.cdf(-m * b)
    return _scalar(2 * left * right)


def occupation_cdf(model, tau, t, x, inv_cfg=None, *, full_output=False):
    """P(alpha(t) <= x) for the time in [0, tau] of the process started at tau."""
    if tau < 0:
        raise InvalidRangeError("tau must be nonnegative")
    return occupation_cdf_via_inversion(lambda th, q: occupation_double_transform(model, tau, th, q),
                                        t, x, inv_cfg or DEFAULT_CONFIG, full_output=full_output)


class StorageLaw(SojournLaw):
    """The cycle pair (D, U) of a reflected process at level ``tau``.

    Transforms and moments are closed forms; samples come from the exact
    event-driven simulator (compound Poisson kinds only).
    """

    kind = "storage"

    def __init__(self, model, tau):
        if not isinstance(model, LevyModel):
            raise TypeError("model must be a LevyModel")
        _check_cycle_model(model, tau)
        model.require_stable()
        self.model = model
        self.tau = float(tau)
        self._moments = None

    def __repr__(self):
        return f"StorageLaw({self.model!r}, tau={self.tau!r})"

    def __eq__(self, other):
        return isinstance(other, StorageLaw) and (self.model, self.tau) == (other.model, other.tau)

    def __hash__(self):
        return hash((self.kind, self.model, self.tau))

    def sample(self, n, rng):
        from .simulate import sample_storage_cycles

        if not self.model.bounded_variation:
            raise UnsupportedKindError("exact cycle sampling needs a compound Poisson model")
        if isinstance(rng, (int, np.integer)):
            seed = int(rng)
        else:
            seed = int(np.random.default_rng(rng).integers(0, 2**63 - 1))
        cyc = sample_storage_cycles(self.model, self.tau, int(n), seed)
        return cyc.d, cyc.u

    def joint_laplace(self, s1, s2):
        return sojourn_joint_transform(self.model, self.tau, s1, s2)

    def mgf(self, a, b):
        raise UnsupportedKindError("the moment generating function of storage cycles is not implemented")

    def mgf_domain(self):
        raise UnsupportedKindError("the moment generating function of storage cycles is not implemented")

    def moments(self):
        if self._moments is None:
            self._moments = sojourn_moments(self.model, self.tau)
        return self._moments

    def describe(self):
        return {"kind": self.kind, "model": self.model.kind, "tau": self.tau}

