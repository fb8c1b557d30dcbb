"""Spectrally positive Lévy models, Laplace exponents and scale functions.

A model exposes its Laplace exponent ``phi(a) = log E exp(-a X(1))`` and
derivatives. The q-scale function ``W^(q)`` is characterised by

    integral_0^inf exp(-theta x) W^(q)(x) dx = 1 / (phi(theta) - q),

and ``Z^(q)(x) = 1 + q integral_0^x W^(q)(y) dy``.

For the shipped parametric kinds ``1/(phi - q)`` is a rational function, so
``W^(q)`` is a finite sum of exponentials ``sum_k c_k exp(r_k x)`` whose rates
are the roots of a polynomial. That representation is valid for complex
``q`` as well, which the iterated Laplace inversion relies on. Phase-type
jumps may alternatively be handled by numerical inversion of the defining
transform.
"""
from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from . import inversion
from .errors import InvalidRangeError, InversionAccuracyWarning, UnstableModelError


class LevyModel:
    """Common interface of the spectrally positive models."""

    kind = "abstract"
    bounded_variation = False
    has_closed_form = True

    def phi(self, a):
        raise NotImplementedError

    def dphi(self, a):
        raise NotImplementedError

    def d2phi(self, a):
        raise NotImplementedError

    @property
    def phi_abscissa(self):
        """Infimum of the real a where phi(a) is finite."""
        return -math.inf

    @property
    def mean(self):
        """E X(1)."""
        return -float(self.dphi(0.0))

    @property
    def stable(self):
        return self.mean < 0

    def require_stable(self):
        if not self.stable:
            raise UnstableModelError(f"{self.kind} model has E X(1) = {self.mean:g} >= 0")

    def psi_derivs(self):
        """(psi'(0), psi''(0)) of a stable model."""
        self.require_stable()
        d1 = float(self.dphi(0.0))
        d2 = float(self.d2phi(0.0))
        return 1.0 / d1, -d2 / d1**3

    def scale_expansion(self, q):
        """Rates ``r`` and coefficients ``c`` with ``W^(q)(x) = sum c exp(r x)``.

        Both arrays have shape ``np.shape(q) + (K,)``.
        """
        raise NotImplementedError


def _stable_quadratic(b, c):
    """Roots of ``z**2 + b z + c`` ordered (larger real part, smaller)."""
    b = np.asarray(b)
    c = np.asarray(c)
    sq = np.sqrt(b * b - 4 * c + 0j)
    # pick the sign that avoids cancellation, recover the other from c
    big = np.where(np.real(b) >= 0, (-b - sq) / 2, (-b + sq) / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big != 0, c / big, 0.0)
    first = np.where(np.real(big) >= np.real(small), big, small)
    second = np.where(np.real(big) >= np.real(small), small, big)
    if np.any(np.abs(first - second) <= 1e-12 * np.maximum(1.0, np.abs(first))):
        raise InvalidRangeError("coincident scale-function rates (degenerate q)")
    return first, second


def _realify(z, *like):
    if all(not np.iscomplexobj(np.asarray(v)) for v in like):
        return np.real(z)
    return z


@dataclass(frozen=True)
class Brownian(LevyModel):
    """X(t) = mu t + sqrt(sigma2) B(t)."""

    mu: float
    sigma2: float = 1.0

    kind = "brownian"
    bounded_variation = False

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")

    def phi(self, a):
        a = np.asarray(a)
        return self.sigma2 * a * a / 2 - self.mu * a

    def dphi(self, a):
        return self.sigma2 * np.asarray(a) - self.mu

    def d2phi(self, a):
        return self.sigma2 + 0 * np.asarray(a)

    def scale_expansion(self, q):
        q = np.asarray(q)
        s2 = self.sigma2
        r1, r2 = _stable_quadratic(-2 * self.mu / s2 + 0 * q, -2 * q / s2)
        inv = 2 / (s2 * (r1 - r2))
        return np.stack([r1, r2], -1), np.stack([inv, -inv], -1)


@dataclass(frozen=True)
class CompoundPoissonExp(LevyModel):
    """Unit drain with compound Poisson input of exponential jumps."""

    lam: float
    jump_mean: float = 1.0

    kind = "cp_exp_drift"
    bounded_variation = True

    def __post_init__(self):
        if not (self.lam > 0 and self.jump_mean > 0):
            raise ValueError("lam and jump_mean must be positive")

    @property
    def mu_j(self):
        return 1.0 / self.jump_mean

    @property
    def phi_abscissa(self):
        return -self.mu_j

    def phi(self, a):
        a = np.asarray(a)
        return a - self.lam * a / (self.mu_j + a)

    def dphi(self, a):
        a = np.asarray(a)
        return 1 - self.lam * self.mu_j / (self.mu_j + a) ** 2

    def d2phi(self, a):
        a = np.asarray(a)
        return 2 * self.lam * self.mu_j / (self.mu_j + a) ** 3

    def scale_expansion(self, q):
        q = np.asarray(q)
        m = self.mu_j
        r1, r2 = _stable_quadratic(m - self.lam - q, -q * m)
        c1 = (r1 + m) / (r1 - r2)
        c2 = -(r2 + m) / (r1 - r2)
        return np.stack([r1, r2], -1), np.stack([c1, c2], -1)

    def stationary_cdf(self, x):
        """P(Q <= x) for the stationary reflected process (M/M/1 workload)."""
        rho = self.lam * self.jump_mean
        if rho >= 1:
            raise UnstableModelError("no stationary law for rho >= 1")
        return 1 - rho * np.exp(-(self.mu_j - self.lam) * np.asarray(x))


def _faddeev_leverrier(t):
    """Coefficients of det(zI - T) and of adj(zI - T) = sum_k M_k z^(m-k)."""
    m = t.shape[0]
    coeffs = [1.0]
    mats = []
    prev = np.zeros_like(t)
    for k in range(1, m + 1):
        mk = t @ prev + coeffs[-1] * np.eye(m)
        coeffs.append(-np.trace(t @ mk) / k)
        mats.append(mk)
        prev = mk
    return np.array(coeffs), mats


@dataclass(frozen=True)
class CompoundPoissonPhaseType(LevyModel):
    """Unit drain with compound Poisson input of phase-type jumps.

    ``alpha`` is the initial distribution and ``T`` the sub-generator of the
    jump-size Markov chain (tuples so that the model stays hashable).
    ``method="roots"`` evaluates scale functions through the exponential-sum
    expansion; ``"inversion"`` inverts the defining transform numerically.
    """

    lam: float
    alpha: tuple
    T: tuple
    method: str = "roots"

    kind = "cp_phase_type_drift"
    bounded_variation = True

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        t = np.asarray(self.T, dtype=float)
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] != a.size:
            raise ValueError("T must be square and match alpha")
        if np.any(a < 0) or abs(a.sum() - 1) > 1e-12:
            raise ValueError("alpha must be a probability vector")
        exit_rates = -t.sum(axis=1)
        if np.any(exit_rates < -1e-12) or np.any(np.diag(t) >= 0):
            raise ValueError("T is not a sub-generator")
        if self.method not in ("roots", "inversion"):
            raise ValueError("method must be 'roots' or 'inversion'")
        object.__setattr__(self, "alpha", tuple(float(v) for v in a))
        object.__setattr__(self, "T", tuple(tuple(float(v) for v in row) for row in t))

    @classmethod
    def exponential(cls, lam, jump_mean=1.0, method="roots"):
        return cls(lam, (1.0,), ((-1.0 / jump_mean,),), method)

    @classmethod
    def erlang(cls, lam, shape, jump_mean=1.0, method="roots"):
        rate = shape / jump_mean
        t = np.diag(-rate * np.ones(shape)) + np.diag(rate * np.ones(shape - 1), 1)
        a = np.zeros(shape)
        a[0] = 1
        return cls(lam, tuple(a), tuple(map(tuple, t)), method)

    @classmethod
    def hyperexponential(cls, lam, probs, rates, method="roots"):
        return cls(lam, tuple(probs), tuple(map(tuple, np.diag(-np.asarray(rates, float)))), method)

    @property
    def has_closed_form(self):
        return self.method == "roots"

    @property
    def phi_abscissa(self):
        return float(np.max(np.linalg.eigvals(np.asarray(self.T)).real))

    @property
    def _mats(self):
        a = np.asarray(self.alpha)
        t = np.asarray(self.T)
        return a, t, -t.sum(axis=1)

    @property
    def jump_mean(self):
        a, t, _ = self._mats
        return float(a @ np.linalg.solve(-t, np.ones(len(a))))

    @property
    def jump_second_moment(self):
        a, t, _ = self._mats
        inv = np.linalg.inv(-t)
        return float(2 * a @ inv @ inv @ np.ones(len(a)))

    def _resolvent_power(self, a, power):
        al, t, t0 = self._mats
        a = np.asarray(a)
        m = len(al)
        mat = a[..., None, None] * np.eye(m) - t
        vec = np.broadcast_to(t0, a.shape + (m,))[..., None]
        for _ in range(power):
            vec = np.linalg.solve(mat, vec)
        return np.einsum("i,...i->...", al, vec[..., 0])

    def jump_transform(self, a):
        return self._resolvent_power(a, 1)

    def phi(self, a):
        a = np.asarray(a)
        return a - self.lam * (1 - self.jump_transform(a))

    def dphi(self, a):
        return 1 - self.lam * self._resolvent_power(a, 2)

    def d2phi(self, a):
        return 2 * self.lam * self._resolvent_power(a, 3)

    @property
    def _polys(self):
        return _phase_type_polys(self.alpha, self.T)

    def scale_expansion(self, q):
        q = np.asarray(q)
        p, n = self._polys
        m = len(p) - 1
        shape = q.shape
        qf = q.reshape(-1)
        # (z - lam - q) P(z) + lam N(z), monic of degree m + 1
        zp = np.concatenate([p, [0.0]])
        pp = np.concatenate([[0.0], p])
        nn = np.concatenate([np.zeros(m + 2 - len(n)), n])
        coeffs = zp[None, :] - (self.lam + qf)[:, None] * pp[None, :] + self.lam * nn[None, :]
        deg = m + 1
        comp = np.zeros((qf.size, deg, deg), dtype=complex)
        comp[:, 0, :] = -coeffs[:, 1:]
        comp[:, np.arange(1, deg), np.arange(deg - 1)] = 1.0
        roots = np.linalg.eigvals(comp)
        order = np.argsort(-roots.real, axis=-1, kind="stable")
        roots = np.take_along_axis(roots, order, -1)
        dpoly = coeffs[:, :-1] * np.arange(deg, 0, -1)[None, :]
        num = _polyval_rows(np.broadcast_to(p, (qf.size, len(p))), roots)
        den = _polyval_rows(dpoly, roots)
        if np.any(np.abs(den) < 1e-13):
            raise InvalidRangeError("repeated scale-function rates for this q")
        c = num / den
        return roots.reshape(shape + (deg,)), c.reshape(shape + (deg,))


@lru_cache(maxsize=64)
def _phase_type_polys(alpha, t):
    a = np.asarray(alpha)
    tm = np.asarray(t)
    t0 = -tm.sum(axis=1)
    p, mats = _faddeev_leverrier(tm)
    n = np.array([a @ mk @ t0 for mk in mats])
    return p, n


def _polyval_rows(coeffs, z):
    out = np.zeros(z.shape, dtype=complex)
    for j in range(coeffs.shape[1]):
        out = out * z + coeffs[:, j][:, None]
    return out


# ---------------------------------------------------------------------------
# psi


def laplace_exponent(model, a):
    """phi(a) = log E exp(-a X(1))."""
    out = model.phi(a)
    return out[()] if np.ndim(out) == 0 else out


def _psi_newton(model, q):
    q = np.asarray(q, dtype=float)
    if np.any(q < 0):
        raise InvalidRangeError("psi is evaluated for q >= 0 only")
    d0 = float(model.dphi(0.0))
    x = q / d0
    for _ in range(200):
        f = model.phi(x) - q
        step = f / model.dphi(x)
        x = x - step
        if np.all(np.abs(model.phi(x) - q) <= 1e-13 * np.maximum(q, 1.0)):
            return x
    # convexity makes a bracket [0, q/phi'(0)] available
    lo = np.zeros_like(q)
    hi = np.maximum(q / d0, 1e-300)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        below = model.phi(mid) < q
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def inverse_exponent(model, q):
    """psi(q), the right inverse of phi, for a stable model.

    Real ``q >= 0`` uses Newton's method from ``q / phi'(0)``. Complex ``q``
    takes the root of largest real part of the scale polynomial, which is the
    analytic continuation of psi into the right half plane.
    """
    model.require_stable()
    if np.iscomplexobj(np.asarray(q)):
        r, _ = model.scale_expansion(q)
        out = r[..., 0]
    else:
        out = _psi_newton(model, q)
    return out[()] if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# exponential-sum evaluation


def expsum_parts(rates, coefs, x, shift=0.0, z_index=0.0):
    """Scaled tilted scale-function values for ``W = sum c exp(r x)``.

    Returns ``(w, dw, z, log_scale)`` where, with ``u(y) = exp(-shift y) W(y)``,
    ``w = u(x) e^-S``, ``dw = u'(x) e^-S`` and
    ``z = (1 + z_index * int_0^x u) e^-S`` for the common log scale ``S``.
    Ratios of these quantities are therefore free of overflow.
    """
    x = np.asarray(x)[..., None]
    shift = np.asarray(shift)[..., None]
    z_index = np.asarray(z_index)
    rr = rates - shift
    e = rr * x
    s = np.max(np.real(e), axis=-1)
    s = np.where(s > 200.0, s, 0.0)  # rescale only when overflow is a concern
    ex = np.exp(e - s[..., None])
    es = np.exp(-s)
    # unscaled: sum c + sum c expm1(.) avoids cancellation at small x
    w = np.where(s > 0, np.sum(coefs * ex, -1), np.sum(coefs, -1) + np.sum(coefs * np.expm1(e), -1))
    dw = np.sum(coefs * rr * ex, -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.abs(e) < 1e-8
        safe = np.where(small, 1.0, e)
        unscaled = np.where(small, x * (1 + e / 2), x * np.expm1(safe) / safe)
        scaled = np.where(small, x * (1 + e / 2) * es[..., None], (ex - es[..., None]) / np.where(small, 1.0, rr))
        integ = np.sum(coefs * np.where(s[..., None] > 0, scaled, unscaled), -1)
    z = es + z_index * integ
    return w, dw, z, s


# ---------------------------------------------------------------------------
# evaluator


class ScaleEvaluator:
    """Scale-function calculator for one model.

    Closed-form kinds evaluate the exponential-sum expansion directly (also
    for complex ``q``). Numerical kinds invert the defining transforms and
    cache ``W^(q)`` on a grid with cubic interpolation for use inside
    quadratures.
    """

    def __init__(self, model, inversion_cfg=None):
        self.model = model
        self.closed_form = bool(model.has_closed_form)
        self.inversion_cfg = inversion_cfg or inversion.InversionConfig(target_abs_tol=1e-10, terms=45)
        self._splines = {}
        self._lock = threading.Lock()

    # -- closed-form helpers
    def _exp(self, q, x, which):
        q = np.asarray(q)
        x = np.asarray(x, dtype=float)
        r, c = self.model.scale_expansion(q)
        q_b, x_b = np.broadcast_arrays(q, x)
        r = np.broadcast_to(r, q_b.shape + r.shape[-1:])
        c = np.broadcast_to(c, q_b.shape + c.shape[-1:])
        xx = np.maximum(x_b, 0.0)[..., None]
        if which == "W":
            # sum c = W(0); expm1 keeps the small-x values accurate when it is 0
            out = np.sum(c, -1) + np.sum(c * np.expm1(r * xx), -1)
        elif which == "dW":
            out = np.sum(c * r * np.exp(r * xx), -1)
        elif which == "intW":
            e = r * xx
            tiny = np.abs(e) < 1e-8
            safe = np.where(tiny, 1.0, e)
            out = np.sum(c * np.where(tiny, xx * (1 + e / 2), xx * np.expm1(safe) / safe), -1)
        out = np.where(x_b < 0, 0.0, out)
        return _realify(out, q)

    # -- numerical helpers
    def _invert(self, fhat_of_s, shift, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        val, info = inversion.invert(lambda s: fhat_of_s(s + shift), np.maximum(x, 1e-300),
                                     self.inversion_cfg, full_output=True)
        if not info["converged"]:
            warnings.warn("scale function inversion did not converge", InversionAccuracyWarning, stacklevel=3)
        return np.exp(shift * x) * val

    def _numeric(self, q, x, which):
        if np.iscomplexobj(np.asarray(q)):
            raise InvalidRangeError("numerical scale functions support real q only")
        q = float(q)
        x = np.asarray(x, dtype=float)
        shift = float(inverse_exponent(self.model, q)) + 1.0
        phi = self.model.phi
        if which == "W":
            f = lambda s: 1.0 / (phi(s) - q)
        elif which == "dW":
            w0 = 1.0 if self.model.bounded_variation else 0.0
            f = lambda s: s / (phi(s) - q) - w0
        else:
            f = lambda s: 1.0 / (s * (phi(s) - q))
        flat = x.reshape(-1)
        out = np.zeros(flat.shape)
        pos = flat > 0
        if np.any(pos):
            out[pos] = self._invert(f, shift, flat[pos])
        if which == "W" and self.model.bounded_variation:
            out[flat == 0] = 1.0
        if which == "dW":
            out[flat == 0] = np.nan if not np.any(pos) else out[flat == 0]
        out[flat < 0] = 0.0
        return out.reshape(x.shape)

    def spline(self, q, xmax):
        """Cubic interpolant of W^(q) on [0, xmax] (numerical kinds)."""
        key = (float(q), float(xmax))
        with self._lock:
            sp = self._splines.get(key)
        if sp is not None:
            return sp
        n = 65
        while True:
            grid = np.linspace(0.0, xmax, n)
            vals = self._numeric(q, grid, "W")
            sp = CubicSpline(grid, vals)
            mid = 0.5 * (grid[1:] + grid[:-1])
            check = self._numeric(q, mid[::4], "W")
            if np.max(np.abs(sp(mid[::4]) - check)) <= 1e-9 * max(1.0, np.max(np.abs(vals))) or n > 4000:
                break
            n = 2 * n - 1
        with self._lock:
            self._splines[key] = sp
        return sp

    # -- public API
    def W(self, q, x):
        if self.closed_form:
            return _scalar(self._exp(q, x, "W"))
        return _scalar(self._numeric(q, x, "W"))

    def W_deriv(self, q, x):
        if self.closed_form:
            return _scalar(self._exp(q, x, "dW"))
        return _scalar(self._numeric(q, x, "dW"))

    def W_integral(self, q, x):
        """int_0^x W^(q)(y) dy."""
        if self.closed_form:
            return _scalar(self._exp(q, x, "intW"))
        return _scalar(self._numeric(q, x, "intW"))

    def Z(self, q, x):
        x = np.asarray(x, dtype=float)
        out = 1.0 + np.asarray(q) * self.W_integral(q, np.maximum(x, 0.0))
        out = np.where(x < 0, 1.0, out)
        return _scalar(out)

    def tilted_parts(self, w_index, shift, z_index, x):
        """Scaled (W_t, W_t', Z_t, log_scale) for W_t(y) = exp(-shift y) W^(w_index)(y).

        ``Z_t = 1 + z_index int_0^x W_t``. All three values carry the common
        factor ``exp(-log_scale)``.
        """
        if self.closed_form:
            r, c = self.model.scale_expansion(np.asarray(w_index))
            return expsum_parts(r, c, x, shift, z_index)
        w = self.W(w_index, x)
        dw = self.W_deriv(w_index, x)
        e = math.exp(-shift * x)
        integ = integrate.quad(lambda y: math.exp(-shift * y) * float(self.W(w_index, y)), 0.0, x,
                               epsabs=1e-12, epsrel=1e-12, limit=200)[0]
        return w * e, (dw - shift * w) * e, 1.0 + z_index * integ, 0.0

    def tilted(self, q, theta, x):
        """(W_tilt, Z_tilt) with W_tilt(x) = exp(-psi(q) x) W^(q+theta)(x)."""
        psi = inverse_exponent(self.model, q)
        if self.closed_form:
            w, _, z, s = self.tilted_parts(np.asarray(q) + theta, psi, theta, x)
            scale = np.exp(s)
            return _scalar(_realify(w * scale, q, theta)), _scalar(_realify(z * scale, q, theta))
        w, _, z, _ = self.tilted_parts(q + theta, psi, theta, float(x))
        return float(w), float(z)

    def selfconv(self, q, x):
        """(W^(q) * W^(q))(x) by adaptive quadrature."""
        return _vector_quad(lambda xx: self._selfconv_one(q, xx), x)

    def _selfconv_one(self, q, x):
        if x <= 0:
            return 0.0
        w = self._w_callable(q, x)
        return integrate.quad(lambda y: w(y) * w(x - y), 0.0, x, epsabs=1e-12, epsrel=1e-12, limit=200)[0]

    def selfconv_deriv(self, q, x):
        """d/dx (W^(q) * W^(q))(x) = W(0) W(x) + int_0^x W(y) W'(x - y) dy."""
        return _vector_quad(lambda xx: self._selfconv_deriv_one(q, xx), x)

    def _selfconv_deriv_one(self, q, x):
        if x <= 0:
            return 0.0
        w = self._w_callable(q, x)
        if self.closed_form:
            dw = lambda y: float(self.W_deriv(q, y))
        else:
            dw = self.spline(q, x).derivative()
        w0 = float(self.W(q, 0.0))
        integ = integrate.quad(lambda y: w(y) * dw(x - y), 0.0, x, epsabs=1e-12, epsrel=1e-12, limit=200)[0]
        return w0 * w(x) + integ

    def _w_callable(self, q, x):
        if self.closed_form:
            r, c = self.model.scale_expansion(np.asarray(float(q)))
            r = np.real_if_close(r)
            c = np.real_if_close(c)
            return lambda y: float(np.real(np.sum(c * np.exp(r * y))))
        sp = self.spline(q, x)
        return lambda y: float(sp(y))


def _scalar(v):
    return v[()] if np.ndim(v) == 0 else v


def _vector_quad(fn, x):
    x = np.asarray(x, dtype=float)
    out = np.array([fn(float(v)) for v in x.reshape(-1)]).reshape(x.shape)
    return _scalar(out)


@lru_cache(maxsize=64)
def evaluator(model):
    """Shared evaluator for a (hashable, immutable) model."""
    return ScaleEvaluator(model)


def scale_W(model, q, x):
    """W^(q)(x); zero for x < 0."""
    return evaluator(model).W(q, x)


def scale_Z(model, q, x):
    """Z^(q)(x) = 1 + q int_0^x W^(q)."""
    return evaluator(model).Z(q, x)


def scale_W_deriv(model, q, x):
    """Right derivative of W^(q) at x."""
    return evaluator(model).W_deriv(q, x)


def tilted_scale(model, q, theta, x):
    """(exp(-psi(q) x) W^(q+theta)(x), 1 + theta int_0^x of the former)."""
    return evaluator(model).tilted(q, theta, x)


def scale_W_selfconv(model, q, x):
    """(W^(q) * W^(q))(x)."""
    return evaluator(model).selfconv(q, x)


def scale_W_qderiv(model, q, x, h=None):
    """d/dq W^(q)(x) by a second-order finite difference in q.

    Central at q >= h, one-sided (three points) closer to 0.
    """
    q = float(q)
    h = h if h is not None else 1e-5 * max(1.0, q)
    ev = evaluator(model)
    if q >= h:
        return (ev.W(q + h, x) - ev.W(q - h, x)) / (2 * h)
    return (-3 * ev.W(q, x) + 4 * ev.W(q + h, x) - ev.W(q + 2 * h, x)) / (2 * h)


def model_from_dict(spec):
    """Build a model from a config mapping with a ``kind`` key."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "brownian":
        return Brownian(float(spec["mu"]), float(spec.get("sigma2", 1.0)))
    if kind == "cp_exp_drift":
        return CompoundPoissonExp(float(spec["lam"]), float(spec.get("jump_mean", 1.0)))
    if kind == "cp_phase_type_drift":
        method = spec.get("method", "roots")
        if "erlang_shape" in spec:
            return CompoundPoissonPhaseType.erlang(float(spec["lam"]), int(spec["erlang_shape"]),
                                                   float(spec.get("jump_mean", 1.0)), method)
        if "rates" in spec:
            return CompoundPoissonPhaseType.hyperexponential(float(spec["lam"]), spec["probs"], spec["rates"], method)
        return CompoundPoissonPhaseType(float(spec["lam"]), tuple(spec["alpha"]), tuple(map(tuple, spec["T"])), method)
    raise ValueError(f"unknown model kind {kind!r}")
