"""Univariate marginals and bivariate sojourn laws for the pair (D, U).

Every law samples pairs, evaluates the transforms ``L1(s) = E exp(-s D)`` and
``L12(s1, s2) = E exp(-s1 D - s2 U)`` for complex arguments, reports the
joint moment generating function and its domain, and discretises itself on
a square lattice for the exact series of the occupation-time law.

Lattice masses use the linear ("hat") rule: node ``k h`` receives
``E[hat_k(D)]`` with ``hat_k(y) = max(0, 1 - |y/h - k|)``. This keeps total
mass and mean, puts atoms that sit on nodes exactly on those nodes, and has
O(h^2) error for smooth test functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import EmptySampleError, InfiniteMomentError, UnsupportedKindError

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


# ---------------------------------------------------------------------------
# marginals


class Marginal:
    """A positive univariate law."""

    family = "abstract"
    atomic = False

    def ramp(self, c):
        """R(c) = E (c - X)^+ = int_0^c F."""
        raise NotImplementedError

    def lattice(self, h, n):
        """Hat-rule masses on nodes 0..n-1 (mass beyond is dropped)."""
        k = np.arange(n, dtype=float)
        r = self.ramp
        m = (r((k + 1) * h) - 2 * r(k * h) + r((k - 1) * h)) / h
        return np.maximum(m, 0.0)

    def describe(self):
        return {"family": self.family, **{k: v for k, v in self.__dict__.items()}}


@dataclass(frozen=True)
class Exponential(Marginal):
    rate: float

    family = "exponential"

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be positive")

    @property
    def mean(self):
        return 1 / self.rate

    @property
    def var(self):
        return 1 / self.rate**2

    @property
    def mgf_sup(self):
        return self.rate

    def laplace(self, s):
        return self.rate / (self.rate + np.asarray(s))

    def laplace_moment(self, s, k):
        """E X^k exp(-s X)."""
        s = np.asarray(s)
        return math.factorial(k) * self.rate / (self.rate + s) ** (k + 1)

    def cdf(self, x, strict=False):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, -np.expm1(-self.rate * np.maximum(x, 0)), 0.0)

    def ramp(self, c):
        c = np.maximum(np.asarray(c, dtype=float), 0.0)
        return c + np.expm1(-self.rate * c) / self.rate

    def sample(self, n, rng):
        return rng.exponential(1 / self.rate, n)

    def tilt(self, a):
        return Exponential(self.rate - a)


@dataclass(frozen=True)
class Gamma(Marginal):
    shape: float
    rate: float

    family = "gamma"

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise ValueError("shape and rate must be positive")

    @property
    def mean(self):
        return self.shape / self.rate

    @property
    def var(self):
        return self.shape / self.rate**2

    @property
    def mgf_sup(self):
        return self.rate

    def laplace(self, s):
        return (self.rate / (self.rate + np.asarray(s))) ** self.shape

    def laplace_moment(self, s, k):
        s = np.asarray(s)
        return special.poch(self.shape, k) * self.rate**self.shape / (self.rate + s) ** (self.shape + k)

    def cdf(self, x, strict=False):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return special.gammainc(self.shape, self.rate * x)

    def ramp(self, c):
        c = np.maximum(np.asarray(c, dtype=float), 0.0)
        return c * special.gammainc(self.shape, self.rate * c) - self.mean * special.gammainc(self.shape + 1, self.rate * c)

    def sample(self, n, rng):
        return rng.gamma(self.shape, 1 / self.rate, n)

    def tilt(self, a):
        return Gamma(self.shape, self.rate - a)


def erlang(k, rate):
    return Gamma(float(k), rate)


@dataclass(frozen=True)
class Deterministic(Marginal):
    value: float

    family = "deterministic"
    atomic = True

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError("value must be positive")

    @property
    def mean(self):
        return self.value

    @property
    def var(self):
        return 0.0

    @property
    def mgf_sup(self):
        return math.inf

    def laplace(self, s):
        return np.exp(-np.asarray(s) * self.value)

    def laplace_moment(self, s, k):
        return self.value**k * np.exp(-np.asarray(s) * self.value)

    def cdf(self, x, strict=False):
        x = np.asarray(x, dtype=float)
        return (x > self.value).astype(float) if strict else (x >= self.value).astype(float)

    def ramp(self, c):
        return np.maximum(np.asarray(c, dtype=float) - self.value, 0.0)

    def sample(self, n, rng):
        return np.full(n, float(self.value))

    def tilt(self, a):
        return self


@dataclass(frozen=True)
class Uniform(Marginal):
    low: float
    high: float

    family = "uniform"

    def __post_init__(self):
        if not 0 <= self.low < self.high:
            raise ValueError("need 0 <= low < high")

    @property
    def mean(self):
        return (self.low + self.high) / 2

    @property
    def var(self):
        return (self.high - self.low) ** 2 / 12

    @property
    def mgf_sup(self):
        return math.inf

    def laplace(self, s):
        s = np.asarray(s)
        z = -s * (self.high - self.low)
        with np.errstate(divide="ignore", invalid="ignore"):
            # expm1 keeps full accuracy for small |s|
            out = np.exp(-s * self.low) * np.expm1(z) / z
        return np.where(np.abs(z) < 1e-300, 1.0, out)

    def laplace_moment(self, s, k):
        # E X^k e^{-sX} by Gauss-Legendre on the (polynomial times exponential) integrand
        s = np.asarray(s)
        half = (self.high - self.low) / 2
        mid = (self.high + self.low) / 2
        x, w = np.polynomial.legendre.leggauss(40)
        pts = mid + half * x
        return np.sum(w * pts**k * np.exp(-s[..., None] * pts), -1) / 2

    def cdf(self, x, strict=False):
        x = np.asarray(x, dtype=float)
        return np.clip((x - self.low) / (self.high - self.low), 0.0, 1.0)

    def ramp(self, c):
        c = np.asarray(c, dtype=float)
        w = self.high - self.low
        inside = (np.clip(c, self.low, self.high) - self.low) ** 2 / (2 * w)
        return inside + np.maximum(c - self.high, 0.0)

    def sample(self, n, rng):
        return rng.uniform(self.low, self.high, n)

    def tilt(self, a):
        raise UnsupportedKindError("exponential tilting of a uniform marginal is not implemented")


MARGINALS = {"exponential": Exponential, "gamma": Gamma, "deterministic": Deterministic, "uniform": Uniform}


def marginal_from_dict(spec):
    """Build a marginal from ``{"family": ..., **params}``."""
    spec = dict(spec)
    fam = spec.pop("family", None)
    if fam == "erlang":
        return erlang(spec["shape"], spec["rate"])
    if fam not in MARGINALS:
        raise ValueError(f"unknown marginal family {fam!r}")
    return MARGINALS[fam](**spec)


# ---------------------------------------------------------------------------
# moment summary


@dataclass(frozen=True)
class MomentSummary:
    """Means, variances and covariance of (D, U) with the CLT scale constant."""

    alpha: float
    beta: float
    var_D: float
    var_U: float
    cov_DU: float
    clt_scale: float = field(default=None)

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("means must be positive")
        if self.var_D < 0 or self.var_U < 0:
            raise ValueError("variances must be nonnegative")
        bound = math.sqrt(self.var_D * self.var_U)
        if abs(self.cov_DU) > bound * (1 + 1e-9) + 1e-15:
            raise ValueError("covariance violates Cauchy-Schwarz")
        a, b = self.alpha, self.beta
        c = (b * b * self.var_D + a * a * self.var_U - 2 * a * b * self.cov_DU) / (a + b) ** 3
        c = max(c, 0.0)
        if self.clt_scale is None:
            object.__setattr__(self, "clt_scale", c)
        elif abs(self.clt_scale - c) > 1e-12 * max(1.0, c):
            raise ValueError("clt_scale inconsistent with the other fields")

    @property
    def mean_fraction(self):
        return self.alpha / (self.alpha + self.beta)

    def as_dict(self):
        return {k: getattr(self, k) for k in ("alpha", "beta", "var_D", "var_U", "cov_DU", "clt_scale")}


# ---------------------------------------------------------------------------
# bivariate laws


@dataclass(frozen=True)
class MgfDomain:
    """Effective domain of (a, b) -> E exp(aD + bU)."""

    sup_a: float
    sup_b: float
    law: object = field(repr=False, compare=False, default=None)

    def feasible(self, a, b):
        return bool(np.isfinite(self.law.mgf(a, b)))


class SojournLaw:
    """Law of the generic cycle pair (D, U)."""

    kind = "abstract"
    atomic_D = False
    atomic_U = False

    # sampling
    def sample(self, n, rng):
        raise UnsupportedKindError(f"{self.kind} law has no sampler")

    # transforms
    def laplace_D(self, s):
        return self.joint_laplace(s, 0.0)

    def laplace_U(self, s):
        return self.joint_laplace(0.0, s)

    def joint_laplace(self, s1, s2):
        raise NotImplementedError

    # moment generating function
    def mgf(self, a, b):
        raise NotImplementedError

    def mgf_grad(self, a, b):
        """(E D e^{aD+bU}, E U e^{aD+bU})."""
        raise NotImplementedError

    def mgf_domain(self):
        return MgfDomain(self.mgf_sup_D, self.mgf_sup_U, self)

    def cdf_D(self, x, strict=False):
        raise NotImplementedError

    def cdf_U(self, x, strict=False):
        raise UnsupportedKindError(f"marginal CDF of U is not available for {self.kind}")

    def moments(self):
        raise NotImplementedError

    def lattice(self, h, nx, ny):
        """Joint hat-rule masses, shape (nx, ny): axis 0 is D, axis 1 is U."""
        raise NotImplementedError

    def lattice_D(self, h, n):
        raise NotImplementedError

    def lattice_U(self, h, n):
        raise NotImplementedError

    def swapped(self):
        return SwappedLaw(self)

    def tilted(self, a, b):
        raise UnsupportedKindError(f"{self.kind} law cannot be exponentially tilted")

    def describe(self):
        return {"kind": self.kind}


def _as_f(v):
    return v[()] if np.ndim(v) == 0 else v


class IndependentProduct(SojournLaw):
    """D and U independent with the given marginals."""

    kind = "independent"

    def __init__(self, D, U):
        self.D = D
        self.U = U
        self.atomic_D = D.atomic
        self.atomic_U = U.atomic

    def __repr__(self):
        return f"IndependentProduct({self.D!r}, {self.U!r})"

    def __eq__(self, other):
        return isinstance(other, IndependentProduct) and (self.D, self.U) == (other.D, other.U)

    def __hash__(self):
        return hash((self.kind, self.D, self.U))

    @property
    def mgf_sup_D(self):
        return self.D.mgf_sup

    @property
    def mgf_sup_U(self):
        return self.U.mgf_sup

    def sample(self, n, rng):
        return self.D.sample(n, rng), self.U.sample(n, rng)

    def laplace_D(self, s):
        return _as_f(self.D.laplace(s))

    def laplace_U(self, s):
        return _as_f(self.U.laplace(s))

    def joint_laplace(self, s1, s2):
        return _as_f(self.D.laplace(s1) * self.U.laplace(s2))

    def mgf(self, a, b):
        if a >= self.D.mgf_sup or b >= self.U.mgf_sup:
            return math.inf
        with np.errstate(over="ignore", invalid="ignore"):
            v = float(np.real(self.D.laplace(-a) * self.U.laplace(-b)))
        return v if np.isfinite(v) else math.inf

    def mgf_grad(self, a, b):
        if not np.isfinite(self.mgf(a, b)):
            return math.inf, math.inf
        with np.errstate(over="ignore", invalid="ignore"):
            ld, lu = self.D.laplace(-a), self.U.laplace(-b)
        return float(np.real(self.D.laplace_moment(-a, 1) * lu)), float(np.real(ld * self.U.laplace_moment(-b, 1)))

    def cdf_D(self, x, strict=False):
        return _as_f(self.D.cdf(x, strict))

    def cdf_U(self, x, strict=False):
        return _as_f(self.U.cdf(x, strict))

    def moments(self):
        return MomentSummary(self.D.mean, self.U.mean, self.D.var, self.U.var, 0.0)

    def lattice(self, h, nx, ny):
        return np.outer(self.D.lattice(h, nx), self.U.lattice(h, ny))

    def lattice_D(self, h, n):
        return self.D.lattice(h, n)

    def lattice_U(self, h, n):
        return self.U.lattice(h, n)

    def swapped(self):
        return IndependentProduct(self.U, self.D)

    def tilted(self, a, b):
        return IndependentProduct(self.D.tilt(a), self.U.tilt(b))

    def describe(self):
        return {"kind": self.kind, "D": self.D.describe(), "U": self.U.describe()}


class MarshallOlkin(SojournLaw):
    """Bivariate exponential with a common shock.

    ``D = min(E_D, E_C)`` and ``U = min(E_U, E_C)`` for independent
    exponential clocks with rates ``lam_d``, ``lam_u`` and ``lam_c``.
    """

    kind = "marshall_olkin"

    def __init__(self, lam_d, lam_u, lam_c):
        if not (lam_d >= 0 and lam_u >= 0 and lam_c >= 0):
            raise ValueError("rates must be nonnegative")
        if not (lam_d + lam_c > 0 and lam_u + lam_c > 0):
            raise ValueError("D and U need a positive total rate")
        self.lam_d, self.lam_u, self.lam_c = float(lam_d), float(lam_u), float(lam_c)

    def __repr__(self):
        return f"MarshallOlkin({self.lam_d}, {self.lam_u}, {self.lam_c})"

    def __eq__(self, other):
        return isinstance(other, MarshallOlkin) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    @property
    def _key(self):
        return (self.kind, self.lam_d, self.lam_u, self.lam_c)

    @property
    def rate_D(self):
        return self.lam_d + self.lam_c

    @property
    def rate_U(self):
        return self.lam_u + self.lam_c

    @property
    def total(self):
        return self.lam_d + self.lam_u + self.lam_c

    @property
    def mgf_sup_D(self):
        return self.rate_D

    @property
    def mgf_sup_U(self):
        return self.rate_U

    def sample(self, n, rng):
        ed = rng.exponential(1.0, n) / self.lam_d if self.lam_d > 0 else np.full(n, np.inf)
        eu = rng.exponential(1.0, n) / self.lam_u if self.lam_u > 0 else np.full(n, np.inf)
        ec = rng.exponential(1.0, n) / self.lam_c if self.lam_c > 0 else np.full(n, np.inf)
        return np.minimum(ed, ec), np.minimum(eu, ec)

    def joint_laplace(self, s1, s2):
        # condition on which clock rings first at time Z ~ Exp(total)
        s1 = np.asarray(s1)
        s2 = np.asarray(s2)
        a, b, lam = self.rate_D, self.rate_U, self.total
        out = (self.lam_c + self.lam_d * b / (b + s2) + self.lam_u * a / (a + s1)) / (lam + s1 + s2)
        return _as_f(out)

    def laplace_D(self, s):
        return _as_f(self.rate_D / (self.rate_D + np.asarray(s)))

    def laplace_U(self, s):
        return _as_f(self.rate_U / (self.rate_U + np.asarray(s)))

    def _finite(self, a, b):
        return a < self.rate_D and b < self.rate_U and a + b < self.total

    def mgf(self, a, b):
        if not self._finite(a, b):
            return math.inf
        return float(self.joint_laplace(-a, -b))

    def mgf_grad(self, a, b):
        if not self._finite(a, b):
            return math.inf, math.inf
        A, B, lam = self.rate_D, self.rate_U, self.total
        s1, s2 = -a, -b
        num = self.lam_c + self.lam_d * B / (B + s2) + self.lam_u * A / (A + s1)
        den = lam + s1 + s2
        # derivatives of L12 with respect to s1 and s2, negated
        d1 = -(-self.lam_u * A / (A + s1) ** 2 / den - num / den**2)
        d2 = -(-self.lam_d * B / (B + s2) ** 2 / den - num / den**2)
        return float(d1), float(d2)

    def cdf_D(self, x, strict=False):
        return _as_f(Exponential(self.rate_D).cdf(x))

    def cdf_U(self, x, strict=False):
        return _as_f(Exponential(self.rate_U).cdf(x))

    def moments(self):
        a, b = self.rate_D, self.rate_U
        cov = self.lam_c / (self.total * a * b)
        return MomentSummary(1 / a, 1 / b, 1 / a**2, 1 / b**2, cov)

    def lattice_D(self, h, n):
        return Exponential(self.rate_D).lattice(h, n)

    def lattice_U(self, h, n):
        return Exponential(self.rate_U).lattice(h, n)

    def lattice(self, h, nx, ny):
        lam = self.total
        out = np.zeros((nx, ny))
        # cells [k h, (k+1) h] on which all integrands are smooth
        ncell = max(nx, ny) + 1
        k = np.arange(ncell)[:, None]
        z = (k + 0.5 + 0.5 * _GL_NODES[None, :]) * h
        wz = 0.5 * h * _GL_WEIGHTS[None, :] * lam * np.exp(-lam * z)
        z = z.reshape(-1)
        wz = wz.reshape(-1)
        hat_x = _hat_matrix(z, h, nx)
        hat_y = _hat_matrix(z, h, ny)
        if self.lam_c > 0:
            out += (self.lam_c / lam) * (hat_x * wz) @ hat_y.T
        if self.lam_d > 0:
            shifted = _shifted_exp_hats(z, h, ny, self.rate_U)
            out += (self.lam_d / lam) * (hat_x * wz) @ shifted.T
        if self.lam_u > 0:
            shifted = _shifted_exp_hats(z, h, nx, self.rate_D)
            out += (self.lam_u / lam) * (shifted * wz) @ hat_y.T
        return np.maximum(out, 0.0)

    def describe(self):
        return {"kind": self.kind, "lam_d": self.lam_d, "lam_u": self.lam_u, "lam_c": self.lam_c}


def _hat_matrix(z, h, n):
    k = np.arange(n)[:, None]
    return np.maximum(0.0, 1.0 - np.abs(z[None, :] / h - k))


def _shifted_exp_hats(z, h, n, rate):
    """E hat_k(z + E) for E ~ Exp(rate), as an (n, len(z)) array."""
    k = np.arange(n)[:, None]

    def ramp(c):
        c = np.maximum(c, 0.0)
        return c + np.expm1(-rate * c) / rate

    zz = z[None, :]
    return np.maximum((ramp((k + 1) * h - zz) - 2 * ramp(k * h - zz) + ramp((k - 1) * h - zz)) / h, 0.0)


class EmpiricalLaw(SojournLaw):
    """Discrete law putting (optionally weighted) mass on observed pairs."""

    kind = "empirical"

    def __init__(self, d, u, weights=None):
        d = np.asarray(d, dtype=float).ravel()
        u = np.asarray(u, dtype=float).ravel()
        if d.size == 0:
            raise EmptySampleError("empirical law needs at least one pair")
        if d.shape != u.shape:
            raise ValueError("d and u must have equal length")
        if np.any(d <= 0) or np.any(u <= 0) or not np.all(np.isfinite(d + u)):
            raise ValueError("sojourn times must be positive and finite")
        self.d, self.u = d, u
        if weights is None:
            self.w = np.full(d.size, 1.0 / d.size)
        else:
            w = np.asarray(weights, dtype=float)
            self.w = w / w.sum()

    @classmethod
    def from_csv(cls, path):
        """Read a two-column CSV with header ``d,u``."""
        import csv

        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"d", "u"} <= set(reader.fieldnames):
                raise ValueError("empirical CSV needs a header with columns d and u")
            rows = [(float(r["d"]), float(r["u"])) for r in reader]
        if not rows:
            raise EmptySampleError(f"no rows in {path}")
        d, u = zip(*rows)
        return cls(d, u)

    def __len__(self):
        return self.d.size

    @property
    def mgf_sup_D(self):
        return math.inf

    @property
    def mgf_sup_U(self):
        return math.inf

    def sample(self, n, rng):
        idx = rng.choice(self.d.size, size=n, p=self.w)
        return self.d[idx], self.u[idx]

    def joint_laplace(self, s1, s2):
        s1 = np.asarray(s1)[..., None]
        s2 = np.asarray(s2)[..., None]
        return _as_f(np.sum(self.w * np.exp(-s1 * self.d - s2 * self.u), -1))

    def _weights(self, a, b):
        e = a * self.d + b * self.u
        top = e.max()
        w = self.w * np.exp(e - top)
        return w, top

    def _guard(self, w):
        # the tilted sample must keep a reasonable effective size
        ess = w.sum() ** 2 / np.sum(w * w) / np.sum(self.w**2) ** -1
        return ess >= 0.01

    def mgf(self, a, b):
        w, top = self._weights(a, b)
        if not self._guard(w):
            return math.inf
        with np.errstate(over="ignore"):
            return float(w.sum() * math.exp(top)) if top < 700 else math.inf

    def mgf_grad(self, a, b):
        w, top = self._weights(a, b)
        if not self._guard(w) or top >= 700:
            return math.inf, math.inf
        s = math.exp(top)
        return float(np.sum(w * self.d) * s), float(np.sum(w * self.u) * s)

    def cdf_D(self, x, strict=False):
        return _weighted_cdf(self.d, self.w, x, strict)

    def cdf_U(self, x, strict=False):
        return _weighted_cdf(self.u, self.w, x, strict)

    def moments(self):
        w = self.w
        md, mu = np.sum(w * self.d), np.sum(w * self.u)
        vd = np.sum(w * (self.d - md) ** 2)
        vu = np.sum(w * (self.u - mu) ** 2)
        c = np.sum(w * (self.d - md) * (self.u - mu))
        return MomentSummary(float(md), float(mu), float(vd), float(vu), float(c))

    def lattice(self, h, nx, ny):
        return _bilinear_deposit(self.d, self.u, self.w, h, nx, ny)

    def lattice_D(self, h, n):
        return _linear_deposit(self.d, self.w, h, n)

    def lattice_U(self, h, n):
        return _linear_deposit(self.u, self.w, h, n)

    def swapped(self):
        return EmpiricalLaw(self.u, self.d, self.w)

    def tilted(self, a, b):
        w, _ = self._weights(a, b)
        return EmpiricalLaw(self.d, self.u, w)

    def describe(self):
        return {"kind": self.kind, "n": int(self.d.size)}


def _weighted_cdf(v, w, x, strict):
    x = np.asarray(x, dtype=float)
    order = np.argsort(v)
    vs, cw = v[order], np.cumsum(w[order])
    idx = np.searchsorted(vs, x, side="left" if strict else "right")
    return _as_f(np.where(idx > 0, cw[np.maximum(idx - 1, 0)], 0.0))


def _linear_deposit(x, w, h, n):
    pos = x / h
    i0 = np.floor(pos).astype(np.int64)
    f = pos - i0
    out = np.zeros(n + 1)
    for idx, ww in ((i0, w * (1 - f)), (i0 + 1, w * f)):
        keep = idx < n
        out += np.bincount(idx[keep], ww[keep], minlength=n + 1)[: n + 1]
    return out[:n]


def _bilinear_deposit(x, y, w, h, nx, ny):
    px, py = x / h, y / h
    ix, iy = np.floor(px).astype(np.int64), np.floor(py).astype(np.int64)
    fx, fy = px - ix, py - iy
    out = np.zeros(nx * ny)
    for dx, wx in ((0, 1 - fx), (1, fx)):
        for dy, wy in ((0, 1 - fy), (1, fy)):
            jx, jy = ix + dx, iy + dy
            keep = (jx < nx) & (jy < ny)
            out += np.bincount(jx[keep] * ny + jy[keep], (w * wx * wy)[keep], minlength=nx * ny)
    return out.reshape(nx, ny)


class SwappedLaw(SojournLaw):
    """The law of (U, D) given the law of (D, U)."""

    kind = "swapped"

    def __init__(self, base):
        self.base = base
        self.atomic_D = base.atomic_U
        self.atomic_U = base.atomic_D

    @property
    def mgf_sup_D(self):
        return self.base.mgf_sup_U

    @property
    def mgf_sup_U(self):
        return self.base.mgf_sup_D

    def sample(self, n, rng):
        d, u = self.base.sample(n, rng)
        return u, d

    def joint_laplace(self, s1, s2):
        return self.base.joint_laplace(s2, s1)

    def laplace_D(self, s):
        return self.base.laplace_U(s)

    def mgf(self, a, b):
        return self.base.mgf(b, a)

    def mgf_grad(self, a, b):
        gd, gu = self.base.mgf_grad(b, a)
        return gu, gd

    def cdf_D(self, x, strict=False):
        return self.base.cdf_U(x, strict)

    def cdf_U(self, x, strict=False):
        return self.base.cdf_D(x, strict)

    def moments(self):
        m = self.base.moments()
        return MomentSummary(m.beta, m.alpha, m.var_U, m.var_D, m.cov_DU)

    def lattice(self, h, nx, ny):
        return self.base.lattice(h, ny, nx).T

    def lattice_D(self, h, n):
        return self.base.lattice_U(h, n)

    def swapped(self):
        return self.base

    def tilted(self, a, b):
        return SwappedLaw(self.base.tilted(b, a))

    def describe(self):
        return {"kind": self.kind, "base": self.base.describe()}


def law_from_dict(spec):
    """Build a sojourn law from a config mapping."""
    spec = dict(spec)
    kind = spec.get("kind", "independent")
    if kind == "independent":
        return IndependentProduct(marginal_from_dict(spec["D"]), marginal_from_dict(spec["U"]))
    if kind == "marshall_olkin":
        return MarshallOlkin(spec["lam_d"], spec["lam_u"], spec["lam_c"])
    if kind == "empirical":
        return EmpiricalLaw.from_csv(spec["path"])
    raise ValueError(f"unknown law kind {kind!r}")


def check_finite_variance(law):
    m = law.moments()
    if not (np.isfinite(m.var_D) and np.isfinite(m.var_U)):
        raise InfiniteMomentError("sojourn variances are not finite")
    return m
