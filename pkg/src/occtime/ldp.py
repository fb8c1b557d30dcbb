"""Large deviations of the occupation fraction alpha(t)/t.

For a light-tailed pair (D, U) the scaled cumulant of alpha(t) is
``lambda(theta) = theta d(theta)`` where the drain rate ``d(theta)`` is the
root of

    E exp(theta (1 - d) D - theta d U) = 1

in (mean fraction, 1). The rate function is the Legendre-Fenchel transform
``lambda*(frac) = sup_theta (theta frac - lambda(theta))``.

Differentiating the root equation gives ``lambda'(theta) = G_D / (G_D + G_U)``
with ``(G_D, G_U)`` the gradient of the joint MGF at the tilt point, i.e. the
mean occupation fraction under the exponentially tilted cycle law. The
conjugate is computed from this first-order condition.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .errors import InvalidRangeError, NoRootError
from .renewal_core import chunk_generators

__all__ = [
    "MCEstimate", "RateResult", "cumulant", "cumulant_derivative", "drain_rate", "joint_mgf",
    "lower_rate_function", "occupation_mgf_estimate", "rate_function", "tail_asymptotic",
    "tail_probability_estimate",
]

EPS = 1e-9
CERT_TOL = 1e-12
THETA_MAX = 1e4
SMALL_THETA = 1e-5


def joint_mgf(law, a, b):
    """E exp(aD + bU); +inf outside the effective domain."""
    v = law.mgf(float(a), float(b))
    return v if np.isfinite(v) else math.inf


def _mean_fraction(law):
    return law.moments().mean_fraction


def _excess(law, theta):
    return lambda d: joint_mgf(law, theta * (1 - d), -theta * d) - 1.0


def _finite_edge(h, lo, hi):
    # h(lo) is infinite and h(hi) finite; shrink towards the domain boundary
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if math.isinf(h(mid)):
            lo = mid
        else:
            hi = mid
    return hi


def _polish(law, theta, d):
    # Newton steps on the root equation using the MGF gradient
    for _ in range(3):
        a, b = theta * (1 - d), -theta * d
        r = joint_mgf(law, a, b) - 1.0
        if abs(r) <= CERT_TOL:
            break
        gd, gu = law.mgf_grad(a, b)
        slope = -theta * (gd + gu)
        if not (np.isfinite(slope) and slope < 0):
            break
        d = min(max(d - r / slope, 0.0), 1.0)
    return d


def drain_rate(law, theta):
    """Root d(theta) of E exp(theta (1-d) D - theta d U) = 1.

    Raises
    ------
    NoRootError
        If the MGF domain cuts the bracket off before a sign change, i.e.
        theta lies outside the effective domain of lambda.
    """
    theta = float(theta)
    if not theta > 0:
        raise InvalidRangeError("theta must be positive")
    h = _excess(law, theta)
    mf = _mean_fraction(law)
    if theta < SMALL_THETA:
        # the root equation is flat to rounding here; lambda''(0) is the CLT constant
        d = mf + 0.5 * law.moments().clt_scale * theta
        if abs(h(d)) > CERT_TOL:
            raise NoRootError(f"drain expansion residual {abs(h(d)):.3g} exceeds {CERT_TOL:g} at theta={theta}")
        return d
    # by Jensen h(mf) >= 0; start there and move right if the MGF blows up
    lo, hi = mf, 1.0 - EPS
    h_hi = h(hi)
    if not h_hi < 0:
        raise NoRootError(f"no sign change of the drain equation below 1 at theta={theta}")
    h_lo = h(lo)
    if math.isinf(h_lo):
        lo = _finite_edge(h, lo, hi)
        h_lo = h(lo)
        if h_lo < 0:
            raise NoRootError(f"theta={theta} lies beyond the effective domain of the cumulant")
    if abs(h_lo) <= CERT_TOL:
        d = lo
    else:
        d = optimize.brentq(h, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    d = _polish(law, theta, d)
    resid = abs(h(d))
    if resid > CERT_TOL:
        raise NoRootError(f"drain equation residual {resid:.3g} exceeds {CERT_TOL:g} at theta={theta}")
    return d


def cumulant(law, theta):
    """lambda(theta) = lim (1/t) log E exp(theta alpha(t)).

    Negative ``theta`` uses alpha(t) = t - beta(t), i.e.
    ``lambda(theta) = theta + lambda_swapped(-theta)``.
    """
    theta = float(theta)
    if theta == 0:
        return 0.0
    if theta < 0:
        return theta + cumulant(law.swapped(), -theta)
    return theta * drain_rate(law, theta)


def cumulant_derivative(law, theta):
    """lambda'(theta), the tilted mean occupation fraction."""
    theta = float(theta)
    if theta == 0:
        return _mean_fraction(law)
    if theta < 0:
        return 1.0 - cumulant_derivative(law.swapped(), -theta)
    d = drain_rate(law, theta)
    gd, gu = law.mgf_grad(theta * (1 - d), -theta * d)
    return gd / (gd + gu)


@dataclass(frozen=True)
class RateResult:
    frac: float
    rate: float
    theta: float
    drain: float
    boundary: bool = False


def _domain_edge(law, lo, hi):
    # lo is inside the effective domain, hi outside
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        try:
            drain_rate(law, mid)
            lo = mid
        except NoRootError:
            hi = mid
    return lo


def rate_function(law, frac, *, full_output=False):
    """lambda*(frac) = sup_{theta >= 0} (theta frac - lambda(theta)) for frac above the mean.

    The maximiser solves lambda'(theta) = frac. If it would lie beyond the
    effective domain, the supremum over the domain is returned with
    ``boundary=True``; if lambda' stays below ``frac`` on (0, THETA_MAX] the
    rate is taken as +inf (the fraction is essentially unreachable).
    """
    frac = float(frac)
    mf = _mean_fraction(law)
    if frac == mf:
        res = RateResult(frac, 0.0, 0.0, mf)
        return res if full_output else 0.0
    if not mf < frac < 1:
        raise InvalidRangeError(f"frac must lie in [{mf:.6g}, 1) for the upper tail")

    def slope(th):
        return cumulant_derivative(law, th) - frac

    lo, hi = 0.0, 1.0
    res = None
    while True:
        try:
            s = slope(hi)
        except NoRootError:
            edge = _domain_edge(law, lo, hi)
            if slope(edge) < 0:
                d = drain_rate(law, edge)
                res = RateResult(frac, edge * frac - edge * d, edge, d, boundary=True)
            break
        if s >= 0:
            break
        lo, hi = hi, 2 * hi
        if hi > THETA_MAX:
            res = RateResult(frac, math.inf, math.inf, 1.0, boundary=True)
            break
    if res is None:
        th = optimize.brentq(slope, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)
        d = drain_rate(law, th)
        res = RateResult(frac, max(th * frac - th * d, 0.0), th, d)
    return res if full_output else res.rate


def lower_rate_function(law, frac, *, full_output=False):
    """Rate of P(alpha(t)/t < frac) for frac below the mean fraction.

    Convenience wrapper: the event is {beta(t)/t > 1 - frac}, the upper tail
    of the swapped pair (U, D).
    """
    return rate_function(law.swapped(), 1.0 - float(frac), full_output=full_output)


def tail_asymptotic(law, frac, t):
    """exp(-t lambda*(frac)).

    This is the logarithmic asymptote of P(alpha(t)/t > frac), not the
    probability itself; the sub-exponential prefactor is ignored.
    """
    if not t > 0:
        raise InvalidRangeError("t must be positive")
    return math.exp(-t * rate_function(law, frac))


# ---------------------------------------------------------------------------
# Monte Carlo under the exponentially tilted cycle law


@dataclass(frozen=True)
class MCEstimate:
    """Importance-sampling estimate held on the log scale."""

    log_value: float
    rel_se: float
    n: int
    theta: float
    drain: float

    @property
    def value(self):
        return math.exp(self.log_value)


def _tilted_block(law, tilted, a, b, log_m, t, n, rng):
    """alpha(t) and log likelihood ratio for ``n`` paths drawn under ``tilted``.

    Every sampled pair enters the likelihood ratio, including the pair that
    straddles t; the number of pairs drawn is a stopping time.
    """
    alpha = np.zeros(n)
    loglr = np.zeros(n)
    elapsed = np.zeros(n)
    active = np.arange(n)
    while active.size:
        d, u = tilted.sample(active.size, rng)
        loglr[active] += log_m - (a * d + b * u)
        rem = t - elapsed[active]
        alpha[active] += np.minimum(d, rem)
        elapsed[active] += d + u
        active = active[elapsed[active] < t]
    return alpha, loglr


def _tilted_run(law, theta, t, n, seed):
    d = drain_rate(law, theta)
    a, b = theta * (1 - d), -theta * d
    tilted = law.tilted(a, b)
    log_m = math.log(joint_mgf(law, a, b))
    alpha, loglr = np.empty(n), np.empty(n)
    for lo, hi, gen in chunk_generators(seed, n):
        alpha[lo:hi], loglr[lo:hi] = _tilted_block(law, tilted, a, b, log_m, t, hi - lo, gen)
    return d, alpha, loglr


def _log_mean(logs):
    logs = logs[np.isfinite(logs)]
    n_all = logs.size
    if n_all == 0:
        return -math.inf, math.inf
    lm = special.logsumexp(logs)
    return lm, math.sqrt(float(np.sum(np.exp(2 * (logs - lm)))))


def tail_probability_estimate(law, frac, t, n=100_000, seed=0, theta=None):
    """Estimate of P(alpha(t) > frac t) by exponential tilting of the cycles.

    The tilt defaults to the maximiser theta* of the conjugate at ``frac``,
    under which the event is typical. The law must support ``tilted``.
    """
    if not t > 0:
        raise InvalidRangeError("t must be positive")
    theta = rate_function(law, frac, full_output=True).theta if theta is None else float(theta)
    d, alpha, loglr = _tilted_run(law, theta, float(t), int(n), seed)
    hit = alpha > frac * t
    logs = np.where(hit, loglr, -np.inf)
    lm, rel = _log_mean(logs)
    n = int(n)
    # relative standard error of the sample mean from the normalised weights
    rel_se = math.sqrt(max(rel**2 - 1.0 / n, 0.0) * n / max(n - 1, 1)) if np.isfinite(lm) else math.inf
    return MCEstimate(lm - math.log(n), rel_se, n, theta, d)


def occupation_mgf_estimate(law, theta, t, n=100_000, seed=0):
    """Estimate of E exp(theta alpha(t)) for theta > 0, tilting at theta."""
    if not t > 0:
        raise InvalidRangeError("t must be positive")
    d, alpha, loglr = _tilted_run(law, float(theta), float(t), int(n), seed)
    lm, rel = _log_mean(theta * alpha + loglr)
    n = int(n)
    rel_se = math.sqrt(max(rel**2 - 1.0 / n, 0.0) * n / max(n - 1, 1))
    return MCEstimate(lm - math.log(n), rel_se, n, float(theta), d)
