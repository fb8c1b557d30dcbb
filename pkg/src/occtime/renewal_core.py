"""Alternating renewal processes with dependent sojourn pairs.

The process starts in A, stays there for D_1, moves to B for U_1, returns to
A for D_2 and so on; the pairs (D_i, U_i) are i.i.d. but D_i and U_i may be
dependent. ``alpha(t)`` and ``beta(t) = t - alpha(t)`` are the times spent
in A and B up to t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from . import lattice as _lat
from .errors import DegenerateVarianceError, InvalidRangeError
from .laws import (
    Deterministic,
    EmpiricalLaw,
    Exponential,
    Gamma,
    IndependentProduct,
    MarshallOlkin,
    MomentSummary,
    SojournLaw,
    Uniform,
    erlang,
    law_from_dict,
)
from .lattice import LatticeConfig

__all__ = [
    "Deterministic", "EmpiricalLaw", "Exponential", "Gamma", "IndependentProduct", "LatticeConfig",
    "MarshallOlkin", "MomentSummary", "PathSample", "PathSamples", "SojournLaw", "Uniform", "erlang",
    "exact_cdf_alpha", "exact_cdf_beta", "law_from_dict", "moments", "normal_approx_cdf",
    "sample_pair", "simulate_alternating",
]

CHUNK = 1 << 16


def as_generator(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def chunk_generators(seed, n, chunk=CHUNK):
    """Independent generators for consecutive blocks of ``chunk`` replications.

    Block ``c`` always uses the stream spawned with key ``c``, so results do
    not depend on how the blocks are scheduled.
    """
    nblocks = max(1, -(-n // chunk))
    for c in range(nblocks):
        ss = np.random.SeedSequence(int(seed), spawn_key=(c,))
        yield c * chunk, min(n, (c + 1) * chunk), np.random.Generator(np.random.PCG64(ss))


@dataclass
class PathSample:
    """One simulated path observed up to time t."""

    alpha_t: float
    beta_t: float
    in_A_at_t: bool
    cycle_pairs: list = field(default_factory=list)

    @property
    def n_cycles(self):
        return len(self.cycle_pairs)


@dataclass
class PathSamples:
    """Many independent paths, stored column-wise."""

    t: float
    alpha_t: np.ndarray
    beta_t: np.ndarray
    in_A_at_t: np.ndarray
    n_cycles: np.ndarray
    alpha_coarse: np.ndarray | None = None
    dt: float | None = None

    def __len__(self):
        return self.alpha_t.size


def sample_pair(law, rng):
    """One draw (d, u) of the generic pair."""
    d, u = law.sample(1, as_generator(rng))
    return float(d[0]), float(u[0])


def _run_block(law, t, n, rng, keep_pairs=False):
    alpha = np.zeros(n)
    beta = np.zeros(n)
    elapsed = np.zeros(n)
    in_a = np.zeros(n, dtype=bool)
    cycles = np.zeros(n, dtype=np.int64)
    active = np.arange(n)
    pairs = []
    while active.size:
        d, u = law.sample(active.size, rng)
        if keep_pairs:
            pairs.append((float(d[0]), float(u[0])))
        rem = t - elapsed[active]
        stop_a = d > rem
        alpha[active] += np.where(stop_a, rem, d)
        in_a[active[stop_a]] = True
        go = ~stop_a
        idx = active[go]
        elapsed[idx] += d[go]
        rem_b = t - elapsed[idx]
        ub = u[go]
        stop_b = ub > rem_b
        beta[idx] += np.where(stop_b, rem_b, ub)
        cont = ~stop_b
        elapsed[idx[cont]] += ub[cont]
        cycles[idx[cont]] += 1
        # a cycle that ends exactly at t leaves the path in A with nothing left
        done = cont & (elapsed[idx] >= t)
        in_a[idx[done]] = True
        active = idx[cont & ~done]
    return alpha, beta, in_a, cycles, pairs


def simulate_alternating(law, t, rng=None, replications=None, start="A"):
    """Simulate the alternating process on [0, t].

    Parameters
    ----------
    law : SojournLaw
    t : float
        Horizon, positive.
    rng : numpy Generator or int, optional
        An integer seed selects reproducible per-block substreams.
    replications : int, optional
        When given, return :class:`PathSamples` with that many paths;
        otherwise a single :class:`PathSample` including the realised pairs.
    start : {"A", "B"}
        Initial set. Starting in B runs the swapped pair (U, D).
    """
    if not t > 0:
        raise InvalidRangeError("t must be positive")
    if start not in ("A", "B"):
        raise ValueError("start must be 'A' or 'B'")
    run_law = law if start == "A" else law.swapped()

    def finish(alpha, beta, in_a):
        if start == "A":
            return alpha, beta, in_a
        return beta, alpha, ~in_a

    if replications is None:
        alpha, beta, in_a, _, pairs = _run_block(run_law, t, 1, as_generator(rng), keep_pairs=True)
        alpha, beta, in_a = finish(alpha, beta, in_a)
        if start == "B":
            pairs = [(u, d) for d, u in pairs]
        return PathSample(float(alpha[0]), float(beta[0]), bool(in_a[0]), pairs)

    n = int(replications)
    if n < 1:
        raise ValueError("replications must be at least 1")
    out = [np.zeros(n), np.zeros(n), np.zeros(n, dtype=bool), np.zeros(n, dtype=np.int64)]
    if isinstance(rng, np.random.Generator):
        blocks = [(0, n, rng)]
    else:
        seed = 0 if rng is None else rng
        blocks = chunk_generators(seed, n)
    for lo, hi, gen in blocks:
        alpha, beta, in_a, cyc, _ = _run_block(run_law, t, hi - lo, gen)
        alpha, beta, in_a = finish(alpha, beta, in_a)
        for arr, v in zip(out, (alpha, beta, in_a, cyc)):
            arr[lo:hi] = v
    return PathSamples(float(t), *out)


def _check_x(t, x, allow_t=False):
    x = np.asarray(x, dtype=float)
    if not t > 0:
        raise InvalidRangeError("t must be positive")
    hi_ok = (x <= t) if allow_t else (x < t)
    if np.any(x < 0) or not np.all(hi_ok):
        raise InvalidRangeError("x must lie in [0, t)")
    return x


def _series(law, a, b, grid, method):
    grid = grid or LatticeConfig()
    if method == "auto":
        method = "product" if isinstance(law, IndependentProduct) else "bivariate"
    fn = {"product": _lat.product_series_sum, "bivariate": _lat.series_sum}[method]
    return _lat.richardson_series(law, a, b, grid, series=fn)


def exact_cdf_beta(law, t, x, grid=None, *, start="A", method="auto", full_output=False):
    """P(beta(t) <= x) from the exact series.

    Parameters
    ----------
    law : SojournLaw
    t : float
    x : float or array_like
        Points in [0, t).
    grid : LatticeConfig, optional
    start : {"A", "B"}
        Initial set; "B" swaps the roles of D and U.
    method : {"auto", "bivariate", "product"}
        "product" uses one-dimensional convolutions and needs independent
        sojourns; "auto" picks it when possible.
    full_output : bool
        Also return the :class:`~occtime.lattice.SeriesResult` of the series part.

    Returns
    -------
    float or ndarray
        The probability, with the same shape as ``x``.
    """
    x = _check_x(t, x)
    if start == "B":
        # beta of the original is the first-set occupation of the swapped law
        return exact_cdf_alpha(law.swapped(), t, np.nextafter(x, np.inf), grid,
                               method=method, full_output=full_output)
    xs = np.atleast_1d(x)
    b = t - xs
    head = 1.0 - np.asarray(law.cdf_D(b, strict=True), dtype=float)
    res = _series(law, xs, b, grid, method)
    value = np.clip(head + res.value, 0.0, 1.0).reshape(x.shape)
    value = value[()] if value.ndim == 0 else value
    return (value, res) if full_output else value


def exact_cdf_alpha(law, t, x, grid=None, *, start="A", method="auto", full_output=False):
    """P(alpha(t) < x) from the exact series; ``x`` in [0, t]."""
    x = _check_x(t, x, allow_t=True)
    if start == "B":
        # alpha of the original is the second-set occupation of the swapped law
        below = np.maximum(np.nextafter(x, -np.inf), 0.0)
        got = exact_cdf_beta(law.swapped(), t, np.minimum(below, np.nextafter(t, 0.0)), grid,
                             method=method, full_output=full_output)
        val, res = got if full_output else (got, None)
        val = np.where(x == 0, 0.0, val)
        val = val[()] if np.ndim(val) == 0 else val
        return (val, res) if full_output else val
    xs = np.atleast_1d(x)
    a = t - xs
    head = np.asarray(law.cdf_D(xs, strict=True), dtype=float)
    res = _series(law, a, xs, grid, method)
    value = np.clip(head - res.value, 0.0, 1.0).reshape(x.shape)
    value = value[()] if value.ndim == 0 else value
    return (value, res) if full_output else value


def moments(law):
    """MomentSummary of the law (means, variances, covariance, CLT scale)."""
    return law.moments()


def normal_approx_cdf(ms, t, x):
    """Gaussian approximation Phi((x - alpha t/(alpha+beta)) / sqrt(C t)) to P(alpha(t) <= x)."""
    if not t > 0:
        raise InvalidRangeError("t must be positive")
    if ms.clt_scale <= 0:
        raise DegenerateVarianceError("clt_scale is zero; the normal approximation is degenerate")
    z = (np.asarray(x, dtype=float) - ms.mean_fraction * t) / math.sqrt(ms.clt_scale * t)
    out = norm.cdf(z)
    return out[()] if np.ndim(out) == 0 else out
