"""Monte Carlo oracles for the storage and Brownian models.

* :func:`simulate_storage` runs the reflected compound Poisson process exactly
  (event by event) from level tau and records the (D, U) cycles.
* :func:`sample_storage_cycles` draws i.i.d. cycles directly; every cycle
  starts at tau right after a downcrossing.
* :func:`simulate_rbm` is an Euler scheme for reflected Brownian motion.
* :func:`supremum_epoch_sample` returns the pair (e_q - G, alpha(e_q)) for a
  Brownian random walk observed up to an exponential time.

Replication ``i`` always uses stream ``i`` of the seed, so output is
reproducible bit for bit and independent of chunking. The kernels run
under numba unless ``OCCTIME_BACKEND=numpy``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from . import _kernels as K
from ._accel import get_backend
from .errors import EmptySampleError, InvalidRangeError, UnsupportedKindError
from .levy_scale import CompoundPoissonExp, CompoundPoissonPhaseType
from .renewal_core import PathSample, PathSamples

__all__ = [
    "CycleRecord", "Cycles", "SimConfig", "empirical_cdf", "free_bm_boundary_atoms", "ks_critical_value",
    "ks_statistic",
    "ks_two_sample", "sample_storage_cycles", "simulate_rbm", "simulate_storage",
    "supremum_epoch_sample",
]

CHUNK = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    """Seed, replication count, horizon, Euler step and level of a run."""

    seed: int = 0
    replications: int = 1
    horizon: float = 1.0
    dt: float | None = None
    tau: float = 0.0

    def __post_init__(self):
        if self.replications < 1:
            raise InvalidRangeError("replications must be at least 1")
        if not self.horizon > 0:
            raise InvalidRangeError("horizon must be positive")
        if self.dt is not None and not self.dt > 0:
            raise InvalidRangeError("dt must be positive")
        if self.tau < 0:
            raise InvalidRangeError("tau must be nonnegative")
        if not 0 <= int(self.seed) < 2**63:
            raise InvalidRangeError("seed must lie in [0, 2**63)")


@dataclass(frozen=True)
class CycleRecord:
    d: float
    u: float
    overshoot: float


@dataclass
class Cycles:
    """Column store of simulated cycles."""

    d: np.ndarray
    u: np.ndarray
    overshoot: np.ndarray

    def __len__(self):
        return self.d.size

    def __getitem__(self, i):
        return CycleRecord(float(self.d[i]), float(self.u[i]), float(self.overshoot[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def pairs(self):
        return list(zip(self.d.tolist(), self.u.tolist()))


def _seed(cfg, rng):
    if rng is None:
        return int(cfg.seed)
    if isinstance(rng, (int, np.integer)):
        if not 0 <= int(rng) < 2**63:
            raise InvalidRangeError("seed must lie in [0, 2**63)")
        return int(rng)
    return int(np.random.default_rng(rng).integers(0, 2**63 - 1))


def _jump_spec(model):
    """(lam, a_cum, p_cum, rates) describing the jump law to the kernels."""
    if isinstance(model, CompoundPoissonExp):
        return (float(model.lam), np.array([1.0]), np.ones((1, 2)), np.array([model.mu_j]))
    if isinstance(model, CompoundPoissonPhaseType):
        a, t, t0 = model._mats
        rates = -np.diag(t).copy()
        moves = np.where(np.eye(len(a), dtype=bool), 0.0, t) / rates[:, None]
        probs = np.concatenate([moves, (t0 / rates)[:, None]], axis=1)
        p_cum = np.cumsum(probs, axis=1)
        p_cum[:, -1] = 1.0
        a_cum = np.cumsum(a)
        a_cum[-1] = 1.0
        return float(model.lam), a_cum, p_cum, rates
    raise UnsupportedKindError(f"exact simulation needs a compound Poisson model, got {model.kind}")


def _kernel(name):
    suffix = "_nb" if get_backend() == "numba" else "_np"
    return getattr(K, name + suffix)


def _chunks(n):
    for lo in range(0, n, CHUNK):
        yield lo, min(n, lo + CHUNK)


def sample_storage_cycles(model, tau, n, seed=0, first=0):
    """``n`` i.i.d. cycles (D, U, overshoot) of the storage process at level ``tau``.

    Cycle ``i`` uses stream ``first + i``, so consecutive batches can be
    drawn with increasing ``first``.
    """
    if tau < 0:
        raise InvalidRangeError("tau must be nonnegative")
    model.require_stable()
    lam, a_cum, p_cum, rates = _jump_spec(model)
    n = int(n)
    d, u, o = np.empty(n), np.empty(n), np.empty(n)
    fn = _kernel("storage_cycles")
    for lo, hi in _chunks(n):
        fn(int(seed), int(first) + lo, hi - lo, lam, float(tau), a_cum, p_cum, rates, d[lo:hi], u[lo:hi], o[lo:hi])
    return Cycles(d, u, o)


def simulate_storage(model, cfg, rng=None, *, max_cycles=None):
    """Exact simulation of the storage process on [0, cfg.horizon] from Q(0) = tau.

    Returns ``(paths, cycles)``. With one replication ``paths`` is a
    :class:`PathSample` whose ``cycle_pairs`` are the completed cycles;
    otherwise it is a :class:`PathSamples`. ``cycles`` always holds the
    completed cycles of the first replication (at most ``max_cycles``).
    """
    model.require_stable()
    lam, a_cum, p_cum, rates = _jump_spec(model)
    seed = _seed(cfg, rng)
    n = cfg.replications
    if max_cycles is None:
        # every cycle contains at least one jump
        max_cycles = int(min(4 * lam * cfg.horizon + 100, 50_000_000))
    cd, cu, co = np.empty(max_cycles), np.empty(max_cycles), np.empty(max_cycles)
    alpha = np.empty(n)
    in_a = np.empty(n, dtype=bool)
    ncyc = np.empty(n, dtype=np.int64)
    fn = _kernel("storage_paths")
    for lo, hi in _chunks(n):
        cap = (cd, cu, co) if lo == 0 else (cd[:0], cu[:0], co[:0])
        fn(seed, lo, hi - lo, lam, float(cfg.tau), float(cfg.horizon), a_cum, p_cum, rates,
           alpha[lo:hi], in_a[lo:hi], ncyc[lo:hi], *cap)
    k = int(min(ncyc[0], max_cycles))
    cycles = Cycles(cd[:k].copy(), cu[:k].copy(), co[:k].copy())
    beta = cfg.horizon - alpha
    if n == 1:
        return PathSample(float(alpha[0]), float(beta[0]), bool(in_a[0]), cycles.pairs()), cycles
    return PathSamples(float(cfg.horizon), alpha, beta, in_a, ncyc), cycles


def default_dt(mu, sigma2):
    return 1e-4 * min(1.0, sigma2 / mu**2) if mu != 0 else 1e-4


def simulate_rbm(mu, sigma2, cfg, rng=None, *, coupled=False):
    """Euler scheme ``Q <- max(Q + dX, 0)`` for reflected Brownian motion from Q(0) = tau.

    The occupation of [0, tau] adds, per step, the fraction of the linearly
    interpolated segment that lies below tau. With ``coupled=True`` the same
    increments also drive a path on the doubled step, whose occupation times
    are returned in ``alpha_coarse``; their mean difference estimates the
    discretisation bias.
    """
    if not sigma2 > 0:
        raise InvalidRangeError("sigma2 must be positive")
    dt = cfg.dt if cfg.dt is not None else default_dt(mu, sigma2)
    nsteps = int(round(cfg.horizon / dt))
    if nsteps < 2 or abs(nsteps * dt - cfg.horizon) > 1e-9 * cfg.horizon:
        raise InvalidRangeError("horizon must be an integer multiple (at least 2) of dt")
    if coupled and nsteps % 2:
        raise InvalidRangeError("coupled runs need an even number of steps")
    seed = _seed(cfg, rng)
    n = cfg.replications
    alpha, alpha2, qend = np.empty(n), np.empty(n), np.empty(n)
    fn = _kernel("rbm")
    for lo, hi in _chunks(n):
        fn(seed, lo, hi - lo, float(mu), math.sqrt(sigma2), float(cfg.tau), float(dt), nsteps, bool(coupled),
           alpha[lo:hi], alpha2[lo:hi], qend[lo:hi])
    return PathSamples(float(cfg.horizon), alpha, cfg.horizon - alpha, qend <= cfg.tau,
                       np.zeros(n, dtype=np.int64), alpha_coarse=alpha2 if coupled else None, dt=dt)


def supremum_epoch_sample(mu, sigma2, q, rng=None, n=1, dt=None):
    """Samples of ``(e_q - G, alpha(e_q))`` for Brownian motion with drift ``mu``.

    ``G`` is the epoch of the (first) maximum and ``alpha`` the time spent in
    (-inf, 0], both on the grid of ``ceil(e_q / dt)`` equal steps. Both
    quantities of one replication come from the same path; use different
    seeds for independent samples.
    """
    if not (sigma2 > 0 and q > 0):
        raise InvalidRangeError("sigma2 and q must be positive")
    dt = dt if dt is not None else default_dt(mu, sigma2)
    seed = _seed(SimConfig(), rng)
    n = int(n)
    res, alpha = np.empty(n), np.empty(n)
    fn = _kernel("supremum")
    for lo, hi in _chunks(n):
        fn(seed, lo, hi - lo, float(mu), math.sqrt(sigma2), float(q), float(dt), res[lo:hi], alpha[lo:hi])
    return res, alpha


def free_bm_boundary_atoms(mu, sigma2, t, n=10_000, dt=1e-3, seed=0, x0=0.0):
    """Estimates of P(alpha(t) = t) and P(alpha(t) = 0) for free Brownian motion.

    ``alpha`` is the time X = x0 + mu s + sqrt(sigma2) B(s) spends in
    (-inf, 0]. Each grid path is weighted by the probability that the
    Brownian bridges between its nodes stay on one side of 0, so the
    estimates are unbiased for the continuous-time atoms (a plain count of
    one-sided grid paths is biased upwards by O(sqrt(dt))). Uses numpy
    generators only.
    """
    if not (sigma2 > 0 and t > 0 and dt > 0):
        raise InvalidRangeError("sigma2, t and dt must be positive")
    steps = int(math.ceil(t / dt - 1e-9))
    h = t / steps
    gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    below = above = 0.0
    block = max(1, min(int(n), 4_000_000 // steps))
    done = 0
    while done < n:
        m = min(block, n - done)
        x = x0 + np.cumsum(mu * h + math.sqrt(sigma2 * h) * gen.standard_normal((m, steps)), axis=1)
        x = np.concatenate([np.full((m, 1), float(x0)), x], axis=1)
        prev, nxt = x[:, :-1], x[:, 1:]
        stay = 1.0 - np.exp(-2.0 * np.maximum(prev * nxt, 0.0) / (sigma2 * h))
        w_below = np.prod(np.where((prev <= 0) & (nxt <= 0), stay, 0.0), axis=1)
        w_above = np.prod(np.where((prev > 0) & (nxt > 0), stay, 0.0), axis=1)
        below += w_below.sum()
        above += w_above.sum()
        done += m
    return below / n, above / n


# ---------------------------------------------------------------------------
# empirical distribution tools


def _nonempty(samples):
    s = np.asarray(samples, dtype=float).ravel()
    if s.size == 0:
        raise EmptySampleError("no samples")
    return s


def empirical_cdf(samples, x):
    """Fraction of samples <= x."""
    s = np.sort(_nonempty(samples))
    out = np.searchsorted(s, np.asarray(x, dtype=float), side="right") / s.size
    return out[()] if np.ndim(out) == 0 else out


def ks_statistic(samples, cdf):
    """sup_x |F_n(x) - cdf(x)| for a continuous ``cdf``."""
    return float(stats.kstest(_nonempty(samples), cdf).statistic)


def ks_two_sample(a, b):
    """Two-sample Kolmogorov-Smirnov distance."""
    return float(stats.ks_2samp(_nonempty(a), _nonempty(b)).statistic)


def ks_critical_value(n, m=None, level=0.01):
    """Asymptotic critical value of the KS distance at the given level.

    One-sample when ``m`` is None, two-sample otherwise.
    """
    c = special.kolmogi(level)
    if m is None:
        return float(stats.kstwo.ppf(1 - level, int(n)))
    return float(c * math.sqrt((n + m) / (n * m)))
