"""Lattice evaluation of the exact series for the occupation-time law.

The distribution of beta(t) is a telescoping series in the joint laws of the
partial sums ``X_n = D_1 + ... + D_n`` and ``Y_n = U_1 + ... + U_n``:

    P(beta(t) <= x) = sum_n [P(Y_n <= x, X_n < t - x) - P(Y_n <= x, X_{n+1} < t - x)].

The pair laws are carried on a square lattice and advanced by FFT
convolution. Probabilities ``P(Y <= a, X < b)`` are read off with per-axis
weights: for continuous axes the cumulative lattice mass approximates the
CDF at half-integer nodes and is interpolated linearly (anchored at 0); for
atomic axes the strict/weak inequality is honoured node by node.

Two step sizes are combined by Richardson extrapolation; the series is cut
once the remaining terms are provably below ``tol / 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy import signal

from .errors import GridTooCoarseError

_FUZZ = 1e-9


@dataclass(frozen=True)
class LatticeConfig:
    """Step size and accuracy controls of the series evaluation.

    ``h=None`` selects ``min(E D, E U) / 50``. ``max_refine`` bounds how often
    the step is halved when the error estimate exceeds ``tol``.
    """

    h: float | None = None
    tol: float = 1e-4
    max_refine: int = 2
    max_cells: int = 6_000_000
    max_terms: int = 100_000


@dataclass(frozen=True)
class SeriesResult:
    value: np.ndarray
    error: np.ndarray
    truncation: np.ndarray
    terms: int
    h: float


def axis_weights(points, h, n, atomic, strict):
    """Weights w[p, k] such that P(V (<|<=) points[p]) ~ sum_k w[p,k] m[k]."""
    pts = np.asarray(points, dtype=float)[:, None]
    k = np.arange(n)[None, :]
    pos = pts / h
    if atomic:
        if strict:
            return (k < pos - _FUZZ).astype(float)
        return (k <= pos + _FUZZ).astype(float)
    w = np.clip(pos - k + 0.5, 0.0, 1.0)
    w[:, 0] = np.clip(2.0 * pos[:, 0], 0.0, 1.0)
    return w


class _Convolver:
    """Repeated 2-D convolution with a fixed kernel, cropped to a window."""

    def __init__(self, kernel2d, kernel_x, shape):
        self.shape = shape
        nx, ny = shape
        self.fshape = (sfft.next_fast_len(2 * nx - 1, real=True), sfft.next_fast_len(2 * ny - 1, real=True))
        self.k2 = sfft.rfft2(kernel2d, self.fshape)
        kx = np.zeros((nx, 1))
        kx[:, 0] = kernel_x
        self.kx = sfft.rfft2(kx, self.fshape)

    def step(self, p):
        nx, ny = self.shape
        fp = sfft.rfft2(p, self.fshape)
        shifted = sfft.irfft2(fp * self.kx, self.fshape)[:nx, :ny]
        nxt = sfft.irfft2(fp * self.k2, self.fshape)[:nx, :ny]
        # FFT roundoff can leave tiny negative masses
        return np.maximum(shifted, 0.0), np.maximum(nxt, 0.0)


def _chebyshev_terms(mean_d, var_d, bmax, tol):
    """Smallest n with P(X_n < bmax) <= tol/2 by Chebyshev's inequality."""
    if var_d == 0:
        return int(math.floor(bmax / mean_d)) + 2
    n = max(1, int(math.ceil(bmax / mean_d)) + 1)
    while True:
        gap = n * mean_d - bmax
        if gap > 0 and n * var_d / gap**2 <= tol / 2:
            return n
        n = int(n * 1.25) + 1


def series_sum(law, a_pts, b_pts, h, tol, max_cells=6_000_000, max_terms=100_000):
    """sum_{n>=1} [P(Y_n <= a, X_n < b) - P(Y_n <= a, X_{n+1} < b)] on one lattice.

    Returns (values, truncation bound, number of terms).
    """
    a_pts = np.asarray(a_pts, dtype=float)
    b_pts = np.asarray(b_pts, dtype=float)
    nx = int(math.floor(b_pts.max() / h + _FUZZ)) + 3
    ny = int(math.floor(a_pts.max() / h + _FUZZ)) + 3
    if nx * ny > max_cells:
        raise GridTooCoarseError(f"lattice of {nx}x{ny} cells exceeds max_cells={max_cells}; increase h")
    wx = axis_weights(b_pts, h, nx, law.atomic_D, strict=True)
    wy = axis_weights(a_pts, h, ny, law.atomic_U, strict=False)
    kernel = law.lattice(h, nx, ny)
    kx = law.lattice_D(h, nx)
    conv = _Convolver(kernel, kx, (nx, ny))
    m = law.moments()
    n_cap = min(_chebyshev_terms(m.alpha, m.var_D, b_pts.max(), tol), max_terms)

    def joint(p):
        return np.einsum("pi,ij,pj->p", wx, p, wy)

    total = np.zeros(a_pts.shape)
    p = kernel
    bound = joint(p)
    n = 0
    for n in range(1, n_cap + 1):
        shifted, nxt = conv.step(p)
        total += bound - joint(shifted)
        p = nxt
        bound = joint(p)
        if np.all(bound <= tol / 2):
            break
    return total, np.maximum(bound, 0.0), n


def product_series_sum(law, a_pts, b_pts, h, tol, max_cells=6_000_000, max_terms=100_000):
    """The same series for independent D and U, via one-dimensional convolutions.

    Each term factorises as ``G^(n)(a) [F^(n)(b) - F^(n+1)(b)]``.
    """
    a_pts = np.asarray(a_pts, dtype=float)
    b_pts = np.asarray(b_pts, dtype=float)
    nx = int(math.floor(b_pts.max() / h + _FUZZ)) + 3
    ny = int(math.floor(a_pts.max() / h + _FUZZ)) + 3
    wx = axis_weights(b_pts, h, nx, law.atomic_D, strict=True)
    wy = axis_weights(a_pts, h, ny, law.atomic_U, strict=False)
    md = law.lattice_D(h, nx)
    mu = law.lattice_U(h, ny)
    m = law.moments()
    n_cap = min(_chebyshev_terms(m.alpha, m.var_D, b_pts.max(), tol), max_terms)
    f, g = md, mu
    total = np.zeros(a_pts.shape)
    fb = wx @ f
    bound = (wy @ g) * fb
    n = 0
    for n in range(1, n_cap + 1):
        f_next = np.maximum(signal.fftconvolve(f, md)[:nx], 0.0)
        fb_next = wx @ f_next
        total += (wy @ g) * (fb - fb_next)
        g = np.maximum(signal.fftconvolve(g, mu)[:ny], 0.0)
        f, fb = f_next, fb_next
        bound = (wy @ g) * fb
        if np.all(bound <= tol / 2):
            break
    return total, np.maximum(bound, 0.0), n


def _default_h(law):
    m = law.moments()
    return min(m.alpha, m.beta) / 50.0


def richardson_series(law, a_pts, b_pts, cfg, series=series_sum):
    """Series value with Richardson extrapolation and an error estimate."""
    h = cfg.h if cfg.h is not None else _default_h(law)
    atomic = law.atomic_D or law.atomic_U
    coarse = series(law, a_pts, b_pts, h, cfg.tol, cfg.max_cells, cfg.max_terms)
    last = None
    for _ in range(cfg.max_refine + 1):
        fine = series(law, a_pts, b_pts, h / 2, cfg.tol, cfg.max_cells, cfg.max_terms)
        diff = fine[0] - coarse[0]
        value = fine[0] if atomic else fine[0] + diff / 3
        err = np.abs(diff) / 3 + fine[1]
        last = SeriesResult(value, err, fine[1], fine[2], h / 2)
        if np.all(err <= cfg.tol):
            return last
        h /= 2
        coarse = fine
    raise GridTooCoarseError(
        f"lattice error estimate {float(np.max(last.error)):.2e} exceeds tol={cfg.tol:g} at h={last.h:g}",
        value=last.value, error=last.error)
