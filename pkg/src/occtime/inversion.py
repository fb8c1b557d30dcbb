"""Numerical inversion of Laplace transforms.

Two fixed-parameter algorithms are provided. Euler summation uses the
Bromwich integral discretised by the trapezoidal rule, with Euler
(binomial) averaging of the tail of the resulting alternating series.
Fixed Talbot deforms the contour into the left half plane.

Both work on vectorised transform evaluators: ``fhat`` receives a complex
array of abscissas and must return an array of the same shape.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import comb

from .errors import InversionAccuracyWarning

_ALGORITHMS = ("euler", "talbot")


@dataclass(frozen=True)
class InversionConfig:
    """Parameters of the numerical inversion.

    Attributes
    ----------
    algorithm : {"euler", "talbot"}
    terms : int
        Number of transform evaluations (Euler: ``n + m + 1``; Talbot: ``M``).
    euler_order : int
        Order ``m`` of the binomial averaging. The burn-in is ``terms - m - 1``.
    target_abs_tol : float
        Absolute accuracy aimed for; sets the Euler discretisation parameter.
    contour_scale : float
        Multiplier of the fixed Talbot contour radius.
    """

    algorithm: str = "euler"
    terms: int = 41
    euler_order: int = 12
    target_abs_tol: float = 1e-8
    contour_scale: float = 1.0

    def __post_init__(self):
        if self.algorithm not in _ALGORITHMS:
            raise ValueError(f"algorithm must be one of {_ALGORITHMS}")
        if self.terms < 10:
            raise ValueError("terms must be at least 10")
        if not self.target_abs_tol > 0:
            raise ValueError("target_abs_tol must be positive")
        if self.algorithm == "euler" and not 0 <= self.euler_order < self.terms - 1:
            raise ValueError("euler_order must be smaller than terms - 1")
        if not self.contour_scale > 0:
            raise ValueError("contour_scale must be positive")

    @property
    def euler_a(self):
        # aliasing error is about exp(-A); 6.6 absorbs roundoff growth at 1e-8
        return -math.log(self.target_abs_tol) + 6.6

    def coarser(self):
        """A cheaper companion configuration used for error estimation."""
        if self.algorithm == "euler":
            return InversionConfig("euler", self.terms - 4, max(self.euler_order - 2, 0),
                                   self.target_abs_tol * 10, self.contour_scale)
        return InversionConfig("talbot", max(self.terms - 8, 10), 0,
                               self.target_abs_tol, self.contour_scale)


DEFAULT_CONFIG = InversionConfig()


@lru_cache(maxsize=32)
def _euler_weights(terms, order):
    n = terms - order - 1
    k = np.arange(terms)
    w = np.where(k % 2 == 0, 1.0, -1.0)
    w[0] = 0.5
    binom = np.array([comb(order, j, exact=True) for j in range(order + 1)], dtype=float)
    binom /= 2.0**order
    tail = np.cumsum(binom[::-1])[::-1]
    for kk in range(n + 1, terms):
        w[kk] *= tail[kk - n]
    w.setflags(write=False)
    return w


def nodes(t, cfg=DEFAULT_CONFIG, two_sided=False):
    """Abscissas and weights so that ``f(t) ~ sum(weights * fhat(nodes))``.

    The returned weights are complex; the caller takes the real part of the
    weighted sum for real originals. With ``two_sided=True`` the nodes cover
    both halves of the contour, which is needed when the original function is
    complex valued.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("inversion point must be positive")
    t = t[..., None]
    if cfg.algorithm == "euler":
        a = cfg.euler_a
        w = _euler_weights(cfg.terms, cfg.euler_order)
        k = np.arange(cfg.terms)
        s = (a + 2j * np.pi * k) / (2 * t)
        wt = np.exp(a / 2) / t * w
        if not two_sided:
            return s, wt.astype(complex)
        s2 = np.concatenate([s, np.conj(s[..., 1:])], axis=-1)
        wt2 = np.concatenate([wt / 2, wt[..., 1:] / 2], axis=-1)
        wt2[..., 0] = wt[..., 0]
        return s2, wt2.astype(complex)
    m = cfg.terms
    r = 2.0 * m / (5.0 * t) * cfg.contour_scale
    th = np.arange(1, m) * np.pi / m
    cot = 1.0 / np.tan(th)
    s = np.concatenate([r + 0j * th[:1], r * th * (cot + 1j)], axis=-1)
    sigma = th + (th * cot - 1.0) * cot
    w = np.concatenate([0.5 * np.ones_like(r), (1.0 + 1j * sigma) * np.ones_like(r)], axis=-1)
    w = w * np.exp(t * s) * r / m
    if not two_sided:
        return s, w
    s2 = np.concatenate([s, np.conj(s[..., 1:])], axis=-1)
    w2 = np.concatenate([w[..., :1], w[..., 1:] / 2, np.conj(w[..., 1:]) / 2], axis=-1)
    return s2, w2


def _invert_once(fhat, t, cfg, real):
    s, w = nodes(t, cfg, two_sided=not real)
    vals = np.asarray(fhat(s), dtype=complex)
    out = np.sum(w * vals, axis=-1)
    return out.real if real else out


def invert(fhat, t, cfg=None, *, real=True, full_output=False):
    """Invert a Laplace transform at time(s) ``t``.

    Parameters
    ----------
    fhat : callable
        Vectorised transform, evaluated at complex abscissas.
    t : float or array_like
        Positive inversion points.
    cfg : InversionConfig, optional
    real : bool
        Whether the original function is real valued. Complex originals use
        the two-sided contour.
    full_output : bool
        If true, also return a dict with the error estimate and a
        ``converged`` flag.

    Returns
    -------
    value : float or ndarray
    info : dict, only when ``full_output`` is true
    """
    cfg = DEFAULT_CONFIG if cfg is None else cfg
    value = _invert_once(fhat, t, cfg, real)
    rough = _invert_once(fhat, t, cfg.coarser(), real)
    err = np.abs(value - rough)
    finite = np.all(np.isfinite(value))
    # the coarse companion is about ten times less accurate, so its distance
    # from the main estimate overstates the error of the latter
    converged = bool(finite and np.all(err <= 100 * cfg.target_abs_tol))
    if not converged:
        warnings.warn(f"Laplace inversion error estimate {np.max(err):.3g} exceeds target "
                      f"{cfg.target_abs_tol:.3g}", InversionAccuracyWarning, stacklevel=2)
    if np.ndim(value) == 0:
        value = value[()]
        err = float(err)
    if full_output:
        return value, {"error": err, "converged": converged}
    return value
