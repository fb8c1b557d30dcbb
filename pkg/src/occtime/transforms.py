"""Double transforms of the occupation time and their numerical inversion.

For a sojourn law with transforms ``L1(s) = E e^{-sD}`` and
``L12(s1, s2) = E e^{-s1 D - s2 U}``, the occupation time alpha(t) of A
(process started in A) satisfies

    int_0^inf e^{-qt} E e^{-theta alpha(t)} dt
        = [(1 - L1(q+theta))/(q+theta) + (L1(q+theta) - L12(q+theta, q))/q]
          / (1 - L12(q+theta, q)).

Time-domain quantities are obtained by Euler or Talbot inversion; the
occupation-time CDF uses two nested inversions (in q, then in theta).
"""
from __future__ import annotations

import logging
from dataclasses import replace

import numpy as np

from .errors import DivergentTransformError, InvalidRangeError
from .inversion import DEFAULT_CONFIG, InversionConfig, invert, nodes
from .laws import SojournLaw

__all__ = [
    "InversionConfig", "alpha_double_transform", "availability_at", "availability_transforms",
    "invert", "occupation_cdf_via_inversion",
]

log = logging.getLogger(__name__)


def _out(v):
    v = np.asarray(v)
    if not np.iscomplexobj(v) or np.all(v.imag == 0):
        v = v.real
    return v[()] if v.ndim == 0 else v


def _check_denominator(den, s1, s2):
    # only meaningful on the real axis; complex abscissas are not checked
    if np.isrealobj(s1) and np.isrealobj(s2):
        if np.any(np.asarray(den) <= 0):
            raise DivergentTransformError("L12 >= 1 at a positive argument; the law is not proper")


def alpha_double_transform(law, theta, q):
    """int_0^inf e^{-qt} E e^{-theta alpha(t)} dt for the process started in A.

    ``theta`` and ``q`` broadcast against each other and may be complex
    (``Re q > 0``, ``Re(q + theta) > 0``).
    """
    theta = np.asarray(theta)
    q = np.asarray(q)
    if np.isrealobj(q) and np.any(q <= 0):
        raise InvalidRangeError("q must be positive")
    s = q + theta
    l1 = law.laplace_D(s)
    l12 = law.joint_laplace(s, q)
    den = 1.0 - l12
    _check_denominator(den, theta, q)
    return _out(((1.0 - l1) / s + (l1 - l12) / q) / den)


def availability_transforms(law, q):
    """Transforms of P(X(t) in A) and P(X(t) in B) for the process started in A.

    Returns ``(in_A, in_B)``; they sum to ``1/q``.
    """
    q = np.asarray(q)
    if np.isrealobj(q) and np.any(q <= 0):
        raise InvalidRangeError("q must be positive")
    l1 = law.laplace_D(q)
    l12 = law.joint_laplace(q, q)
    den = 1.0 - l12
    _check_denominator(den, q, q)
    in_a = (1.0 - l1) / (q * den)
    in_b = (l1 - l12) / (q * den)
    return _out(in_a), _out(in_b)


def availability_at(law, t, cfg=None, *, full_output=False):
    """P(X(t) in A | X(0) in A) by inversion of the availability transform."""
    got = invert(lambda q: availability_transforms(law, q)[0], t, cfg, full_output=True)
    value, info = got
    value = np.clip(value, 0.0, 1.0)
    value = value[()] if np.ndim(value) == 0 else value
    return (value, info) if full_output else value


def inner_config(cfg):
    """Configuration of the inner inversion in q.

    At complex theta the function t -> E exp(-theta beta(t)) oscillates, so
    the inner Euler sum needs roughly twice as many terms as the outer one.
    """
    if cfg.algorithm != "euler":
        return cfg
    return replace(cfg, terms=2 * cfg.terms + 19, euler_order=cfg.euler_order + 8)


def _iterated(source, t, y, cfg):
    """P(beta(t) <= y) with beta(t) = t - alpha(t).

    The law of alpha(t) has an atom at t, which would put a jump inside the
    inversion window; beta(t) only has an atom at 0. Its double transform is
    ``source(-theta, q + theta)``.
    """
    theta, wt = nodes(y, cfg)                                   # (ny, K)
    q, wq = nodes(np.asarray(t, dtype=float), inner_config(cfg), two_sided=True)
    th = theta[..., None]
    vals = source(-th, q + th)                                  # (ny, K, 2K-1)
    g = np.sum(wq * vals, axis=-1)                              # E exp(-theta beta(t))
    return np.sum(wt * g / theta, axis=-1).real


def occupation_cdf_via_inversion(source, t, x, cfg=None, *, full_output=False):
    """P(alpha(t) <= x) from a double transform by nested inversion.

    Parameters
    ----------
    source : SojournLaw or callable
        A law (its transform from :func:`alpha_double_transform` is used) or
        ``source(theta, q)`` returning int e^{-qt} E e^{-theta alpha(t)} dt;
        a callable must broadcast and accept complex arguments.
    t : float
    x : float or array_like
        Points in [0, t].
    cfg : InversionConfig, optional
        Outer (theta) inversion; the inner one uses :func:`inner_config`.
    full_output : bool
        Also return ``{"error", "converged"}``.
    """
    cfg = DEFAULT_CONFIG if cfg is None else cfg
    if not t > 0:
        raise InvalidRangeError("t must be positive")
    if isinstance(source, SojournLaw):
        law = source
        source = lambda th, q: alpha_double_transform(law, th, q)  # noqa: E731
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > t):
        raise InvalidRangeError("x must lie in [0, t]")
    flat = np.atleast_1d(x).ravel()
    value = np.ones_like(flat)
    err = np.zeros_like(flat)
    inner = (flat > 0) & (flat < t)
    if np.any(inner):
        y = t - flat[inner]
        fine = _iterated(source, t, y, cfg)
        rough = _iterated(source, t, y, cfg.coarser())
        err[inner] = np.abs(fine - rough)
        value[inner] = 1.0 - fine
    # the process starts in A, so alpha(t) > 0 almost surely
    value[flat == 0] = 0.0
    clipped = np.clip(value, 0.0, 1.0)
    if np.any(clipped != value):
        log.debug("clamped inverted CDF; largest residual %.3g", float(np.max(np.abs(clipped - value))))
    value = clipped.reshape(x.shape)
    err = err.reshape(x.shape)
    converged = bool(np.all(err <= 1000 * cfg.target_abs_tol))
    if x.ndim == 0:
        value, err = float(value[()]), float(err)
    if full_output:
        return value, {"error": err, "converged": converged}
    return value
