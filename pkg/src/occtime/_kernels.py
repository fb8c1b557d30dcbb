"""Monte Carlo kernels in two flavours: numba loops and numpy lockstep.

Every replication owns a counter-based stream: the k-th uniform of stream
``s`` under ``seed`` is a SplitMix64 hash of ``(seed, tag, s, k)``. Results
therefore depend only on the seed and the replication index, never on
chunking or scheduling. The numpy kernels consume the uniforms of each
replication in the same order as the compiled loops, so both backends
simulate the same paths; they may differ in the last bits because the two
use different implementations of ``log`` and ``cos``.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import njit

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
M1 = np.uint64(0xBF58476D1CE4E5B9)
M2 = np.uint64(0x94D049BB133111EB)
TAG_MUL = np.uint64(0xD6E8FEB86659FD93)
S30 = np.uint64(30)
S27 = np.uint64(27)
S31 = np.uint64(31)
S11 = np.uint64(11)
ONE = np.uint64(1)
INV53 = 1.0 / 9007199254740992.0
TWO_PI = 2.0 * math.pi

# stream tags keep the kernels' streams apart
TAG_STORAGE_CYCLES = 1
TAG_STORAGE_PATHS = 2
TAG_RBM = 3
TAG_SUPREMUM = 4


# ---------------------------------------------------------------------------
# counter-based uniforms


@njit(cache=True)
def _mix(z):
    z = z + GOLDEN
    z = (z ^ (z >> S30)) * M1
    z = (z ^ (z >> S27)) * M2
    return z ^ (z >> S31)


@njit(cache=True)
def stream_key(seed, tag, stream):
    base = _mix(np.uint64(seed) ^ (np.uint64(tag) * TAG_MUL))
    return _mix(base ^ (np.uint64(stream) * GOLDEN))


@njit(cache=True)
def uniform(key, ctr):
    """Uniform on (0, 1] (never 0, so that -log is finite)."""
    z = _mix(key + (np.uint64(ctr) + ONE) * GOLDEN)
    return float((z >> S11) + ONE) * INV53


def _mix_np(z):
    with np.errstate(over="ignore"):
        z = z + GOLDEN
        z = (z ^ (z >> S30)) * M1
        z = (z ^ (z >> S27)) * M2
    return z ^ (z >> S31)


def stream_keys_np(seed, tag, streams):
    with np.errstate(over="ignore"):
        base = _mix_np(np.uint64(seed) ^ (np.uint64(tag) * TAG_MUL))
        return _mix_np(base ^ (np.asarray(streams, dtype=np.uint64) * GOLDEN))


def uniform_np(keys, ctr):
    with np.errstate(over="ignore"):
        z = _mix_np(keys + (np.asarray(ctr, dtype=np.uint64) + ONE) * GOLDEN)
    return ((z >> S11) + ONE).astype(np.float64) * INV53


# ---------------------------------------------------------------------------
# phase-type jumps
#
# a_cum: cumulative initial law; p_cum[i, :m] cumulative moves out of phase i
# with absorption as the final column; rates: total exit rate of each phase.
# A single phase uses exactly one uniform per jump.


@njit(cache=True)
def _first_at_least(cum, u):
    for i in range(cum.shape[0]):
        if u <= cum[i]:
            return i
    return cum.shape[0] - 1


@njit(cache=True)
def _draw_jump(key, ctr, a_cum, p_cum, rates):
    m = rates.shape[0]
    if m == 1:
        return -math.log(uniform(key, ctr)) / rates[0], ctr + 1
    i = _first_at_least(a_cum, uniform(key, ctr))
    ctr += 1
    j = 0.0
    while True:
        j += -math.log(uniform(key, ctr)) / rates[i]
        nxt = _first_at_least(p_cum[i], uniform(key, ctr + 1))
        ctr += 2
        if nxt == m:
            return j, ctr
        i = nxt


def _draw_jump_np(keys, ctr, a_cum, p_cum, rates):
    """Vectorised twin of ``_draw_jump``; updates ``ctr`` in place."""
    m = rates.shape[0]
    if m == 1:
        out = -np.log(uniform_np(keys, ctr)) / rates[0]
        ctr += 1
        return out
    n = keys.shape[0]
    phase = np.minimum(np.searchsorted(a_cum, uniform_np(keys, ctr), side="left"), m - 1)
    ctr += 1
    out = np.zeros(n)
    live = np.arange(n)
    while live.size:
        k, c = keys[live], ctr[live]
        ph = phase[live]
        out[live] += -np.log(uniform_np(k, c)) / rates[ph]
        u = uniform_np(k, c + 1)
        ctr[live] += 2
        rows = p_cum[ph]
        nxt = np.minimum((rows < u[:, None]).sum(axis=1), m)
        phase[live] = np.minimum(nxt, m - 1)
        live = live[nxt < m]
    return out


# ---------------------------------------------------------------------------
# storage cycles: each cycle starts at level tau with its own stream


@njit(cache=True)
def storage_cycles_nb(seed, first, n, lam, tau, a_cum, p_cum, rates, d_out, u_out, o_out):
    for i in range(n):
        key = stream_key(seed, TAG_STORAGE_CYCLES, first + i)
        ctr = 0
        q = tau
        d = 0.0
        while True:
            e = -math.log(uniform(key, ctr)) / lam
            ctr += 1
            d += e
            q = max(q - e, 0.0)
            j, ctr = _draw_jump(key, ctr, a_cum, p_cum, rates)
            q += j
            if q > tau:
                break
        over = q - tau
        u = 0.0
        while True:
            e = -math.log(uniform(key, ctr)) / lam
            ctr += 1
            if e >= q - tau:
                u += q - tau
                break
            u += e
            q -= e
            j, ctr = _draw_jump(key, ctr, a_cum, p_cum, rates)
            q += j
        d_out[i] = d
        u_out[i] = u
        o_out[i] = over


def storage_cycles_np(seed, first, n, lam, tau, a_cum, p_cum, rates, d_out, u_out, o_out):
    keys = stream_keys_np(seed, TAG_STORAGE_CYCLES, np.arange(first, first + n))
    ctr = np.zeros(n, dtype=np.uint64)
    q = np.full(n, float(tau))
    d = np.zeros(n)
    live = np.arange(n)
    while live.size:
        e = -np.log(uniform_np(keys[live], ctr[live])) / lam
        ctr[live] += 1
        d[live] += e
        q[live] = np.maximum(q[live] - e, 0.0)
        c = ctr[live]
        q[live] += _draw_jump_np(keys[live], c, a_cum, p_cum, rates)
        ctr[live] = c
        live = live[q[live] <= tau]
    over = q - tau
    u = np.zeros(n)
    live = np.arange(n)
    while live.size:
        e = -np.log(uniform_np(keys[live], ctr[live])) / lam
        ctr[live] += 1
        gap = q[live] - tau
        down = e >= gap
        u[live[down]] += gap[down]
        cont = live[~down]
        ec = e[~down]
        u[cont] += ec
        q[cont] -= ec
        c = ctr[cont]
        q[cont] += _draw_jump_np(keys[cont], c, a_cum, p_cum, rates)
        ctr[cont] = c
        live = cont
    d_out[:] = d
    u_out[:] = u
    o_out[:] = over


# ---------------------------------------------------------------------------
# storage paths on [0, horizon], started at tau
#
# One iteration per inter-jump time: in A the level drains (reflected at 0);
# in B it drains until it either meets tau (downcrossing, the rest of the
# exponential clock is discarded, which is exact by memorylessness) or the
# next jump arrives.


@njit(cache=True)
def storage_paths_nb(seed, first, n, lam, tau, horizon, a_cum, p_cum, rates,
                     alpha_out, in_a_out, ncyc_out, cyc_d, cyc_u, cyc_o):
    cap = cyc_d.shape[0]
    for i in range(n):
        key = stream_key(seed, TAG_STORAGE_PATHS, first + i)
        ctr = 0
        t = 0.0
        q = tau
        in_a = True
        alpha = 0.0
        start = 0.0
        up = 0.0
        over = 0.0
        k = 0
        while True:
            e = -math.log(uniform(key, ctr)) / lam
            ctr += 1
            if in_a:
                if t + e >= horizon:
                    alpha += horizon - t
                    break
                alpha += e
                t += e
                q = max(q - e, 0.0)
                j, ctr = _draw_jump(key, ctr, a_cum, p_cum, rates)
                q += j
                if q > tau:
                    in_a = False
                    up = t
                    over = q - tau
            else:
                gap = q - tau
                if e >= gap:
                    if t + gap >= horizon:
                        break
                    t += gap
                    q = tau
                    in_a = True
                    if i == 0 and k < cap:
                        cyc_d[k] = up - start
                        cyc_u[k] = t - up
                        cyc_o[k] = over
                    k += 1
                    start = t
                else:
                    if t + e >= horizon:
                        break
                    t += e
                    q -= e
                    j, ctr = _draw_jump(key, ctr, a_cum, p_cum, rates)
                    q += j
        alpha_out[i] = alpha
        in_a_out[i] = in_a
        ncyc_out[i] = k


def storage_paths_np(seed, first, n, lam, tau, horizon, a_cum, p_cum, rates,
                     alpha_out, in_a_out, ncyc_out, cyc_d, cyc_u, cyc_o):
    cap = cyc_d.shape[0]
    keys = stream_keys_np(seed, TAG_STORAGE_PATHS, np.arange(first, first + n))
    ctr = np.zeros(n, dtype=np.uint64)
    t = np.zeros(n)
    q = np.full(n, float(tau))
    in_a = np.ones(n, dtype=bool)
    alpha = np.zeros(n)
    start = np.zeros(n)
    up = np.zeros(n)
    over = np.zeros(n)
    k = np.zeros(n, dtype=np.int64)
    live = np.arange(n)
    while live.size:
        e = -np.log(uniform_np(keys[live], ctr[live])) / lam
        ctr[live] += 1
        done = np.zeros(live.size, dtype=bool)

        ia = in_a[live]
        # in A
        la = live[ia]
        ea = e[ia]
        end = t[la] + ea >= horizon
        alpha[la[end]] += horizon - t[la[end]]
        done[np.flatnonzero(ia)[end]] = True
        go = la[~end]
        eg = ea[~end]
        alpha[go] += eg
        t[go] += eg
        q[go] = np.maximum(q[go] - eg, 0.0)
        c = ctr[go]
        q[go] += _draw_jump_np(keys[go], c, a_cum, p_cum, rates)
        ctr[go] = c
        upx = go[q[go] > tau]
        in_a[upx] = False
        up[upx] = t[upx]
        over[upx] = q[upx] - tau

        # in B
        ib = np.flatnonzero(~ia)
        lb = live[ib]
        eb = e[ib]
        gap = q[lb] - tau
        down = eb >= gap
        fin = np.where(down, t[lb] + gap >= horizon, t[lb] + eb >= horizon)
        done[ib[fin]] = True
        dn = lb[down & ~fin]
        t[dn] += gap[down & ~fin]
        q[dn] = tau
        in_a[dn] = True
        if cap and dn.size and dn[0] == 0 and k[0] < cap:
            cyc_d[k[0]] = up[0] - start[0]
            cyc_u[k[0]] = t[0] - up[0]
            cyc_o[k[0]] = over[0]
        k[dn] += 1
        start[dn] = t[dn]
        jb = lb[~down & ~fin]
        ej = eb[~down & ~fin]
        t[jb] += ej
        q[jb] -= ej
        c = ctr[jb]
        q[jb] += _draw_jump_np(keys[jb], c, a_cum, p_cum, rates)
        ctr[jb] = c
        live = live[~done]
    alpha_out[:] = alpha
    in_a_out[:] = in_a
    ncyc_out[:] = k


# ---------------------------------------------------------------------------
# Gaussian increments (Box-Muller, pairs from consecutive uniforms)


@njit(cache=True)
def _normal_pair(key, ctr):
    r = math.sqrt(-2.0 * math.log(uniform(key, ctr)))
    a = TWO_PI * uniform(key, ctr + 1)
    return r * math.cos(a), r * math.sin(a)


def _normal_pair_np(keys, ctr):
    r = np.sqrt(-2.0 * np.log(uniform_np(keys, ctr)))
    a = TWO_PI * uniform_np(keys, ctr + np.uint64(1))
    return r * np.cos(a), r * np.sin(a)


@njit(cache=True)
def _below_fraction(q0, q1, tau):
    """Fraction of the linear segment q0 -> q1 spent in [0, tau]."""
    if q0 <= tau and q1 <= tau:
        return 1.0
    if q0 > tau and q1 > tau:
        return 0.0
    if q0 <= tau:
        return (tau - q0) / (q1 - q0)
    return (tau - q1) / (q0 - q1)


def _below_fraction_np(q0, q1, tau):
    lo0 = q0 <= tau
    lo1 = q1 <= tau
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(lo0, (tau - q0) / (q1 - q0), (tau - q1) / (q0 - q1))
    return np.where(lo0 & lo1, 1.0, np.where(~lo0 & ~lo1, 0.0, frac))


# ---------------------------------------------------------------------------
# reflected Brownian motion, Euler scheme with max(., 0)
#
# With ``coupled`` the same increments, summed in pairs, also drive a path
# on the doubled step; its occupation is returned in ``alpha2_out``.


@njit(cache=True)
def rbm_nb(seed, first, n, mu, sigma, tau, dt, nsteps, coupled, alpha_out, alpha2_out, q_out):
    sdt = sigma * math.sqrt(dt)
    for i in range(n):
        key = stream_key(seed, TAG_RBM, first + i)
        ctr = 0
        q = tau
        q2 = tau
        a = 0.0
        a2 = 0.0
        pend = 0.0
        z2 = 0.0
        for k in range(nsteps):
            if k % 2 == 0:
                z, z2 = _normal_pair(key, ctr)
                ctr += 2
            else:
                z = z2
            dx = mu * dt + sdt * z
            qn = max(q + dx, 0.0)
            a += dt * _below_fraction(q, qn, tau)
            q = qn
            if coupled:
                pend += dx
                if k % 2 == 1:
                    qn2 = max(q2 + pend, 0.0)
                    a2 += 2.0 * dt * _below_fraction(q2, qn2, tau)
                    q2 = qn2
                    pend = 0.0
        alpha_out[i] = a
        alpha2_out[i] = a2
        q_out[i] = q


def rbm_np(seed, first, n, mu, sigma, tau, dt, nsteps, coupled, alpha_out, alpha2_out, q_out):
    sdt = sigma * math.sqrt(dt)
    keys = stream_keys_np(seed, TAG_RBM, np.arange(first, first + n))
    q = np.full(n, float(tau))
    q2 = q.copy()
    a = np.zeros(n)
    a2 = np.zeros(n)
    pend = np.zeros(n)
    z2 = None
    for k in range(nsteps):
        if k % 2 == 0:
            ctr = np.full(n, k, dtype=np.uint64)
            z, z2 = _normal_pair_np(keys, ctr)
        else:
            z = z2
        dx = mu * dt + sdt * z
        qn = np.maximum(q + dx, 0.0)
        a += dt * _below_fraction_np(q, qn, tau)
        q = qn
        if coupled:
            pend += dx
            if k % 2 == 1:
                qn2 = np.maximum(q2 + pend, 0.0)
                a2 += 2.0 * dt * _below_fraction_np(q2, qn2, tau)
                q2 = qn2
                pend[:] = 0.0
    alpha_out[:] = a
    alpha2_out[:] = a2
    q_out[:] = q


# ---------------------------------------------------------------------------
# free Brownian motion on [0, e_q]
#
# The horizon e_q is split into N = ceil(e_q / dt) equal steps. For the
# resulting random walk the index of the first maximum and the number of
# nonpositive partial sums satisfy the discrete Sparre Andersen identity, so
# the two returned quantities have the same law for every dt.


@njit(cache=True)
def supremum_nb(seed, first, n, mu, sigma, q, dt, res_out, alpha_out):
    for i in range(n):
        key = stream_key(seed, TAG_SUPREMUM, first + i)
        e = -math.log(uniform(key, 0)) / q
        nsteps = max(1, int(math.ceil(e / dt)))
        h = e / nsteps
        sh = sigma * math.sqrt(h)
        ctr = 1
        s = 0.0
        best = 0.0
        arg = 0
        cnt = 0
        z2 = 0.0
        for k in range(nsteps):
            if k % 2 == 0:
                z, z2 = _normal_pair(key, ctr)
                ctr += 2
            else:
                z = z2
            s += mu * h + sh * z
            if s > best:
                best = s
                arg = k + 1
            if s <= 0.0:
                cnt += 1
        res_out[i] = h * (nsteps - arg)
        alpha_out[i] = h * cnt


def supremum_np(seed, first, n, mu, sigma, q, dt, res_out, alpha_out):
    keys = stream_keys_np(seed, TAG_SUPREMUM, np.arange(first, first + n))
    e = -np.log(uniform_np(keys, np.zeros(n, dtype=np.uint64))) / q
    nsteps = np.maximum(1, np.ceil(e / dt)).astype(np.int64)
    h = e / nsteps
    sh = sigma * np.sqrt(h)
    s = np.zeros(n)
    best = np.zeros(n)
    arg = np.zeros(n, dtype=np.int64)
    cnt = np.zeros(n, dtype=np.int64)
    order = np.argsort(-nsteps, kind="stable")
    z2 = None
    for k in range(int(nsteps.max())):
        # paths sorted by length, so the live ones form a prefix
        m = int(np.searchsorted(-nsteps[order], -k, side="left"))
        live = order[:m]
        if k % 2 == 0:
            z, z2 = _normal_pair_np(keys[live], np.full(live.size, 1 + k, dtype=np.uint64))
        else:
            # the live set at an odd step is a prefix of the one before it
            z = z2[: live.size]
        s[live] += mu * h[live] + sh[live] * z
        better = s[live] > best[live]
        best[live[better]] = s[live[better]]
        arg[live[better]] = k + 1
        cnt[live] += s[live] <= 0.0
    res_out[:] = h * (nsteps - arg)
    alpha_out[:] = h * cnt
