"""Acceptance suite shared by ``occtime validate`` and the test-suite.

Each criterion returns a pass flag and a one-line summary with the numbers it
compared. The report contains no timings, so two runs with the same seed
produce identical bytes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from . import __version__
from . import ldp
from .laws import Deterministic, Exponential, Gamma, IndependentProduct, MarshallOlkin, Uniform, erlang
from .levy_scale import Brownian, CompoundPoissonExp, scale_W_qderiv, scale_W_selfconv
from .renewal_core import exact_cdf_alpha, simulate_alternating
from .simulate import (
    SimConfig,
    free_bm_boundary_atoms,
    ks_critical_value,
    ks_statistic,
    ks_two_sample,
    sample_storage_cycles,
    simulate_storage,
    supremum_epoch_sample,
)
from .storage_stats import (
    StorageLaw,
    bm_free_occupation_density,
    driftless_rbm_double_transform,
    free_occupation_double_transform,
    occupation_double_transform,
    rbm_double_transform,
    sojourn_means,
    sojourn_moments,
)
from .transforms import alpha_double_transform, availability_at, availability_transforms, occupation_cdf_via_inversion

__all__ = ["CRITERIA", "DEFAULT_TOLERANCES", "CriterionResult", "Report", "run_suite"]

DEFAULT_SEED = 20240601

DEFAULT_TOLERANCES = {
    "transform_rel": 1e-13,
    "availability_abs": 1e-8,
    "series_vs_inversion": 5e-3,
    "mc_sigmas": 3.0,
    "identity_abs": 1e-8,
    "means_abs": 1e-10,
    "selfconv_abs": 1e-5,
    "otrbm_abs": 1e-10,
    "sparre_andersen_abs": 1e-6,
    "ks_level": 0.01,
    "arcsine_abs": 1e-12,
    "mass_abs": 1e-3,
    "clt_ks": 0.02,
    "ldp_abs": 1e-10,
    "ldp_rel": 0.10,
}

DEFAULT_SIZES = {
    "cdf_paths": 10_000_000,
    "cycles": 10_000_000,
    "sa_samples": 100_000,
    "atom_paths": 20_000,
    "clt_paths": 10_000,
    "ldp_paths": 1_000_000,
}

BATCH = 1_000_000
MM1 = CompoundPoissonExp(0.5, 1.0)
EXP11 = IndependentProduct(Exponential(1.0), Exponential(1.0))


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    summary: str

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.number:2d} {self.name}: {self.summary}"


@dataclass
class Report:
    seed: int
    results: list = field(default_factory=list)

    @property
    def passed(self):
        return all(r.passed for r in self.results)

    def text(self):
        head = f"occtime {__version__} acceptance report, seed {self.seed}"
        n_ok = sum(r.passed for r in self.results)
        lines = [head] + [r.line() for r in self.results]
        lines.append(f"{n_ok}/{len(self.results)} criteria passed")
        return "\n".join(lines) + "\n"


class _Ctx:
    def __init__(self, seed, tolerances, sizes):
        self.seed = int(seed)
        self.tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
        self.size = {**DEFAULT_SIZES, **(sizes or {})}

    def sub_seed(self, k):
        return int(np.random.SeedSequence([self.seed, k]).generate_state(1, np.uint64)[0] >> np.uint64(1))

    def generator(self, *key):
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=key)))


def _g(v):
    return f"{v:.3e}"


# ---------------------------------------------------------------------------
# criteria


def _random_law(rng):
    kind = rng.integers(6)
    r = lambda: float(rng.uniform(0.3, 3.0))
    if kind == 0:
        return IndependentProduct(Exponential(r()), Exponential(r()))
    if kind == 1:
        return IndependentProduct(Gamma(r(), r()), Exponential(r()))
    if kind == 2:
        lo = float(rng.uniform(0.0, 1.0))
        return IndependentProduct(Uniform(lo, lo + r()), Deterministic(r()))
    if kind == 3:
        return IndependentProduct(erlang(int(rng.integers(1, 5)), r()), Gamma(r(), r()))
    if kind == 4:
        return MarshallOlkin(r(), r(), r())
    return IndependentProduct(Deterministic(r()), Uniform(0.0, r()))


def c1_normalization(ctx):
    rng = ctx.generator(1)
    worst_a = worst_b = 0.0
    for _ in range(100):
        law = _random_law(rng)
        q = float(np.exp(rng.uniform(math.log(0.05), math.log(20.0))))
        worst_a = max(worst_a, abs(q * alpha_double_transform(law, 0.0, q) - 1.0))
        in_a, in_b = availability_transforms(law, q)
        worst_b = max(worst_b, abs(q * (in_a + in_b) - 1.0))
    tol = ctx.tol["transform_rel"]
    ok = worst_a <= tol and worst_b <= tol
    return ok, f"max |q A(0,q) - 1| = {_g(worst_a)}, max |q (A+B) - 1| = {_g(worst_b)} (tol {_g(tol)})"


def c2_availability(ctx):
    ts = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0]
    err = max(abs(availability_at(EXP11, t) - (0.5 + 0.5 * math.exp(-2 * t))) for t in ts)
    tol = ctx.tol["availability_abs"]
    return err <= tol, f"max error {_g(err)} over t in {ts} (tol {_g(tol)})"


def c3_cdf_three_ways(ctx):
    times = [0.5, 1.0, 2.0, 4.0]
    fracs = np.array([0.1, 0.3, 0.5, 0.7, 0.9])
    n = int(ctx.size["cdf_paths"])
    src = lambda th, q: alpha_double_transform(EXP11, th, q)
    k = ctx.tol["mc_sigmas"]
    gap = worst_z_s = worst_z_i = 0.0
    for ti, t in enumerate(times):
        xs = t * fracs
        series = exact_cdf_alpha(EXP11, t, xs)
        inv = occupation_cdf_via_inversion(src, t, xs)
        counts = np.zeros(xs.size)
        for b, lo in enumerate(range(0, n, BATCH)):
            m = min(BATCH, n - lo)
            alpha = simulate_alternating(EXP11, t, rng=ctx.generator(3, ti, b), replications=m).alpha_t
            counts += np.count_nonzero(alpha[:, None] <= xs[None, :], axis=0)
        p = counts / n
        se = np.sqrt(np.maximum(p * (1 - p), 1e-300) / n)
        gap = max(gap, float(np.max(np.abs(series - inv))))
        worst_z_s = max(worst_z_s, float(np.max(np.abs(series - p) / se)))
        worst_z_i = max(worst_z_i, float(np.max(np.abs(inv - p) / se)))
    tol = ctx.tol["series_vs_inversion"]
    ok = gap <= tol and worst_z_s <= k and worst_z_i <= k
    return ok, (f"max |series - inversion| = {_g(gap)} (tol {_g(tol)}); max |series - MC|/se = {worst_z_s:.2f}, "
                f"max |inversion - MC|/se = {worst_z_i:.2f} (limit {k:g}, {n} paths, 20 points)")


def c4_identity(ctx):
    tau = 1.0
    law = StorageLaw(MM1, tau)
    grid = [0.1, 0.5, 1.0, 2.0, 5.0]
    th, q = np.meshgrid(grid, grid, indexing="ij")
    a = alpha_double_transform(law, th, q)
    b = occupation_double_transform(MM1, tau, th, q)
    err = float(np.max(np.abs(a - b)))
    tol = ctx.tol["identity_abs"]
    return err <= tol, f"max |renewal transform - storage transform| = {_g(err)} on 5x5 grid (tol {_g(tol)})"


def _cycle_stats(model, tau, n, seed):
    """Sample moments and standard errors from ``n`` cycles, in batches."""
    # first pass: means
    s = np.zeros(2)
    for lo in range(0, n, BATCH):
        c = sample_storage_cycles(model, tau, min(BATCH, n - lo), seed=seed, first=lo)
        s += c.d.sum(), c.u.sum()
    md, mu = s / n
    # second pass: central moments
    acc = np.zeros(6)
    for lo in range(0, n, BATCH):
        c = sample_storage_cycles(model, tau, min(BATCH, n - lo), seed=seed, first=lo)
        x, y = c.d - md, c.u - mu
        acc += [np.sum(x * x), np.sum(y * y), np.sum(x * y), np.sum(x**4), np.sum(y**4),
                np.sum((x * y) ** 2)]
    vd, vu, cv, m4d, m4u, mxy2 = acc / n
    est = np.array([md, mu, vd, vu, cv])
    se = np.sqrt(np.array([vd, vu, m4d - vd**2, m4u - vu**2, mxy2 - cv**2]) / n)
    return est, se


def c5_moments(ctx):
    tau = 1.0
    ed, eu = sojourn_means(MM1, tau)
    # M/M/1 workload: P(Q <= tau) = 1 - rho exp(-(mu_J - lam) tau) is the long-run fraction ED/(ED+EU)
    eu_exact = 1.0 / (MM1.mu_j * (1 - MM1.lam / MM1.mu_j))
    p = 1 - (MM1.lam / MM1.mu_j) * math.exp(-(MM1.mu_j - MM1.lam) * tau)
    ed_exact = eu_exact * p / (1 - p)
    mean_err = max(abs(ed - ed_exact), abs(eu - eu_exact))
    m = sojourn_moments(MM1, tau)
    closed = np.array([m.alpha, m.beta, m.var_D, m.var_U, m.cov_DU])
    n = int(ctx.size["cycles"])
    est, se = _cycle_stats(MM1, tau, n, ctx.sub_seed(5))
    z = np.abs(est - closed) / se
    k = ctx.tol["mc_sigmas"]
    ok = mean_err <= ctx.tol["means_abs"] and bool(np.all(z <= k))
    zs = ", ".join(f"{v:.2f}" for v in z)
    return ok, (f"ED = {ed:.5f}, EU = {eu:.5f} (closed form error {_g(mean_err)}); "
                f"|closed - MC|/se for (ED, EU, var D, var U, cov) = ({zs}) (limit {k:g}, {n} cycles)")


def c6_selfconv(ctx):
    qs = np.linspace(0.0, 2.0, 10)
    xs = np.linspace(0.25, 3.0, 10)
    worst = {}
    for name, model in (("cp_exp_drift", MM1), ("brownian", Brownian(-1.0, 1.0))):
        err = 0.0
        for q in qs:
            lhs = np.array([scale_W_qderiv(model, q, x) for x in xs])
            rhs = scale_W_selfconv(model, q, xs)
            err = max(err, float(np.max(np.abs(lhs - rhs))))
        worst[name] = err
    tol = ctx.tol["selfconv_abs"]
    ok = all(v <= tol for v in worst.values())
    body = ", ".join(f"{k} {_g(v)}" for k, v in worst.items())
    return ok, f"max |d/dq W - W*W| on 10x10 grid: {body} (tol {_g(tol)})"


def c7_brownian(ctx):
    err = 0.0
    for mu in (-2.0, -1.0, -0.3):
        for s2 in (0.5, 1.0, 2.0):
            model = Brownian(mu, s2)
            for tau in (0.25, 1.0, 3.0):
                for theta in (0.2, 1.0, 4.0):
                    a = occupation_double_transform(model, tau, theta, 1.0)
                    b = rbm_double_transform(mu, s2, tau, theta, 1.0)
                    err = max(err, abs(a - b))
    bs_err = max(abs(rbm_double_transform(0.0, 1.0, tau, th, q) - driftless_rbm_double_transform(tau, th, q))
                 for tau in (0.5, 2.0) for th in (0.5, 2.0) for q in (0.5, 1.0))
    tol = ctx.tol["otrbm_abs"]
    ok = err <= tol and bs_err <= tol
    return ok, (f"max |storage formula - reflected BM formula| = {_g(err)} on 3x3x3x3 grid (mu, sigma2, tau, theta); "
                f"mu=0, sigma2=1 flagged Borodin-Salminen case, deviation {_g(bs_err)} (tol {_g(tol)})")


def c8_sparre_andersen(ctx):
    limit = occupation_double_transform(MM1, 200.0, 1.0, 1.0)
    free = free_occupation_double_transform(MM1, 1.0, 1.0)
    err = abs(limit - free)
    n = int(ctx.size["sa_samples"])
    res, _ = supremum_epoch_sample(0.0, 1.0, 1.0, rng=ctx.sub_seed(81), n=n, dt=1e-2)
    _, alpha = supremum_epoch_sample(0.0, 1.0, 1.0, rng=ctx.sub_seed(82), n=n, dt=1e-2)
    ks = ks_two_sample(res, alpha)
    crit = ks_critical_value(n, n, ctx.tol["ks_level"])
    ok = err <= ctx.tol["sparre_andersen_abs"] and ks < crit
    return ok, (f"|tau=200 transform - free transform| = {_g(err)} (tol {_g(ctx.tol['sparre_andersen_abs'])}); "
                f"two-sample KS {ks:.5f} vs critical {crit:.5f} ({n} each)")


def c9_density(ctx):
    arc = bm_free_occupation_density(0.0, 1.0, 0.5)
    arc_err = abs(arc - 2 / math.pi)
    f = lambda u: float(bm_free_occupation_density(-1.0, 1.0, u))
    mass = integrate.quad(f, 0.0, 1.0, points=[0.5], limit=200, epsabs=1e-12, epsrel=1e-12)[0]
    p0, p1 = free_bm_boundary_atoms(-1.0, 1.0, 1.0, n=int(ctx.size["atom_paths"]), dt=1e-3, seed=ctx.sub_seed(9))
    total = mass + p0 + p1
    ok = arc_err <= ctx.tol["arcsine_abs"] and abs(total - 1) <= ctx.tol["mass_abs"]
    return ok, (f"density(mu=0, t=1, u=1/2) - 2/pi = {_g(arc_err)}; mu=-1: integral {mass:.8f} + atoms "
                f"({p0:.2e}, {p1:.2e}) = {total:.8f} (tol {_g(ctx.tol['mass_abs'])})")


def c10_clt(ctx):
    t = 2000.0
    n = int(ctx.size["clt_paths"])
    m = EXP11.moments()
    a = simulate_alternating(EXP11, t, rng=ctx.sub_seed(101), replications=n).alpha_t
    ks_a = ks_statistic((a - m.mean_fraction * t) / math.sqrt(m.clt_scale * t), stats.norm.cdf)
    ms = sojourn_moments(MM1, 1.0)
    paths, _ = simulate_storage(MM1, SimConfig(seed=ctx.sub_seed(102), replications=n, horizon=t, tau=1.0))
    z = (paths.alpha_t - ms.mean_fraction * t) / math.sqrt(ms.clt_scale * t)
    ks_b = ks_statistic(z, stats.norm.cdf)
    tol = ctx.tol["clt_ks"]
    return ks_a <= tol and ks_b <= tol, (
        f"KS vs normal: Exp(1)xExp(1) (C = {m.clt_scale:.4f}) {ks_a:.5f}, "
        f"M/M/1 storage (C = {ms.clt_scale:.5f}) {ks_b:.5f} (tol {tol:g}, {n} paths, t = {t:g})")


def c11_ldp(ctx):
    d2 = ldp.drain_rate(EXP11, 2.0)
    l2 = ldp.cumulant(EXP11, 2.0)
    closed_err = max(abs(d2 - 1 / math.sqrt(2)), abs(l2 - math.sqrt(2)))
    t, frac = 500.0, 0.7
    rate = ldp.rate_function(EXP11, frac)
    est = ldp.tail_probability_estimate(EXP11, frac, t, n=int(ctx.size["ldp_paths"]), seed=ctx.sub_seed(11))
    sim_rate = -est.log_value / t
    rel = abs(sim_rate - rate) / rate
    ok = closed_err <= ctx.tol["ldp_abs"] and rel <= ctx.tol["ldp_rel"]
    return ok, (f"d(2), lambda(2) error {_g(closed_err)}; -(1/t) log P = {sim_rate:.5f} "
                f"(log P = {est.log_value:.3f}, rel se {est.rel_se:.1e}, tilted, {est.n} paths) vs "
                f"rate {rate:.5f}, relative gap {rel:.4f} (tol {ctx.tol['ldp_rel']:g})")


CRITERIA = {
    1: ("transform normalization", c1_normalization),
    2: ("availability inversion", c2_availability),
    3: ("series vs inversion vs simulation", c3_cdf_three_ways),
    4: ("renewal/storage transform identity", c4_identity),
    5: ("cycle moments", c5_moments),
    6: ("q-derivative of W", c6_selfconv),
    7: ("reflected Brownian closed form", c7_brownian),
    8: ("Sparre Andersen limit", c8_sparre_andersen),
    9: ("free Brownian density", c9_density),
    10: ("central limit theorem", c10_clt),
    11: ("large deviations", c11_ldp),
    12: ("reproducibility", None),
}


def run_criterion(number, seed=DEFAULT_SEED, tolerances=None, sizes=None):
    name, fn = CRITERIA[number]
    ctx = _Ctx(seed, tolerances, sizes)
    ok, summary = fn(ctx)
    return CriterionResult(number, name, bool(ok), summary)


def run_suite(seed=DEFAULT_SEED, criteria=None, tolerances=None, sizes=None, progress=None):
    """Run the selected criteria (all by default) and return a :class:`Report`.

    Criterion 12 reruns every other selected criterion with the same seed and
    requires byte-identical report lines.
    """
    chosen = sorted(CRITERIA) if criteria is None else sorted(set(int(c) for c in criteria))
    bad = [c for c in chosen if c not in CRITERIA]
    if bad:
        raise ValueError(f"unknown criteria {bad}")
    report = Report(int(seed))
    for c in chosen:
        if c == 12:
            continue
        res = run_criterion(c, seed, tolerances, sizes)
        report.results.append(res)
        if progress:
            progress(res)
    if 12 in chosen:
        first = [r.line() for r in report.results]
        again = [run_criterion(r.number, seed, tolerances, sizes).line() for r in report.results]
        same = first == again
        diff = sum(a != b for a, b in zip(first, again))
        res = CriterionResult(12, CRITERIA[12][0], same,
                              f"second run of {len(first)} criteria with seed {seed}: "
                              f"{'byte-identical' if same else f'{diff} lines differ'}")
        report.results.append(res)
        if progress:
            progress(res)
    return report
