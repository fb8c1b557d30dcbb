"""Command-line front end: ``occtime <command> --config run.yaml``.

Commands
--------
transform  double transform of the occupation time on a (theta, q) grid
dist       CDF of alpha(t): exact series, inversion, normal approximation, simulation
clt        moment summary and CLT constant
ldp        rate function table
simulate   one row per simulated path
validate   acceptance suite

Exit status is 0 on success, 2 when validation fails and 1 on any error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import platform
import sys

import numpy as np
import scipy
from scipy import stats

from . import __version__, ldp, validation
from ._accel import get_backend
from .config import FORMATS, RunConfig, load_config
from .errors import ConfigError, DegenerateLevelError, GridTooCoarseError, OcctimeError, UnstableModelError
from .levy_scale import Brownian
from .renewal_core import exact_cdf_alpha, normal_approx_cdf, simulate_alternating
from .simulate import SimConfig, ks_critical_value, ks_statistic, simulate_rbm, simulate_storage
from .storage_stats import (
    StorageLaw,
    driftless_rbm_double_transform,
    free_occupation_double_transform,
    occupation_cdf,
    occupation_double_transform,
    rbm_double_transform,
    sojourn_moments,
)
from .transforms import alpha_double_transform, availability_transforms, occupation_cdf_via_inversion

log = logging.getLogger("occtime")

COMMANDS = ("transform", "dist", "clt", "ldp", "simulate", "validate")


class UsageError(ConfigError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2, which is reserved for failed validation
    def error(self, message):
        raise UsageError(message)


def _versions():
    out = {"occtime": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
           "python": platform.python_version(), "backend": get_backend()}
    try:
        import numba

        out["numba"] = numba.__version__
    except ImportError:  # pragma: no cover
        pass
    return out


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def _is_brownian(cfg):
    return isinstance(cfg.model, Brownian)


def _try(fn, *errors):
    try:
        return fn()
    except errors as exc:
        log.info("column skipped: %s", exc)
        return None


# ---------------------------------------------------------------------------
# commands; each returns (rows, flags)


def cmd_transform(cfg):
    thetas, qs = cfg.floats("theta"), cfg.floats("q")
    rows, flags = [], {}
    for th in thetas:
        for q in qs:
            row = {"theta": th, "q": q}
            if cfg.law is not None:
                in_a, in_b = availability_transforms(cfg.law, q)
                row.update(value=_num(alpha_double_transform(cfg.law, th, q)), in_A=_num(in_a), in_B=_num(in_b))
            elif _is_brownian(cfg):
                m = cfg.model
                storage = _try(lambda: occupation_double_transform(m, cfg.tau, th, q), UnstableModelError)
                rbm = rbm_double_transform(m.mu, m.sigma2, cfg.tau, th, q)
                if storage is None and m.mu == 0 and m.sigma2 == 1:
                    # no scale-function value without drift; compare to the ODE solution
                    storage = driftless_rbm_double_transform(cfg.tau, th, q)
                    flags["reference"] = "feynman_kac_ode"
                row.update(storage=_num(storage), rbm=_num(rbm),
                           abs_diff=None if storage is None else _num(abs(storage - rbm)))
            else:
                storage = occupation_double_transform(cfg.model, cfg.tau, th, q)
                renewal = alpha_double_transform(StorageLaw(cfg.model, cfg.tau), th, q)
                free = _try(lambda: free_occupation_double_transform(cfg.model, th, q), UnstableModelError)
                row.update(storage=_num(storage), renewal=_num(renewal), abs_diff=_num(abs(storage - renewal)),
                           free_limit=_num(free))
            rows.append(row)
    if _is_brownian(cfg) and cfg.model.mu == 0 and cfg.model.sigma2 == 1:
        flags["borodin_salminen"] = True
    return rows, flags


def _simulated_alpha(cfg, t, n):
    seed = cfg.seed
    if cfg.law is not None:
        return simulate_alternating(cfg.law, t, rng=seed, replications=n).alpha_t
    if _is_brownian(cfg):
        m = cfg.model
        sc = SimConfig(seed=seed, replications=n, horizon=t, dt=cfg.simulation.get("dt"), tau=cfg.tau)
        return simulate_rbm(m.mu, m.sigma2, sc).alpha_t
    paths, _ = simulate_storage(cfg.model, SimConfig(seed=seed, replications=n, horizon=t, tau=cfg.tau))
    return np.atleast_1d(paths.alpha_t)


def _moments(cfg):
    if cfg.law is not None:
        return cfg.law.moments()
    return sojourn_moments(cfg.model, cfg.tau)


def _exact_le(cfg, t, pts):
    # P(alpha(t) <= x) from the strict-inequality series; alpha(t) <= t always
    out = np.ones(pts.size)
    inner = pts < t
    if np.any(inner):
        out[inner] = exact_cdf_alpha(cfg.law, t, np.nextafter(pts[inner], np.inf), cfg.lattice)
    return out


def cmd_dist(cfg):
    ts, xs = cfg.floats("t"), cfg.floats("x")
    n = int(cfg.simulation.get("replications", 0))
    want_exact = bool(cfg.query.get("exact", True))
    ms = _try(lambda: _moments(cfg), DegenerateLevelError)
    rows = []
    for t in ts:
        pts = np.array([x for x in xs if 0 <= x <= t])
        if pts.size == 0:
            continue
        if cfg.law is not None:
            src = lambda th, q: alpha_double_transform(cfg.law, th, q)
            inv = occupation_cdf_via_inversion(src, t, pts, cfg.inversion)
        else:
            inv = occupation_cdf(cfg.model, cfg.tau, t, pts, cfg.inversion)
        exact = None
        if cfg.law is not None and want_exact:
            exact = _try(lambda: _exact_le(cfg, t, pts), GridTooCoarseError)
        normal = None
        if ms is not None and ms.clt_scale > 0:
            normal = normal_approx_cdf(ms, t, pts)
        sim = se = None
        if n > 0:
            alpha = _simulated_alpha(cfg, t, n)
            sim = np.mean(alpha[:, None] <= pts[None, :], axis=0)
            se = np.sqrt(sim * (1 - sim) / n)
        for i, x in enumerate(pts):
            rows.append({
                "t": t, "x": float(x),
                "exact": None if exact is None else _num(exact[i]),
                "inverted": _num(np.atleast_1d(inv)[i]),
                "normal": None if normal is None else _num(np.atleast_1d(normal)[i]),
                "simulated": None if sim is None else _num(sim[i]),
                "sim_se": None if se is None else _num(se[i]),
            })
    return rows, {}


def cmd_clt(cfg):
    ms = _moments(cfg)
    row = {"alpha": ms.alpha, "beta": ms.beta, "var_D": ms.var_D, "var_U": ms.var_U, "cov_DU": ms.cov_DU,
           "clt_scale": ms.clt_scale, "mean_fraction": ms.mean_fraction}
    n = int(cfg.simulation.get("replications", 0))
    if n > 0:
        t = float(cfg.simulation.get("horizon", 1000.0))
        alpha = _simulated_alpha(cfg, t, n)
        z = (alpha - ms.mean_fraction * t) / math.sqrt(ms.clt_scale * t)
        row.update(horizon=t, replications=n, ks=ks_statistic(z, stats.norm.cdf),
                   ks_critical_1pct=ks_critical_value(n))
    return [row], {}


def cmd_ldp(cfg):
    if cfg.law is None:
        raise ConfigError("ldp needs a 'law'; storage cycle laws have no joint MGF implementation")
    fracs = cfg.floats("frac")
    t = float(cfg.query.get("horizon", cfg.simulation.get("horizon", 1.0)))
    n = int(cfg.simulation.get("replications", 0))
    rows = []
    for f in fracs:
        r = ldp.rate_function(cfg.law, f, full_output=True)
        row = {"frac": f, "theta": _num(r.theta), "drain": _num(r.drain), "rate": _num(r.rate),
               "asymptote": math.exp(-t * r.rate), "boundary": r.boundary}
        if n > 0 and r.rate > 0 and not r.boundary:
            est = ldp.tail_probability_estimate(cfg.law, f, t, n=n, seed=cfg.seed, theta=r.theta)
            row.update(sim_rate=_num(-est.log_value / t), sim_rel_se=_num(est.rel_se))
        rows.append(row)
    return rows, {"horizon": t}


def cmd_simulate(cfg):
    t = float(cfg.simulation.get("horizon", cfg.query.get("t", 1.0)))
    n = int(cfg.simulation.get("replications", 1))
    if cfg.law is not None:
        p = simulate_alternating(cfg.law, t, rng=cfg.seed, replications=n)
    elif _is_brownian(cfg):
        m = cfg.model
        sc = SimConfig(seed=cfg.seed, replications=n, horizon=t, dt=cfg.simulation.get("dt"), tau=cfg.tau)
        p = simulate_rbm(m.mu, m.sigma2, sc)
    else:
        sc = SimConfig(seed=cfg.seed, replications=max(n, 2), horizon=t, tau=cfg.tau)
        p, _ = simulate_storage(cfg.model, sc)
    rows = [{"alpha_t": float(p.alpha_t[i]), "beta_t": float(p.beta_t[i]), "n_cycles": int(p.n_cycles[i]),
             "in_A_at_t": bool(p.in_A_at_t[i])} for i in range(n)]
    return rows, {"horizon": t}


def cmd_validate(cfg):
    v = cfg.validate
    seed = cfg.seed if cfg.seed_given else validation.DEFAULT_SEED
    report = validation.run_suite(seed=seed, criteria=v.get("criteria"), tolerances=v.get("tolerances"),
                                  sizes=v.get("sizes"))
    rows = [{"criterion": r.number, "name": r.name, "passed": r.passed, "summary": r.summary}
            for r in report.results]
    return rows, {"report": report}


HELP = {
    "transform": "double transform on a (theta, q) grid",
    "dist": "CDF of the occupation time, several methods side by side",
    "clt": "moment summary and CLT scale constant",
    "ldp": "large-deviations rate function table",
    "simulate": "one row per simulated path",
    "validate": "run the acceptance suite",
}

HANDLERS = {"transform": cmd_transform, "dist": cmd_dist, "clt": cmd_clt, "ldp": cmd_ldp,
            "simulate": cmd_simulate, "validate": cmd_validate}


# ---------------------------------------------------------------------------
# output


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def to_csv(rows):
    """RFC 4180 text: header row, CRLF line ends, minimal quoting."""
    buf = io.StringIO()
    cols = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def to_json(rows, meta):
    return json.dumps({"meta": meta, "rows": rows}, indent=2, sort_keys=False, allow_nan=False) + "\n"


def build_parser():
    p = _Parser(prog="occtime", description="Occupation times of alternating and reflected processes.")
    p.add_argument("--version", action="version", version=f"occtime {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name, help=HELP[name])
        s.add_argument("--config", help="YAML run configuration")
        s.add_argument("--out", help="output file (default: standard output)")
        s.add_argument("--format", choices=FORMATS, help="output format (default csv)")
        s.add_argument("--seed", type=int, help="overrides the configured seed")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def run(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.config is not None:
        cfg = load_config(args.config, need_subject=args.command != "validate")
    elif args.command == "validate":
        cfg = RunConfig(raw={})
    else:
        raise UsageError(f"{args.command} needs --config")
    if args.seed is not None:
        cfg.seed = args.seed
        cfg.raw = {**cfg.raw, "seed": args.seed}
    rows, flags = HANDLERS[args.command](cfg)
    fmt = args.format or cfg.out_format
    out_path = args.out or cfg.out_path
    report = flags.pop("report", None)
    meta = {"command": args.command, "seed": cfg.seed, "config_hash": cfg.digest, "versions": _versions(), **flags}
    if report is not None:
        meta["seed"] = report.seed
    text = to_json(rows, meta) if fmt == "json" else to_csv(rows)
    if report is not None:
        stdout.write(report.text())
        if out_path:
            with open(out_path, "w", newline="") as fh:
                fh.write(text)
        return 0 if report.passed else 2
    if out_path:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0


def main(argv=None):
    try:
        return run(argv)
    except UsageError as exc:
        print(f"occtime: usage error: {exc}", file=sys.stderr)
        return 1
    except (OcctimeError, ValueError, OSError) as exc:
        print(f"occtime: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
