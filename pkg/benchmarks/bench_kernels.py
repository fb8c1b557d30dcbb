"""Compiled vs numpy Monte Carlo kernels.

Times each simulation entry point under both backends and checks that the
two produce the same numbers (the counter-based generator makes the result
independent of the backend up to floating-point rounding).

    python benchmarks/bench_kernels.py [--scale 1.0] [--repeat 3]
"""
import argparse
import time

import numpy as np

from occtime._accel import HAVE_NUMBA, set_backend
from occtime.levy_scale import CompoundPoissonExp
from occtime.simulate import SimConfig, sample_storage_cycles, simulate_rbm, simulate_storage, supremum_epoch_sample

MM1 = CompoundPoissonExp(0.5, 1.0)


def _pairs(cycles):
    return np.column_stack([cycles.d, cycles.u])


def _cases(scale):
    n = lambda k: max(1, int(k * scale))
    return {
        "storage_cycles": lambda: _pairs(sample_storage_cycles(MM1, 1.0, n(200_000), seed=1)),
        "storage_paths": lambda: simulate_storage(
            MM1, SimConfig(seed=2, replications=n(20_000), horizon=10.0, tau=1.0))[0].alpha_t,
        "rbm": lambda: simulate_rbm(-0.5, 1.0, SimConfig(seed=3, replications=n(2_000), horizon=5.0,
                                                         dt=1e-3, tau=1.0)).alpha_t,
        "supremum": lambda: np.concatenate(supremum_epoch_sample(0.0, 1.0, 1.0, rng=4, n=n(20_000), dt=1e-2)),
    }


def _time(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, np.asarray(out, dtype=float)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=float, default=1.0, help="multiplier on the replication counts")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    print(f"{'kernel':<16}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}{'max |diff|':>14}")
    for name, fn in _cases(args.scale).items():
        set_backend("numba")
        fn()  # compile outside the timed region
        t_nb, out_nb = _time(fn, args.repeat)
        set_backend("numpy")
        t_np, out_np = _time(fn, args.repeat)
        diff = float(np.max(np.abs(out_nb - out_np))) if out_nb.shape == out_np.shape else np.nan
        print(f"{name:<16}{t_np:>12.3f}{t_nb:>12.3f}{t_np / t_nb:>10.1f}{diff:>14.3g}")
    set_backend("numba")


if __name__ == "__main__":
    main()
