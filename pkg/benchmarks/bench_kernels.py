"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--sizes 1025 4097] [--repeat 5]

The first numba call per signature compiles (or loads the on-disk cache);
it is run once before timing.
"""
import argparse
import time

import numpy as np

from vofrac import _accel, kernels
from vofrac.fields import DimensionField, FunctionSpec
from vofrac.operators import OperatorSpec, gfd_left
from vofrac.quadrature import QuadratureConfig
from vofrac.special import rgamma


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n):
    rng = np.random.default_rng(0)
    h = 1.0 / (n - 1)
    gam = rng.uniform(0.05, 0.95, n - 1)
    w = rng.uniform(-1, 1, n - 1)
    near = np.arange(n - 1) * h
    width = np.full(n - 1, h)
    rhs = rng.uniform(-1, 1, n)
    spec = OperatorSpec("left", "time", 0.0, 2.0,
                        DimensionField.parse("0.3+0.2*t", 0.0, 2.0, n), QuadratureConfig(n_points=n))
    f = FunctionSpec.expression("exp(t)")
    return {
        "moment_sum": (lambda: kernels.moment_sum_numpy(w, near, width, gam),
                       lambda: kernels.moment_sum_numba(w, near, width, gam)),
        "volterra_grid": (lambda: kernels.volterra_grid_numpy(w, gam, h),
                          lambda: kernels.volterra_grid_numba(w, gam, h)),
        "march_bdf2": (lambda: kernels.march_bdf2_numpy(rgamma(gam), gam, h, rhs, 0.0),
                       lambda: kernels.march_bdf2_numba(rgamma(gam), gam, h, rhs, 0.0)),
        "gfd_left": (lambda: _with_backend(False, lambda: gfd_left(f, spec, 1.0)),
                     lambda: _with_backend(True, lambda: gfd_left(f, spec, 1.0))),
    }


def _with_backend(flag, fn):
    old = _accel.USE_NUMBA
    _accel.USE_NUMBA = flag
    try:
        return fn()
    finally:
        _accel.USE_NUMBA = old


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1025, 4097])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    _accel.apply_thread_cap()
    print(f"{'kernel':<14}{'n':>7}{'numpy [s]':>13}{'numba [s]':>13}{'speedup':>10}")
    for n in args.sizes:
        for name, (slow, fast) in cases(n).items():
            fast()  # compile / load cache
            t_np = best_of(slow, args.repeat)
            t_nb = best_of(fast, args.repeat)
            print(f"{name:<14}{n:>7}{t_np:>13.4g}{t_nb:>13.4g}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
