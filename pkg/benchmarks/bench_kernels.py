"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--Ny 256] [--levels 64]

Three groups are timed: the raw window kernels (1d and 2d), the n=1 prefix
table against direct window summation, and end-to-end tent norms with the
compiled path switched off through the module flag.  Every pair is also
checked for agreement, so a speedup never hides a wrong answer.
"""

import argparse
import timeit

import numpy as np

from tentspace import _kernels
from tentspace.functionals import NormSpec, tent_norm
from tentspace.grid import CellMeasure, GridSpec, PrefixTable, random_function


def _best(fn, repeat):
    fn()  # warm-up, includes compilation on the numba path
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def _row(name, t_np, t_nb, agree):
    speed = t_np / t_nb if t_nb > 0 else float("nan")
    print(f"{name:<42} {t_np * 1e3:10.2f} {t_nb * 1e3:10.2f} {speed:8.1f}x  {agree}")


def bench_kernels(spec, repeat, rng):
    A = rng.random((spec.t_levels,) + spec.boundary_shape)
    radii = np.minimum(spec.t, 0.45)
    offs, counts = spec.window(radii)
    for kind in ("window_sum", "window_max"):
        fn = getattr(_kernels, kind)
        a = fn(A, offs, counts, use_numba=False)
        b = fn(A, offs, counts, use_numba=True)
        _row(f"{kind} n={spec.n} {spec.Ny}x{spec.t_levels}",
             _best(lambda: fn(A, offs, counts, use_numba=False), repeat),
             _best(lambda: fn(A, offs, counts, use_numba=True), repeat),
             "identical" if np.array_equal(a, b) else f"max diff {np.abs(a - b).max():.2e}")


def bench_prefix(spec, repeat, rng):
    f = random_function(spec, "lognormal-noise", 0)
    m = CellMeasure(spec, "dydt")
    radii = np.minimum(spec.t, 0.45)
    A = np.moveaxis(np.abs(f.values) * m.weights, -1, 0)
    table = PrefixTable(f, m)
    a = table.window_sums(radii)
    offs, counts = spec.window(radii)
    b = _kernels.window_sum(A, offs, counts)
    t_pre = _best(lambda: table.window_sums(radii), repeat)
    t_dir = _best(lambda: _kernels.window_sum(A, offs, counts), repeat)
    rel = np.abs(a - b).max() / max(np.abs(b).max(), 1e-300)
    print(f"{'prefix table (ms)':<42} {t_pre * 1e3:10.2f}")
    print(f"{'direct numba window sum (ms)':<42} {t_dir * 1e3:10.2f}   rel diff {rel:.1e}")


def bench_norms(spec, repeat):
    f = random_function(spec, "lognormal-noise", 3)
    specs = [NormSpec(2.0, 2.0, 2.0, 0.0), NormSpec(np.inf, 2.0, None, -1.0),
             NormSpec(2.0, np.inf, 2.0, -0.5), NormSpec(1.0, 3.0, None, -1.0)]
    saved = _kernels.HAS_NUMBA
    try:
        for s in specs:
            _kernels.HAS_NUMBA = False
            a = tent_norm(f, s)
            t_np = _best(lambda: tent_norm(f, s), repeat)
            _kernels.HAS_NUMBA = saved
            b = tent_norm(f, s)
            t_nb = _best(lambda: tent_norm(f, s), repeat)
            _row(f"tent_norm {s}", t_np, t_nb, "identical" if a == b else f"{a!r} vs {b!r}")
    finally:
        _kernels.HAS_NUMBA = saved


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--Ny", type=int, default=256)
    ap.add_argument("--levels", type=int, default=64)
    ap.add_argument("--Ny2", type=int, default=48, help="boundary size for the n=2 kernels")
    args = ap.parse_args(argv)
    if not _kernels.HAS_NUMBA:
        ap.error("numba is unavailable or disabled (TENTSPACE_DISABLE_NUMBA); nothing to compare")
    rng = np.random.default_rng(0)
    s1 = GridSpec(n=1, Ny=args.Ny, t_levels=args.levels)
    s2 = GridSpec(n=2, Ny=args.Ny2, t_levels=args.levels // 2, t_max=2.0 ** -3)
    print(f"{'case':<42} {'numpy ms':>10} {'numba ms':>10} {'speedup':>9}  check")
    bench_kernels(s1, args.repeat, rng)
    bench_kernels(s2, args.repeat, rng)
    bench_norms(s1, args.repeat)
    print()
    bench_prefix(s1, args.repeat, rng)


if __name__ == "__main__":
    main()
