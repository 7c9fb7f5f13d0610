"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_accel.py [--repeat 5]

Each case runs once to trigger compilation, then reports the best of
``--repeat`` timings per backend and the max absolute difference.
"""
import argparse
import time

import numpy as np

from qproj import _accel


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bspline_case(n, size):
    x = np.random.default_rng(0).uniform(-n, n, size)
    return (f"bspline order {n}, {size} points",
            lambda: _accel._bspline_numba(x, n),
            lambda: _accel._bspline_numpy(x, n))


def synth_case(kind, d, points, terms):
    rng = np.random.default_rng(1)
    span = int(round(terms ** (1 / d)))
    y = rng.uniform(0, span, (points, d))
    table = rng.normal(size=(span + 8,) * d)
    kmin = np.full(d, -span - 4, dtype=np.int64)
    if kind == _accel.KIND_BSPLINE:
        param, radius, label = np.full(d, 4.0), np.full(d, 2.0), "cubic B-spline"
    else:
        param, radius, label = np.full(d, 0.5), np.full(d, 3.0), "windowed sinc"
    shifts, tcoef = np.zeros((1, d)), np.ones(1)

    def run(flag):
        return _accel.synthesize(y, kind, param, radius, 0.1, shifts, tcoef, table, kmin, use_numba=flag)

    return f"synthesis {label}, d={d}, {points} points", lambda: run(True), lambda: run(False)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is unavailable (or QP_DISABLE_NUMBA is set); nothing to compare")
    cases = [
        bspline_case(2, 1_000_000),
        bspline_case(4, 1_000_000),
        synth_case(_accel.KIND_BSPLINE, 1, 200_000, 4096),
        synth_case(_accel.KIND_SINC, 1, 200_000, 4096),
        synth_case(_accel.KIND_BSPLINE, 2, 100_000, 4096),
    ]
    print(f"{'case':<44} {'numba s':>9} {'numpy s':>9} {'speedup':>8} {'max diff':>9}")
    for label, fast, slow in cases:
        diff = float(np.max(np.abs(fast() - slow())))
        tn, tp = best_of(fast, args.repeat), best_of(slow, args.repeat)
        print(f"{label:<44} {tn:9.4f} {tp:9.4f} {tp / tn:8.1f} {diff:9.1e}")


if __name__ == "__main__":
    main()
