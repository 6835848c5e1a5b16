"""Compare the numba-jitted kernels against the pure-numpy fallbacks.

Run: python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from trajconstrain.kernels import (
    NUMBA_ENABLED,
    pattern_codes,
    pattern_codes_numpy,
    points_in_boxes,
    points_in_boxes_numpy,
)


def timeit(fn, *args, repeat=5):
    fn(*args)  # warm-up / jit compile
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    print(f"numba enabled: {NUMBA_ENABLED}")
    print(f"{'kernel':<18} {'n':>9} {'boxes':>6} {'numpy (ms)':>11} {'selected (ms)':>14} {'speedup':>8}")
    for n in (10_000, 100_000, 1_000_000):
        for nb in (1, 4, 16):
            pts = rng.standard_normal((n, 4))
            lows = rng.standard_normal((nb, 4)) - 1.5
            highs = lows + 1.0
            t_np = timeit(points_in_boxes_numpy, pts, lows, highs)
            t_sel = timeit(points_in_boxes, pts, lows, highs)
            print(
                f"{'points_in_boxes':<18} {n:>9} {nb:>6} {t_np * 1e3:>11.3f} "
                f"{t_sel * 1e3:>14.3f} {t_np / t_sel:>8.2f}x"
            )
    for n in (100_000, 1_000_000):
        for m in (2, 4, 8):
            masks = rng.random((m, n)) < 0.5
            t_np = timeit(pattern_codes_numpy, masks)
            t_sel = timeit(pattern_codes, masks)
            print(
                f"{'pattern_codes':<18} {n:>9} {m:>6} {t_np * 1e3:>11.3f} "
                f"{t_sel * 1e3:>14.3f} {t_np / t_sel:>8.2f}x"
            )


if __name__ == "__main__":
    main()
