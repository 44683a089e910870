"""Compare the compiled Haar kernel against the pure-numpy fallback.

Run:  python3 benchmarks/bench_haar.py
"""

import time

import numpy as np

from wavemamba import _haar_np

try:
    from wavemamba import _haar_cy
except ImportError:
    _haar_cy = None


def bench(fn, x, repeats=20):
    fn(x)  # warm up
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn(x)
        best = min(best, time.perf_counter() - started)
    return best


def main():
    rng = np.random.default_rng(0)
    print(f"{'batch':>8} {'side':>5} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8}")
    for batch, side in ((256, 8), (1024, 8), (4096, 8), (256, 32), (1024, 32)):
        x = rng.normal(size=(batch, side, side))
        t_np = bench(_haar_np.dwt2_batch, x)
        if _haar_cy is None:
            print(f"{batch:>8} {side:>5} {t_np * 1e3:>10.3f} {'n/a':>10} {'n/a':>8}")
            continue
        t_cy = bench(_haar_cy.dwt2_batch, x)
        out_np = _haar_np.dwt2_batch(x)
        out_cy = _haar_cy.dwt2_batch(x)
        assert np.allclose(out_np, out_cy, atol=1e-12)
        print(
            f"{batch:>8} {side:>5} {t_np * 1e3:>10.3f} {t_cy * 1e3:>10.3f} "
            f"{t_np / t_cy:>7.2f}x"
        )


if __name__ == "__main__":
    main()
