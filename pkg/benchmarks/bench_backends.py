"""Compare the numba and pure-numpy arbitrage kernels.

Usage: python3 benchmarks/bench_backends.py [--sizes 100,1000,10000,100000]
Prints a CSV table of per-call times and the speedup for both kernel families.
"""

import argparse
import time

import numpy as np

from dexroute import kernels


def _gmean_args(rng, m):
    w1 = rng.choice([0.5, 0.8], m)
    return (
        rng.uniform(10.0, 1e4, m),
        rng.uniform(10.0, 1e4, m),
        w1,
        1.0 - w1,
        rng.choice([1.0, 0.997], m),
        rng.uniform(0.05, 20.0, m),
        rng.uniform(0.05, 20.0, m),
    )


def _bounded_args(rng, m):
    return (
        rng.uniform(0.0, 1e3, m),
        rng.uniform(0.0, 1e3, m),
        rng.uniform(1e-3, 500.0, m),
        rng.uniform(1e-3, 500.0, m),
        rng.choice([1.0, 0.997], m),
        rng.uniform(0.01, 100.0, m),
        rng.uniform(0.01, 100.0, m),
    )


def _time(fn, args, reps):
    fn(*args)  # warm-up (jit compile / cache touch)
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="100,1000,10000,100000")
    parser.add_argument("--reps", type=int, default=7)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if not kernels.HAVE_NUMBA:
        raise SystemExit("numba not importable; nothing to compare")

    rng = np.random.default_rng(0)
    print("kernel,m,numpy_us,numba_us,speedup")
    for name, make, np_fn, nb_fn in (
        ("gmean", _gmean_args, kernels.gmean_arb_numpy, kernels.gmean_arb_numba),
        ("bounded", _bounded_args, kernels.bounded_arb_numpy, kernels.bounded_arb_numba),
    ):
        for m in sizes:
            batch = make(rng, m)
            t_np = _time(np_fn, batch, args.reps) * 1e6
            t_nb = _time(nb_fn, batch, args.reps) * 1e6
            print(f"{name},{m},{t_np:.1f},{t_nb:.1f},{t_np / t_nb:.2f}")


if __name__ == "__main__":
    main()
