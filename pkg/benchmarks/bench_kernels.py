"""Time the conditional-quantile kernel on each backend.

Run with ``python3 benchmarks/bench_kernels.py [--n N] [--repeat R]``.
Prints one line per (model, backend) with the best wall time and the
throughput in draws per second, plus the compiled speed-up when built.
"""

import argparse
import time

import numpy as np

from ratiotail import kernels
from ratiotail.sampler import sample_frechet, uniform_open
from ratiotail.spectral import make_exp_ratio, make_logistic, make_mixed

MODELS = {
    "logistic(2)": make_logistic(2.0),
    "logistic(1.5)": make_logistic(1.5),
    "mixed(0.5)": make_mixed(0.5),
    "exp_ratio": make_exp_ratio(),
}


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    y, u = sample_frechet(rng, args.n), uniform_open(rng, args.n)
    print(f"n = {args.n}, best of {args.repeat}; backends: {', '.join(kernels.available_backends())}")
    for name, model in MODELS.items():
        d = model.density
        r, fw, gw = model.atom_arrays
        times = {}
        for backend in kernels.available_backends():
            mod = kernels.get_backend(backend)
            times[backend] = best_time(
                lambda: mod.conditional_quantile(d.family, d.family_param, r, fw, gw, y, u), args.repeat
            )
            print(f"{name:14s} {backend:9s} {times[backend]:8.4f} s  {args.n / times[backend]:12.0f} draws/s")
        if len(times) == 2:
            print(f"{name:14s} speed-up  {times['python'] / times['compiled']:8.1f}x")


if __name__ == "__main__":
    main()
