"""Compare the numba kernels with the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--n 20000] [--m 64] [--c 10] [--repeat 5]

Times each kernel on random data, then a full LACK solve with each backend
patched in.  Numba compilation happens in a warm-up call and is not timed.
"""
import argparse
import statistics
import time

import numpy as np

from lackmv import BlobSpec, SolverConfig, gen_blobs, kernels, solve, stratified_label_sample

KERNELS = ("sq_dist_table", "class_sums", "sq_residual", "weighted_argmin")


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def use_backend(suffix):
    for name in KERNELS:
        setattr(kernels, name, getattr(kernels, name + suffix))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--m", type=int, default=64)
    ap.add_argument("--c", type=int, default=10)
    ap.add_argument("--views", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    rows = rng.normal(size=(args.n, args.m))
    cents = rng.normal(size=(args.c, args.m))
    assign = rng.integers(0, args.c, args.n)
    tables = rng.random((args.views, args.n, args.c))
    weights = rng.random(args.views)
    calls = {
        "sq_dist_table": lambda f: f(rows, cents),
        "class_sums": lambda f: f(rows, assign, args.c),
        "sq_residual": lambda f: f(rows, cents, assign),
        "weighted_argmin": lambda f: f(tables, weights),
    }

    print(f"n={args.n} m={args.m} c={args.c} P={args.views}; median of {args.repeat}")
    print(f"{'kernel':<18}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name in KERNELS:
        t_nb = best_of(lambda: calls[name](getattr(kernels, name + "_numba")), args.repeat)
        t_np = best_of(lambda: calls[name](getattr(kernels, name + "_numpy")), args.repeat)
        print(f"{name:<18}{t_nb * 1e3:>12.2f}{t_np * 1e3:>12.2f}{t_np / t_nb:>10.2f}")

    spec = BlobSpec(c=args.c, n_per_class=args.n // args.c, dims=[args.m] * args.views, separation=3.0, seed=1)
    ds, truth = gen_blobs(spec)
    info = stratified_label_sample(truth, 0.05, 0)
    cfg = SolverConfig(strategy="LABEL_DRIVEN", max_iter=10, stop_on_Q_fixed=False)
    timings = {}
    for suffix in ("_numba", "_numpy"):
        use_backend(suffix)
        timings[suffix] = best_of(lambda: solve(ds, info, cfg), args.repeat)
    print(
        f"{'solve (10 iters)':<18}{timings['_numba'] * 1e3:>12.2f}{timings['_numpy'] * 1e3:>12.2f}"
        f"{timings['_numpy'] / timings['_numba']:>10.2f}"
    )


if __name__ == "__main__":
    main()
