"""Time the numba kernels against their pure-numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs once untimed (JIT compilation, caches), then ``repeat``
times; the best wall time is reported.  Outputs are compared for equality
before timing so a speedup never hides a mismatch.
"""

import argparse
import time
from itertools import combinations

import numpy as np

from rejectlab import _kernels as K
from rejectlab.experiments import make_sparse_class
from rejectlab.misspecified import xor_weights


def best_of(fn, args, repeat):
    fn(*args)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    sparse = make_sparse_class(3, 12).members
    combos3 = np.array(list(combinations(range(12), 3)), dtype=np.int64)
    combos4 = np.array(list(combinations(range(12), 4)), dtype=np.int64)
    rand = rng.integers(0, 2, size=(400, 40)).astype(np.uint8)
    xw10 = xor_weights(rng.dirichlet(np.ones(10)))
    xw4 = xor_weights(np.full(4, 0.25))
    yield "first_shattered  F_3, m=12, k=4", "first_shattered", (sparse, combos4)
    yield "max_projections  F_3, m=12, k=3", "max_projections", (sparse, combos3)
    yield "max_pairwise_hamming 400 x 40", "max_pairwise_hamming", (rand,)
    yield "greedy_cube_cover  10 atoms, r=0.2", "greedy_cube_cover", (xw10, 0.2)
    yield "exact_cube_cover  4 atoms, r=0.25", "exact_cube_cover", (xw4, 0.25)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"{'kernel':40s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>9s}")
    for label, name, inputs in cases():
        f_np = getattr(K, f"{name}_numpy")
        f_nb = getattr(K, f"{name}_numba")
        a, b = f_np(*inputs), f_nb(*inputs)
        if not np.array_equal(np.asarray(a), np.asarray(b)):
            raise SystemExit(f"{name}: backends disagree ({a!r} vs {b!r})")
        t_np = best_of(f_np, inputs, args.repeat)
        t_nb = best_of(f_nb, inputs, args.repeat)
        print(f"{label:40s} {t_np * 1e3:12.3f} {t_nb * 1e3:12.3f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
