"""Compare the numba and numpy kernel paths on representative inputs.

    python benchmarks/bench_kernels.py [--repeat 5]

Both implementations are imported side by side, so the env flag does not
matter here; results are checked for equality before timings are printed.
"""
import argparse
import time

import numpy as np

from suptail import _kernels


def make_cases(rng):
    values = rng.integers(0, 64, size=(12, 16), dtype=np.int64)
    idx = rng.integers(0, 16, size=(100_000, 6), dtype=np.int64)
    small = rng.integers(0, 8, size=(6, 7), dtype=np.int64)
    weights = rng.integers(1, 5, size=7, dtype=np.int64)
    masks = np.unique(rng.integers(0, 1 << 14, size=60, dtype=np.int64))
    return {
        "sup_hits": (values, idx, np.int64(200), False),
        "enum_hit_weight": (small, weights, 6, np.int64(25), True),
        "count_subsets_ge": (values, 6, np.int64(250)),
        "max_traces": (masks, 14, 6),
    }


def best_time(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not _kernels.NUMBA_KERNELS:
        raise SystemExit("numba is not importable; nothing to compare")
    cases = make_cases(np.random.default_rng(args.seed))
    print(f"{'kernel':<18}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}")
    for name, call_args in cases.items():
        _kernels.NUMBA_KERNELS[name](*call_args)  # compile outside the timing
        t_np, r_np = best_time(_kernels.NUMPY_KERNELS[name], call_args, args.repeat)
        t_nb, r_nb = best_time(_kernels.NUMBA_KERNELS[name], call_args, args.repeat)
        if int(r_np) != int(r_nb):
            raise SystemExit(f"{name}: numpy gave {r_np}, numba gave {r_nb}")
        print(f"{name:<18}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
