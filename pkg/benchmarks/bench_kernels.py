"""Time the numba and numpy paths of the distance kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json]

The numba path is timed after one warm-up call so compilation is excluded.
"""
import argparse
import json
import time

import numpy as np

from permext import _accel, kernels
from permext.groups import agl1, pgl2


def _best(fn, repeat):
    fn()  # warm-up (numba compiles here)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    big = pgl2(23).rows  # 12,144 rows on 24 symbols
    half = len(big) // 2
    g37 = pgl2(37).rows
    rng = np.random.default_rng(0)
    ii = rng.integers(0, len(g37), 10**6)
    jj = (ii + 1 + rng.integers(0, len(g37) - 1, 10**6)) % len(g37)
    c = rng.permutation(38)
    yield "pairwise_scan pgl2(23)", lambda b: kernels.pairwise_scan(big, 24, backend=b)
    yield "cross_scan pgl2(23) halves", lambda b: kernels.cross_scan(big[:half], big[half:], 24, backend=b)
    yield "fixed_point_counts pgl2(37)", lambda b: kernels.fixed_point_counts(g37, c, backend=b)
    yield "pair_distances 1e6 pairs", lambda b: kernels.pair_distances(g37, ii, jj, backend=b)
    a = agl1(31).rows
    yield "pairwise_scan agl1(31)", lambda b: kernels.pairwise_scan(a, 31, backend=b)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)
    backends = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])
    results = []
    for name, fn in cases():
        row = {"case": name}
        for b in backends:
            row[b] = _best(lambda: fn(b), args.repeat)
        if "numba" in row:
            row["speedup"] = row["numpy"] / row["numba"]
        results.append(row)
    if args.json:
        print(json.dumps(results, indent=1))
        return
    print(f"{'case':32s} {'numpy s':>10s} {'numba s':>10s} {'speedup':>8s}")
    for r in results:
        nb = f"{r['numba']:10.4f}" if "numba" in r else f"{'-':>10s}"
        sp = f"{r['speedup']:8.1f}" if "speedup" in r else f"{'-':>8s}"
        print(f"{r['case']:32s} {r['numpy']:10.4f} {nb} {sp}")


if __name__ == "__main__":
    main()
