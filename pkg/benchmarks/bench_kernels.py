"""Time the numba kernels against their numpy twins and check they agree.

    python3 benchmarks/bench_kernels.py [--paths 20000] [--repeat 5]

Prints one row per kernel: best-of-``repeat`` seconds for each backend, the
speed-up and the max absolute difference of the outputs.  The first numba call
is made before timing so compilation is excluded.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from compatlab._accel import HAVE_NUMBA
from compatlab.paths import Stream
from compatlab.paths._kernels import IMPLEMENTATIONS


def _bridge_case(P, queries):
    keys = Stream(7).path_keys(P)
    ts = np.random.default_rng(0).uniform(0.0, 2.0, (queries, P))

    def run(fn):
        cap = queries + 2
        times = np.zeros((P, cap))
        vals = np.zeros((P, cap))
        counts = np.ones(P, dtype=np.int64)
        draws = np.zeros(P, dtype=np.int64)
        out = np.empty(P)
        res = np.empty((queries, P))
        for q in range(queries):
            fn(times, vals, counts, draws, keys, ts[q], out)
            res[q] = out
        return res

    return run


def cases(P):
    keys = Stream(1).path_keys(P)
    absm = np.abs(np.cumsum(Stream(2).normals(P, 256) * 0.1, axis=1))
    levels = np.array([1.0, 2.0, 3.0])
    times = np.linspace(0.0, 1.0, 256)
    return {
        "uniform_block": lambda fn: fn(keys, 0, 256),
        "normal_block": lambda fn: fn(keys, 0, 256),
        "bridge_query": _bridge_case(P, 32),
        "first_passage": lambda fn: fn(absm, levels, times),
    }


def best_time(call, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = call()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not installed; only the numpy backend is available")
    print(f"{'kernel':<15}{'numba s':>12}{'numpy s':>12}{'speed-up':>10}{'max |diff|':>14}")
    for name, run in cases(args.paths).items():
        nb, npy = IMPLEMENTATIONS[name]
        run(nb)  # compile
        t_nb, o_nb = best_time(lambda: run(nb), args.repeat)
        t_np, o_np = best_time(lambda: run(npy), args.repeat)
        a, b = np.asarray(o_nb), np.asarray(o_np)
        with np.errstate(invalid="ignore"):  # inf - inf where both sides agree
            diff = float(np.max(np.where(a == b, 0.0, np.abs(a - b))))
        print(f"{name:<15}{t_nb:>12.4f}{t_np:>12.4f}{t_np / t_nb:>10.1f}{diff:>14.2e}")


if __name__ == "__main__":
    main()
