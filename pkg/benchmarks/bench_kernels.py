"""Compare the Cython and pure-Python reachability kernels on random live-edge worlds.

    python benchmarks/bench_kernels.py [--nodes 200] [--edges 800] [--worlds 256] [--repeat 5]
"""

import argparse
import time

import numpy as np

from splitmax import kernels


def random_csr(rng, n, m):
    src = rng.integers(0, n, m)
    dst = rng.integers(0, n, m)
    order = np.argsort(src, kind="stable")
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    return np.cumsum(indptr), dst[order].astype(np.int64)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=200)
    ap.add_argument("--edges", type=int, default=800)
    ap.add_argument("--worlds", type=int, default=256)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    indptr, indices = random_csr(rng, args.nodes, args.edges)
    live = (rng.random((args.worlds, args.edges)) < 0.3).astype(np.uint8)
    seeds = rng.choice(args.nodes, args.seeds, replace=False).astype(np.int64)

    py = kernels.ic_reach(indptr, indices, live, seeds, backend="python")
    try:
        cy = kernels.ic_reach(indptr, indices, live, seeds, backend="cython")
    except ImportError:
        print("cython extension not built; only the python backend is available")
        cy = None
    t_py = best_of(lambda: kernels.ic_reach(indptr, indices, live, seeds, backend="python"), args.repeat)
    print(f"python  {t_py * 1e3:9.2f} ms")
    if cy is not None:
        assert all(np.array_equal(a, b) for a, b in zip(py, cy)), "backends disagree"
        t_cy = best_of(lambda: kernels.ic_reach(indptr, indices, live, seeds, backend="cython"), args.repeat)
        print(f"cython  {t_cy * 1e3:9.2f} ms   speedup x{t_py / t_cy:.1f}")


if __name__ == "__main__":
    main()
