"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_backends.py [--repeats 7] [--n 2000] [--m 256]

Prints the median seconds per backend for each kernel and for two whole
selectors, plus the speed-up of the compiled path. Exits with status 1 if the
extension is not built.
"""
import argparse
import statistics
import sys
import time

import numpy as np

from mdfs import _backend
from mdfs.cli import bench_dataset
from mdfs.data import discretize_all
from mdfs.selectors import SelectorConfig, select


def _median_time(fn, repeats):
    fn()
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def workloads(n, m, classes, seed):
    ds = bench_dataset(m, n, classes, seed)
    x = ds.values
    pos = np.flatnonzero(ds.labels == 0)
    neg = np.flatnonzero(ds.labels == 1)
    order = np.argsort(x, axis=0)
    codes, counts = discretize_all(x, 10)
    width = int(counts.max())
    rest = np.arange(1, m)
    cfg = SelectorConfig(k_target=m, seed=seed)
    return {
        "auc_columns": lambda: _backend.auc_columns(x, pos, neg),
        "equal_frequency_scan": lambda: _backend.equal_frequency_scan(x, order, 10),
        "contingency_tables": lambda: _backend.contingency_tables(codes, ds.labels, width, classes),
        "mutual_info_with": lambda: _backend.mutual_info_with(codes, 0, rest, width, int(counts[0])),
        "select mdfs": lambda: select("mdfs", ds, cfg),
        "select mrmr": lambda: select("mrmr", ds, cfg),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--m", type=int, default=256)
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--repeats", type=int, default=7)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    if "cython" not in _backend.available():
        print("compiled extension not available; rebuild with `pip install -e .`", file=sys.stderr)
        return 1
    jobs = workloads(args.n, args.m, args.classes, args.seed)
    print(f"n={args.n} m={args.m} classes={args.classes} repeats={args.repeats}")
    print(f"{'workload':<22}{'cython s':>12}{'python s':>12}{'speed-up':>10}")
    for name, fn in jobs.items():
        t = {}
        for backend in ("cython", "python"):
            with _backend.using(backend):
                t[backend] = _median_time(fn, args.repeats)
        print(f"{name:<22}{t['cython']:>12.5f}{t['python']:>12.5f}{t['python'] / t['cython']:>9.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
