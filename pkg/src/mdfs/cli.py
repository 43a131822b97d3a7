"""Command-line front end: ``mdfs rank|select|evaluate|bench``."""
from __future__ import annotations

import argparse
import csv
import gc
import io
import json
import os
import statistics
import sys
import tempfile
import time
from importlib import resources

import numpy as np

from mdfs import __version__, _backend
from mdfs.data import DataError, generate_siren_dataset, load_csv, make_siren_spec, siren_benchmark_spec
from mdfs.evaluation import ExperimentError, ExperimentSpec, MethodSpec, compare_methods, run_experiment
from mdfs.selectors import METHODS, SEEDED, SelectionError, SelectorConfig, select

SAMPLE_NAME = "siren-sample"


class UsageError(Exception):
    pass


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("values must be positive integers")
    return values


def _label_col(text):
    try:
        return int(text)
    except ValueError:
        return text


def sample_path() -> str:
    return str(resources.files("mdfs").joinpath("samples", "siren.csv"))


def load_input(path, label_col=None):
    if path == SAMPLE_NAME:
        path = sample_path()
    return load_csv(path, label_col)


def _write_atomic(path, text):
    """Write via a temporary file so a failed run leaves nothing behind."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".mdfs-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _envelope(config, results, timing):
    return {"config": config, "results": results, "timing": timing, "version": __version__}


def _dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _selector_config(args, k):
    return SelectorConfig(
        k_target=k,
        seed=args.seed,
        bins=args.bins,
        beta=args.beta,
        mdfs_schedule=args.schedule,
        threads=args.threads,
    )


def _require_seed(args, methods):
    for method in methods:
        if method in SEEDED and args.seed is None and not (method == "mdfs" and args.schedule == "round-robin"):
            raise UsageError(f"--seed is required for method {method!r}")


def _run_selection(args, rank_all):
    _require_seed(args, [args.method])
    dataset = load_input(args.input, args.label_col)
    k = dataset.m if rank_all else args.k
    if k is None:
        raise UsageError("--k is required")
    start = time.perf_counter()
    result = select(args.method, dataset, _selector_config(args, k))
    elapsed = time.perf_counter() - start
    config = {
        "command": args.command,
        "input": args.input,
        "label_col": args.label_col,
        "method": result.method,
        "n": dataset.n,
        "m": dataset.m,
        "c": dataset.class_count,
        "backend": _backend.current(),
    }
    if args.format == "json":
        return _dump_json(_envelope(config, result.to_dict(dataset.feature_names), {"seconds": elapsed}))
    rows = [
        (pos + 1, f, dataset.feature_names[f], repr(s), p)
        for pos, (f, s, p) in enumerate(zip(result.selected, result.scores, result.provenance))
    ]
    return _csv_text(["position", "index", "name", "score", "provenance"], rows)


def cmd_rank(args):
    return _run_selection(args, rank_all=True)


def cmd_select(args):
    return _run_selection(args, rank_all=False)


def _parse_spec(doc, args):
    """Build an ExperimentSpec, collecting every problem before giving up."""
    errors = []
    if not isinstance(doc, dict):
        raise UsageError("experiment spec must be a JSON object")
    known = {"input", "label_col", "generate", "selectors", "classifiers", "subset_sizes",
             "folds", "repeats", "seed", "baseline", "alpha"}
    unknown = sorted(set(doc) - known)
    if unknown:
        errors.append(f"unknown spec keys: {unknown}")

    dataset = None
    source = doc.get("input", args.input)
    if "generate" in doc and source is None:
        try:
            gen = doc["generate"] or {}
            if "groups" in gen:
                spec = make_siren_spec(**gen)
            else:
                spec = siren_benchmark_spec(**gen)
            dataset = generate_siren_dataset(spec).dataset
        except (TypeError, ValueError) as exc:
            errors.append(f"generate: {exc}")
    elif source is not None:
        try:
            dataset = load_input(source, doc.get("label_col", args.label_col))
        except DataError as exc:
            errors.append(f"input: {exc}")
    else:
        errors.append("spec needs 'input' or 'generate' (or pass --input)")

    selectors = []
    raw_selectors = doc.get("selectors")
    if not isinstance(raw_selectors, list) or not raw_selectors:
        errors.append("'selectors' must be a non-empty list")
        raw_selectors = []
    for i, entry in enumerate(raw_selectors):
        if isinstance(entry, str):
            entry = {"method": entry}
        if not isinstance(entry, dict) or "method" not in entry:
            errors.append(f"selectors[{i}]: expected a method id or an object with 'method'")
            continue
        params = dict(entry.get("params", {}))
        params.setdefault("bins", args.bins)
        params.setdefault("beta", args.beta)
        if entry["method"] == "mdfs":
            params.setdefault("mdfs_schedule", args.schedule)
        selectors.append(MethodSpec(entry.get("label", entry["method"]), entry["method"], params))

    def _int(key, default):
        value = doc.get(key, default)
        if not isinstance(value, int) or isinstance(value, bool):
            errors.append(f"'{key}' must be an integer, got {value!r}")
            return default
        return value

    sizes = doc.get("subset_sizes", [10])
    if not isinstance(sizes, list) or not all(isinstance(v, int) for v in sizes):
        errors.append("'subset_sizes' must be a list of integers")
        sizes = [1]
    classifiers = doc.get("classifiers", ["nb"])
    if not isinstance(classifiers, list):
        errors.append("'classifiers' must be a list")
        classifiers = []
    seed = args.seed if args.seed is not None else _int("seed", 0)
    folds = _int("folds", 10)
    repeats = _int("repeats", 10)
    baseline = doc.get("baseline", "mdfs")
    if selectors and baseline not in [s.label for s in selectors]:
        errors.append(f"baseline {baseline!r} is not one of the selector labels")
    alpha = doc.get("alpha", 0.05)
    if not isinstance(alpha, (int, float)) or not 0 < alpha < 1:
        errors.append(f"'alpha' must lie in (0, 1), got {alpha!r}")

    spec = None
    if dataset is not None:
        spec = ExperimentSpec(dataset, tuple(selectors), tuple(classifiers), tuple(sizes), folds, repeats, seed)
        errors.extend(spec.problems())
    if errors:
        raise UsageError("invalid experiment spec:\n  " + "\n  ".join(errors))
    return spec, baseline, alpha


def cmd_evaluate(args):
    if args.spec is None:
        raise UsageError("--spec is required")
    try:
        with open(args.spec, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read spec {args.spec}: {exc}") from exc
    spec, baseline, alpha = _parse_spec(doc, args)
    report = run_experiment(spec, threads=args.threads)
    marks = compare_methods(report, baseline, alpha)
    table = []
    for clf in report.classifiers:
        for sel in report.selectors:
            table.append({
                "classifier": clf,
                "selector": sel,
                "mean": {str(k): report.mean(sel, clf, k) for k in report.subset_sizes},
                "std": {str(k): report.std(sel, clf, k) for k in report.subset_sizes},
                "marker": {str(k): marks[clf][sel][k] for k in report.subset_sizes},
            })
    config = {
        "command": "evaluate", "spec": doc, "baseline": baseline, "alpha": alpha,
        "seed": spec.seed, "n": spec.dataset.n, "m": spec.dataset.m, "c": spec.dataset.class_count,
        "backend": _backend.current(),
    }
    timing = {sel: {"total_seconds": float(sum(v)), "per_fold": [float(t) for t in v]}
              for sel, v in report.timing.items()}
    if args.format == "json":
        results = {"table": table, **report.to_dict()}
        return _dump_json(_envelope(config, results, timing))
    header = ["classifier", "selector"] + [f"k={k}" for k in report.subset_sizes]
    rows = [
        [row["classifier"], row["selector"]]
        + [f"{row['mean'][str(k)]:.4f}{row['marker'][str(k)]}" for k in report.subset_sizes]
        for row in table
    ]
    return _csv_text(header, rows)


def scaling_exponent(ms, seconds) -> float:
    """Least-squares slope of log(time) against log(m)."""
    if len(ms) < 2:
        return float("nan")
    return float(np.polyfit(np.log(ms), np.log(seconds), 1)[0])


def bench_dataset(m, n, classes=4, seed=0):
    """Generated data with half the features informative, spread over all pairs."""
    per_class = [n // classes + (1 if i < n % classes else 0) for i in range(classes)]
    gaps = np.full((classes, classes), 1.0)
    pairs = [(i, j) for i in range(classes) for j in range(i + 1, classes)]
    groups = [(pairs[f % len(pairs)], [f]) for f in range(m // 2)]
    return generate_siren_dataset(make_siren_spec(per_class, gaps, groups, m, seed)).dataset


def bench_grid(methods, m_values, n_values, classes=4, repeats=5, k_fraction=1.0, seed=0, bins=10):
    """Median wall time per (method, m, n) on generated data.

    Repeats are interleaved across the grid (every cell once per round) so that
    slow drift in machine speed does not bias one cell against another.
    """
    cells = []
    for n in n_values:
        for m in m_values:
            data = bench_dataset(m, n, classes, seed)
            k = max(1, int(round(k_fraction * m)))
            for method in methods:
                cells.append((method, m, n, k, data, SelectorConfig(k_target=k, seed=seed, bins=bins)))
    for method, _, _, _, data, config in cells:
        select(method, data, config)  # warm-up
    runs = [[] for _ in cells]
    # collector pauses triggered by earlier allocations would land on whichever
    # cell happens to be running
    gc.collect()
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(repeats):
            for i, (method, _, _, _, data, config) in enumerate(cells):
                start = time.perf_counter()
                select(method, data, config)
                runs[i].append(time.perf_counter() - start)
    finally:
        if was_enabled:
            gc.enable()
    rows = [
        {"method": method, "m": m, "n": n, "k": k, "median_seconds": statistics.median(r), "runs": r}
        for (method, m, n, k, _, _), r in zip(cells, runs)
    ]
    fits = []
    for method in methods:
        for n in n_values:
            sel = sorted((r for r in rows if r["method"] == method and r["n"] == n), key=lambda r: r["m"])
            fits.append({"method": method, "n": n,
                         "exponent_vs_m": scaling_exponent([r["m"] for r in sel],
                                                           [r["median_seconds"] for r in sel])})
    return rows, fits


def cmd_bench(args):
    methods = args.methods or ["mdfs", "mrmr"]
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise UsageError(f"unknown methods {unknown}")
    if args.backend:
        _backend.set_backend(args.backend)
    seed = 0 if args.seed is None else args.seed
    rows, fits = bench_grid(methods, args.m_values, args.n_values, args.classes, args.repeats,
                            args.k_fraction, seed, args.bins)
    config = {"command": "bench", "methods": methods, "m_values": args.m_values, "n_values": args.n_values,
              "classes": args.classes, "repeats": args.repeats, "k_fraction": args.k_fraction,
              "seed": seed, "backend": _backend.current()}
    timing = {f"{r['method']}/m={r['m']}/n={r['n']}": r["median_seconds"] for r in rows}
    if args.format == "json":
        return _dump_json(_envelope(config, {"cells": rows, "scaling": fits}, timing))
    return _csv_text(["method", "m", "n", "k", "median_seconds"],
                     [[r["method"], r["m"], r["n"], r["k"], repr(r["median_seconds"])] for r in rows])


def build_parser():
    parser = argparse.ArgumentParser(prog="mdfs", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help=f"CSV file, or '{SAMPLE_NAME}' for the bundled generated data")
    common.add_argument("--label-col", type=_label_col, default=None,
                        help="label column name or 0-based index (default: last)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--bins", type=int, default=10)
    common.add_argument("--beta", type=float, default=2.0)
    common.add_argument("--schedule", choices=["random", "round-robin"], default="random")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--output", default=None, help="output file (default: stdout)")
    common.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1)

    for name, fn, helptext in (("rank", cmd_rank, "score and order all features"),
                               ("select", cmd_select, "select K features")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--method", choices=sorted(METHODS), required=True)
        p.add_argument("--k", type=_positive_int, default=None)
        p.set_defaults(func=fn, needs_input=True)

    p = sub.add_parser("evaluate", parents=[common], help="cross-validate selectors x classifiers")
    p.add_argument("--spec", required=True, help="experiment spec JSON file")
    p.set_defaults(func=cmd_evaluate, needs_input=False)

    p = sub.add_parser("bench", parents=[common], help="time selectors on generated data")
    p.add_argument("--method", dest="methods", action="append", choices=sorted(METHODS))
    p.add_argument("--m-values", type=_int_list, default=[128, 256])
    p.add_argument("--n-values", type=_int_list, default=[2000])
    p.add_argument("--classes", type=_positive_int, default=4)
    p.add_argument("--repeats", type=_positive_int, default=5)
    p.add_argument("--k-fraction", type=float, default=1.0,
                   help="K as a fraction of m (default 1.0: full ordering)")
    p.add_argument("--backend", choices=_backend.available(), default=None)
    p.set_defaults(func=cmd_bench, needs_input=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "needs_input", False) and not args.input:
            parser.error("--input is required")
        if args.bins < 2:
            parser.error("--bins must be >= 2")
        if args.command == "bench" and not 0 < args.k_fraction <= 1:
            parser.error("--k-fraction must lie in (0, 1]")
    except SystemExit as exc:  # argparse usage errors, --help, --version
        return exc.code if isinstance(exc.code, int) else 2
    try:
        text = args.func(args)
        _write_atomic(args.output, text)
    except UsageError as exc:
        print(f"mdfs {args.command}: {exc}", file=sys.stderr)
        return 2
    except (DataError, SelectionError, ExperimentError, ValueError, OSError) as exc:
        print(f"mdfs {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
