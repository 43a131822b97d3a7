"""Repeated stratified cross-validation of (selector, classifier, K) cells
scored by MAUC, with pairwise Wilcoxon comparisons."""
from __future__ import annotations

import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from mdfs.classifiers import CLASSIFIERS
from mdfs.data import Dataset, stratified_folds
from mdfs.metrics import WilcoxonResult, mauc_of_scores, wilcoxon_signed_rank
from mdfs.selectors import METHODS, SelectionResult, SelectorConfig, select

MARKERS = {"worse": "†", "better": "‡", "no-difference": ""}


class ExperimentError(ValueError):
    pass


def derive_seed(*parts) -> int:
    """Stable 32-bit seed from integers and strings."""
    words = [zlib.crc32(p.encode()) if isinstance(p, str) else int(p) & 0xFFFFFFFF for p in parts]
    return int(np.random.SeedSequence(words).generate_state(1)[0])


@dataclass(frozen=True)
class MethodSpec:
    """One selector in an experiment.

    ``method`` is a registered id (see :data:`mdfs.selectors.METHODS`) or a
    callable with the selector signature. ``params`` are extra
    :class:`SelectorConfig` fields; ``k_target`` and ``seed`` are set per fold.
    """

    label: str
    method: Union[str, Callable[[Dataset, SelectorConfig], SelectionResult]]
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentSpec:
    dataset: Dataset
    selectors: tuple[MethodSpec, ...]
    classifiers: tuple[str, ...] = ("nb",)
    subset_sizes: tuple[int, ...] = (10,)
    folds: int = 10
    repeats: int = 10
    seed: int = 0

    def problems(self) -> list[str]:
        """Every validation failure, empty when the spec is usable."""
        errs = []
        if not self.selectors:
            errs.append("no selectors given")
        labels = [s.label for s in self.selectors]
        if len(set(labels)) != len(labels):
            errs.append(f"duplicate selector labels: {labels}")
        for s in self.selectors:
            if isinstance(s.method, str) and s.method not in METHODS:
                errs.append(f"unknown method {s.method!r} for selector {s.label!r}")
            bad = set(s.params) - set(SelectorConfig.__dataclass_fields__) | (set(s.params) & {"k_target", "seed"})
            if bad:
                errs.append(f"selector {s.label!r}: unsupported params {sorted(bad)}")
        if not self.classifiers:
            errs.append("no classifiers given")
        for c in self.classifiers:
            if c not in CLASSIFIERS:
                errs.append(f"unknown classifier {c!r}; choose from {sorted(CLASSIFIERS)}")
        if not self.subset_sizes:
            errs.append("no subset sizes given")
        for k in self.subset_sizes:
            if not 1 <= k <= self.dataset.m:
                errs.append(f"subset size {k} outside 1..{self.dataset.m}")
        if self.folds < 2:
            errs.append(f"folds must be >= 2, got {self.folds}")
        if self.repeats < 1:
            errs.append(f"repeats must be >= 1, got {self.repeats}")
        return errs


@dataclass(eq=False)
class EvalReport:
    """Fold-level MAUC values per (selector, classifier, K), in (repeat, fold) order."""

    selectors: tuple[str, ...]
    classifiers: tuple[str, ...]
    subset_sizes: tuple[int, ...]
    folds: int
    repeats: int
    seed: int
    fold_values: dict  # (selector, classifier, K) -> np.ndarray
    wilcoxon: dict  # (sel_a, sel_b, classifier, K) -> WilcoxonResult, y = sel_b
    audit: list
    timing: dict = field(default_factory=dict)  # selector -> list of seconds per fold

    def mean(self, selector, classifier, k) -> float:
        return float(np.mean(self.fold_values[(selector, classifier, k)]))

    def std(self, selector, classifier, k) -> float:
        return float(np.std(self.fold_values[(selector, classifier, k)], ddof=1)) if self.folds * self.repeats > 1 else 0.0

    def __eq__(self, other):
        """Equality ignores wall-clock timing."""
        if not isinstance(other, EvalReport):
            return NotImplemented
        return (
            (self.selectors, self.classifiers, self.subset_sizes, self.folds, self.repeats, self.seed)
            == (other.selectors, other.classifiers, other.subset_sizes, other.folds, other.repeats, other.seed)
            and self.fold_values.keys() == other.fold_values.keys()
            and all(np.array_equal(v, other.fold_values[k]) for k, v in self.fold_values.items())
            and self.wilcoxon == other.wilcoxon
        )

    def to_dict(self) -> dict:
        results = []
        for (sel, clf, k), vals in self.fold_values.items():
            results.append({
                "selector": sel, "classifier": clf, "k": k,
                "mean": self.mean(sel, clf, k), "std": self.std(sel, clf, k),
                "folds": [float(v) for v in vals],
            })
        tests = [
            {"a": a, "b": b, "classifier": clf, "k": k, "statistic": r.statistic,
             "p_value": r.p_value, "n_effective": r.n_effective, "decision": r.decision}
            for (a, b, clf, k), r in self.wilcoxon.items()
        ]
        return {"results": results, "wilcoxon": tests}


def fold_mauc(scores, labels) -> float:
    """MAUC over the classes present in a test fold.

    Small classes can miss a fold entirely; their pairs are left out rather
    than undefined.
    """
    labels = np.asarray(labels)
    present = np.unique(labels)
    if present.size < 2:
        raise ExperimentError("test fold holds fewer than two classes")
    remap = np.searchsorted(present, labels)
    return mauc_of_scores(np.asarray(scores)[:, present], remap)


def _run_fold(spec: ExperimentSpec, repeat, fold, train_idx, test_idx, fold_seed):
    ds = spec.dataset
    try:
        train = ds.subset(train_idx)
    except ValueError as exc:
        raise ExperimentError(f"repeat {repeat}, fold {fold}: training split invalid: {exc}") from exc
    test_values = ds.values[test_idx]
    test_labels = ds.labels[test_idx]
    k_max = max(spec.subset_sizes)
    values, timing, audit = {}, {}, []
    for ms in spec.selectors:
        config = SelectorConfig(k_target=k_max, seed=derive_seed(fold_seed, ms.label), **ms.params)
        start = time.perf_counter()
        try:
            if isinstance(ms.method, str):
                result = select(ms.method, train, config)
            else:
                result = ms.method(train, config)
        except Exception as exc:
            raise ExperimentError(f"selector {ms.label!r} failed in repeat {repeat}, fold {fold}: {exc}") from exc
        timing[ms.label] = time.perf_counter() - start
        seen = result.source_rows if result.source_rows is not None else train.row_ids
        audit.append({
            "repeat": repeat, "fold": fold, "selector": ms.label,
            "rows_seen": np.asarray(seen), "test_rows": ds.row_ids[test_idx],
        })
        # every selector here builds its subset greedily, so the K-prefix of a
        # K_max run is exactly the K run
        for clf in spec.classifiers:
            for k in spec.subset_sizes:
                cols = list(result.selected[:k])
                try:
                    scores = CLASSIFIERS[clf](train, cols, test_values)
                except Exception as exc:
                    raise ExperimentError(
                        f"classifier {clf!r} failed for selector {ms.label!r}, K={k}, "
                        f"repeat {repeat}, fold {fold}: {exc}"
                    ) from exc
                values[(ms.label, clf, k)] = fold_mauc(scores, test_labels)
    return values, timing, audit


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> EvalReport:
    """Cross-validate every configuration; selection sees training rows only."""
    problems = spec.problems()
    if problems:
        raise ExperimentError("; ".join(problems))
    tasks = []
    for r in range(spec.repeats):
        repeat_seed = derive_seed(spec.seed, r)
        assignment = stratified_folds(spec.dataset.labels, spec.folds, repeat_seed)
        for f in range(spec.folds):
            train_idx, test_idx = assignment.split(f)
            tasks.append((r, f, train_idx, test_idx, derive_seed(repeat_seed, f)))

    def work(task):
        return _run_fold(spec, *task)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outputs = list(pool.map(work, tasks))
    else:
        outputs = [work(t) for t in tasks]

    labels = tuple(s.label for s in spec.selectors)
    keys = [(s, c, k) for s in labels for c in spec.classifiers for k in spec.subset_sizes]
    fold_values = {key: np.array([out[0][key] for out in outputs]) for key in keys}
    timing = {s: [out[1][s] for out in outputs] for s in labels}
    audit = [rec for out in outputs for rec in out[2]]

    wilcoxon = {}
    for ia, a in enumerate(labels):
        for b in labels[ia + 1 :]:
            for c in spec.classifiers:
                for k in spec.subset_sizes:
                    wilcoxon[(a, b, c, k)] = wilcoxon_signed_rank(fold_values[(a, c, k)], fold_values[(b, c, k)])
    return EvalReport(
        labels, tuple(spec.classifiers), tuple(spec.subset_sizes), spec.folds, spec.repeats,
        spec.seed, fold_values, wilcoxon, audit, timing,
    )


def compare_methods(report: EvalReport, baseline: str, alpha: float = 0.05) -> dict:
    """Mark each comparator per (classifier, K): † worse than the baseline,
    ‡ better, empty string when no significant difference.

    Returns ``{classifier: {selector: {K: marker}}}``; the baseline row is all
    empty strings.
    """
    if baseline not in report.selectors:
        raise ExperimentError(f"baseline {baseline!r} not in report selectors {report.selectors}")
    table: dict = {}
    for clf in report.classifiers:
        table[clf] = {}
        for sel in report.selectors:
            row = {}
            for k in report.subset_sizes:
                if sel == baseline:
                    row[k] = ""
                    continue
                base_vals = report.fold_values[(baseline, clf, k)]
                other_vals = report.fold_values[(sel, clf, k)]
                if base_vals.shape != other_vals.shape:
                    raise ExperimentError(f"fold structure differs between {baseline!r} and {sel!r}")
                res: WilcoxonResult = wilcoxon_signed_rank(base_vals, other_vals, alpha)
                row[k] = MARKERS[res.decision]
            table[clf][sel] = row
    return table
