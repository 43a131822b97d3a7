"""One-versus-one / one-versus-all sub-problems and per-sub-problem feature
ranking lists."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from mdfs import _backend
from mdfs.data import DEFAULT_BINS, Dataset, discretize_all
from mdfs.metrics import chi_square_table, symmetrical_uncertainty_table


@dataclass(frozen=True, eq=False)
class SubProblem:
    """A binary view of the data.

    ``classes`` is ``(i, j)`` for one-vs-one (class i positive) and ``(k,)``
    for class k versus the rest.
    """

    kind: str  # "ovo" | "ova"
    classes: tuple[int, ...]
    positive_idx: np.ndarray
    negative_idx: np.ndarray

    @property
    def id(self) -> str:
        if self.kind == "ovo":
            return f"{self.classes[0]}-{self.classes[1]}"
        return f"{self.classes[0]}-rest"

    def rows(self) -> np.ndarray:
        return np.concatenate([self.positive_idx, self.negative_idx])

    def binary_labels(self) -> np.ndarray:
        """1 for positives, 0 for negatives, aligned with :meth:`rows`."""
        return np.concatenate(
            [np.ones(self.positive_idx.size, np.int64), np.zeros(self.negative_idx.size, np.int64)]
        )


@dataclass(frozen=True, eq=False)
class RankingList:
    subproblem: SubProblem
    order: np.ndarray
    scores: np.ndarray  # aligned with order, non-increasing

    def __len__(self):
        return self.order.size


def one_vs_one_subproblems(dataset: Dataset) -> list[SubProblem]:
    members = [np.flatnonzero(dataset.labels == k) for k in range(dataset.class_count)]
    out = []
    for i in range(dataset.class_count):
        for j in range(i + 1, dataset.class_count):
            out.append(SubProblem("ovo", (i, j), members[i], members[j]))
    return out


def one_vs_all_subproblems(dataset: Dataset) -> list[SubProblem]:
    out = []
    for k in range(dataset.class_count):
        mask = dataset.labels == k
        out.append(SubProblem("ova", (k,), np.flatnonzero(mask), np.flatnonzero(~mask)))
    return out


def rank_order(scores) -> np.ndarray:
    """Indices by descending score, ties by ascending index."""
    scores = np.asarray(scores, dtype=np.float64)
    return np.lexsort((np.arange(scores.size), -scores))


def _ranking(sp, scores):
    order = rank_order(scores)
    return RankingList(sp, order, np.asarray(scores, dtype=np.float64)[order])


def feature_aucs(dataset: Dataset, subproblem: SubProblem, oriented: bool = True) -> np.ndarray:
    """Per-feature AUC on a sub-problem, optionally folded to max(A, 1 - A)."""
    a = _backend.auc_columns(dataset.values, subproblem.positive_idx, subproblem.negative_idx)
    return np.maximum(a, 1.0 - a) if oriented else a


def rank_features_by_auc(dataset: Dataset, subproblem: SubProblem, oriented: bool = True) -> RankingList:
    return _ranking(subproblem, feature_aucs(dataset, subproblem, oriented))


def metric_scores(codes, bin_counts, binary_labels, metric: str) -> np.ndarray:
    """CHI or SU of every discretized column against a 0/1 label vector."""
    tables = _backend.contingency_tables(codes, binary_labels, int(bin_counts.max()), 2)
    metric = metric.lower()
    if metric == "chi":
        return chi_square_table(tables)
    if metric == "su":
        return symmetrical_uncertainty_table(tables)
    raise ValueError(f"unknown metric {metric!r}; expected 'chi' or 'su'")


def rank_features_by_metric(dataset: Dataset, subproblem: SubProblem, metric: str,
                            bins: int = DEFAULT_BINS) -> RankingList:
    """Rank by CHI or SU, discretizing on the sub-problem's own rows."""
    rows = subproblem.rows()
    codes, counts = discretize_all(dataset.values[rows], bins)
    return _ranking(subproblem, metric_scores(codes, counts, subproblem.binary_labels(), metric))


def ranking_lists(dataset: Dataset, subproblems, scorer, threads: int = 1) -> list[RankingList]:
    """Apply ``scorer(dataset, subproblem)`` to each sub-problem, keeping input order."""
    if threads <= 1 or len(subproblems) <= 1:
        return [scorer(dataset, sp) for sp in subproblems]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda sp: scorer(dataset, sp), subproblems))
