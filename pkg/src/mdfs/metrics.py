"""Scoring functions: AUC/MAUC, chi-square, entropy-based measures, FSDD and
the Wilcoxon signed-rank comparison."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from mdfs import _backend
from mdfs.data import Dataset, DiscretizedFeature


class DegenerateFeatureWarning(UserWarning):
    """A score was requested for a feature with zero variance."""


@dataclass(frozen=True)
class PairwiseAucTable:
    """``a[i, j]`` is the AUC of score column i on classes i (positive) vs j."""

    a: np.ndarray

    @property
    def c(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float
    p_value: float
    n_effective: int
    decision: str  # "better" | "worse" | "no-difference", for y relative to x


class FsddScore(NamedTuple):
    value: float
    degenerate: bool


def _finite_1d(x, name):
    arr = np.asarray(x, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def auc(scores_pos, scores_neg) -> float:
    """Probability that a positive outscores a negative, ties counting one half.

    One sort over the pooled scores with midrank tie handling.
    """
    pos = _finite_1d(scores_pos, "scores_pos")
    neg = _finite_1d(scores_neg, "scores_neg")
    pooled = np.concatenate([pos, neg])[:, None]
    idx_pos = np.arange(pos.size)
    idx_neg = np.arange(pos.size, pooled.shape[0])
    return float(_backend.auc_columns(pooled, idx_pos, idx_neg)[0])


def auc_by_enumeration(scores_pos, scores_neg) -> float:
    """O(P*N) pair count; slow, used as a cross-check."""
    pos = _finite_1d(scores_pos, "scores_pos")
    neg = _finite_1d(scores_neg, "scores_neg")
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (pos.size * neg.size)


def mauc_from_table(table: PairwiseAucTable | np.ndarray) -> float:
    a = np.asarray(table.a if isinstance(table, PairwiseAucTable) else table, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("pairwise AUC table must be square")
    c = a.shape[0]
    if c < 2:
        raise ValueError(f"MAUC needs at least 2 classes, got {c}")
    total = 0.0
    for i in range(c):
        for j in range(i + 1, c):
            total += (a[i, j] + a[j, i]) / 2.0
    return 2.0 * total / (c * (c - 1))


def pairwise_auc_table(scores, labels) -> PairwiseAucTable:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.ndim != 2:
        raise ValueError("score matrix must be 2-D")
    n, c = scores.shape
    if labels.shape != (n,):
        raise ValueError(f"score matrix has {n} rows but {labels.size} labels were given")
    if not np.all(np.isfinite(scores)):
        raise ValueError("score matrix contains non-finite values")
    members = [np.flatnonzero(labels == k) for k in range(c)]
    absent = [k for k, rows in enumerate(members) if rows.size == 0]
    if absent:
        raise ValueError(f"classes absent from labels: {absent}")
    if labels.min() < 0 or labels.max() >= c:
        raise ValueError(f"labels must lie in [0, {c - 1}]")
    a = np.full((c, c), np.nan)
    for i in range(c):
        for j in range(c):
            if i != j:
                a[i, j] = _backend.auc_columns(scores[:, i : i + 1], members[i], members[j])[0]
    return PairwiseAucTable(a)


def mauc_of_scores(scores, labels) -> float:
    """MAUC of an n-by-c score matrix against true labels."""
    return mauc_from_table(pairwise_auc_table(scores, labels))


def _contingency(a, b):
    a = np.asarray(a, dtype=np.int64).ravel()
    b = np.asarray(b, dtype=np.int64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        raise ValueError("empty input")
    _, a = np.unique(a, return_inverse=True)
    _, b = np.unique(b, return_inverse=True)
    return _backend.contingency_tables(a[:, None], b, a.max() + 1, b.max() + 1)[0]


def chi_square_table(tables) -> np.ndarray:
    """Chi-square statistic of each contingency table in a ``(..., r, k)`` stack."""
    obs = np.asarray(tables, dtype=np.float64)
    n = obs.sum(axis=(-2, -1), keepdims=True)
    expected = obs.sum(axis=-1, keepdims=True) * obs.sum(axis=-2, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        expected = expected / n
        cell = np.where(expected > 0, (obs - expected) ** 2 / expected, 0.0)
    return cell.sum(axis=(-2, -1))


def _entropy_of_counts(counts, axis=-1):
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum(axis=axis, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = counts / total
        terms = np.where(counts > 0, -p * np.log2(p), 0.0)
    return terms.sum(axis=axis)


def mutual_information_table(tables) -> np.ndarray:
    """I(row; column) in bits for each table of a ``(..., r, k)`` stack.

    Computed as H(column) - H(column | row).
    """
    obs = np.asarray(tables, dtype=np.float64)
    n = obs.sum(axis=(-2, -1))
    h_col = _entropy_of_counts(obs.sum(axis=-2))
    row_tot = obs.sum(axis=-1)
    h_col_given_row = (row_tot / n[..., None] * _entropy_of_counts(obs)).sum(axis=-1)
    # rounding can leave tiny negatives for independent variables
    return np.maximum(h_col - h_col_given_row, 0.0)


def symmetrical_uncertainty_table(tables) -> np.ndarray:
    obs = np.asarray(tables, dtype=np.float64)
    h_row = _entropy_of_counts(obs.sum(axis=-1))
    h_col = _entropy_of_counts(obs.sum(axis=-2))
    mi = mutual_information_table(obs)
    denom = h_row + h_col
    with np.errstate(divide="ignore", invalid="ignore"):
        su = np.where(denom > 0, 2.0 * mi / denom, 0.0)
    return np.clip(su, 0.0, 1.0)


def chi_square(feature: DiscretizedFeature | np.ndarray, labels, c: int | None = None) -> float:
    """Chi-square statistic of a discretized feature against class labels.

    Cells whose expected count is zero contribute nothing.
    """
    codes = feature.codes if isinstance(feature, DiscretizedFeature) else feature
    codes = np.asarray(codes, dtype=np.int64).ravel()
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if codes.shape != labels.shape:
        raise ValueError(f"length mismatch: {codes.size} vs {labels.size}")
    n_codes = int(codes.max()) + 1
    n_classes = max(int(labels.max()) + 1, c or 0)
    table = _backend.contingency_tables(codes[:, None], labels, n_codes, n_classes)[0]
    return float(chi_square_table(table))


def entropy(codes) -> float:
    """Shannon entropy in bits of the empirical code distribution."""
    codes = np.asarray(codes, dtype=np.int64).ravel()
    if codes.size == 0:
        raise ValueError("entropy of an empty sequence")
    _, counts = np.unique(codes, return_counts=True)
    return float(_entropy_of_counts(counts))


def mutual_information(a, b) -> float:
    return float(mutual_information_table(_contingency(a, b)))


def symmetrical_uncertainty(a, b) -> float:
    """2 I(a;b) / (H(a) + H(b)); zero when both are constant."""
    return float(symmetrical_uncertainty_table(_contingency(a, b)))


def fsdd_scores(values, labels, c: int, beta: float = 2.0) -> tuple[np.ndarray, np.ndarray]:
    """Distance-discriminant utility for every column of ``values``.

    Returns ``(scores, degenerate)``: columns with zero overall variance get
    score 0 and ``degenerate=True``.
    """
    x = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n = x.shape[0]
    if n < 2:
        raise ValueError("FSDD needs at least two instances")
    mean = x.mean(axis=0)
    total_var = x.var(axis=0, ddof=1)
    between = np.zeros(x.shape[1])
    within = np.zeros(x.shape[1])
    for k in range(c):
        xk = x[labels == k]
        nk = xk.shape[0]
        if nk == 0:
            raise ValueError(f"class {k} has no instances")
        mk = xk.mean(axis=0)
        between += nk / n * (mk - mean) ** 2
        if nk > 1:
            within += nk / n * xk.var(axis=0, ddof=1)
    # relative guard: a constant column can show float noise in its variance
    scale = np.maximum(np.abs(mean), 1.0)
    degenerate = total_var <= (1e-12 * scale) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = np.where(degenerate, 0.0, (between - beta * within) / total_var)
    return scores, degenerate


def fsdd_score(dataset: Dataset, feature: int, beta: float = 2.0) -> FsddScore:
    scores, degenerate = fsdd_scores(
        dataset.values[:, feature : feature + 1], dataset.labels, dataset.class_count, beta
    )
    if degenerate[0]:
        warnings.warn(f"feature {feature} is constant; FSDD score set to 0", DegenerateFeatureWarning)
    return FsddScore(float(scores[0]), bool(degenerate[0]))


def wilcoxon_signed_rank(x, y, alpha: float = 0.05) -> WilcoxonResult:
    """Two-sided signed-rank test of ``y - x``.

    The statistic is the signed-rank sum (positive when y tends to exceed x).
    Zero differences are dropped, tied magnitudes get midranks and the p-value
    uses the normal approximation with tie-corrected variance and continuity
    correction. Fewer than 5 non-zero differences yield p = 1.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    d = y - x
    d = d[d != 0]
    n = d.size
    if n < 5:
        return WilcoxonResult(0.0, 1.0, int(n), "no-difference")
    from scipy.stats import rankdata

    mag = np.abs(d)
    ranks = rankdata(mag)
    statistic = float(np.sum(np.sign(d) * ranks))
    _, ties = np.unique(mag, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 6.0 - np.sum(ties**3 - ties) / 12.0
    # the signed-rank sum moves in steps of 2, so the continuity correction is 1
    z = max(abs(statistic) - 1.0, 0.0) / math.sqrt(var)
    p_value = min(1.0, math.erfc(z / math.sqrt(2.0)))
    if p_value > alpha:
        decision = "no-difference"
    else:
        decision = "better" if statistic > 0 else "worse"
    return WilcoxonResult(statistic, p_value, int(n), decision)
