"""Score-matrix classifiers for the evaluation harness: Gaussian naive Bayes
and k-nearest-neighbour."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from mdfs.data import Dataset

VAR_REL_FLOOR = 1e-9
VAR_ABS_FLOOR = 1e-12


@dataclass(frozen=True)
class NaiveBayesModel:
    features: np.ndarray  # column indices the model was fitted on
    priors: np.ndarray  # (c,)
    means: np.ndarray  # (c, k)
    variances: np.ndarray  # (c, k)


def _subset(feature_subset, m):
    cols = np.asarray(feature_subset, dtype=np.int64).ravel()
    if cols.size == 0:
        raise ValueError("feature subset is empty")
    if cols.min() < 0 or cols.max() >= m:
        raise ValueError(f"feature subset has indices outside 0..{m - 1}")
    return cols


def nb_train(train: Dataset, feature_subset) -> NaiveBayesModel:
    """Fit one Gaussian per (class, feature) on the chosen columns.

    Priors are Laplace-smoothed; each variance is floored at 1e-9 times the
    feature's overall variance (never below 1e-12).
    """
    cols = _subset(feature_subset, train.m)
    x = train.values[:, cols]
    c = train.class_count
    counts = train.class_counts()
    if np.any(counts == 0):
        raise ValueError(f"classes absent from training data: {np.flatnonzero(counts == 0).tolist()}")
    floor = np.maximum(VAR_REL_FLOOR * x.var(axis=0), VAR_ABS_FLOOR)
    means = np.empty((c, cols.size))
    variances = np.empty((c, cols.size))
    for k in range(c):
        xk = x[train.labels == k]
        means[k] = xk.mean(axis=0)
        variances[k] = np.maximum(xk.var(axis=0), floor)
    priors = (counts + 1.0) / (train.n + c)
    return NaiveBayesModel(cols, priors, means, variances)


def nb_log_posterior(model: NaiveBayesModel, values) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64)[:, model.features]
    ll = -0.5 * (
        np.log(2.0 * np.pi * model.variances)[None, :, :]
        + (x[:, None, :] - model.means[None, :, :]) ** 2 / model.variances[None, :, :]
    ).sum(axis=2)
    joint = ll + np.log(model.priors)[None, :]
    return joint - logsumexp(joint, axis=1, keepdims=True)


def nb_score(model: NaiveBayesModel, test) -> np.ndarray:
    """Posterior class probabilities, one row per test instance.

    ``test`` is a :class:`Dataset` or a bare feature matrix.
    """
    return np.exp(nb_log_posterior(model, getattr(test, "values", test)))


def knn_score(train: Dataset, feature_subset, test, k: int = 1) -> np.ndarray:
    """Class frequencies among the k nearest training points (Euclidean).

    Equal distances are resolved in favour of the lower training index.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    cols = _subset(feature_subset, train.m)
    xtr = np.ascontiguousarray(train.values[:, cols])
    xte = np.ascontiguousarray(np.asarray(getattr(test, "values", test), dtype=np.float64)[:, cols])
    k = min(k, xtr.shape[0])
    c = train.class_count
    out = np.zeros((xte.shape[0], c))
    chunk = max(1, (1 << 22) // max(1, xtr.size))
    for start in range(0, xte.shape[0], chunk):
        block = xte[start : start + chunk]
        # exact differences rather than the |a|^2 - 2ab + |b|^2 expansion,
        # so equal distances compare equal and the index tie rule holds
        d2 = ((block[:, None, :] - xtr[None, :, :]) ** 2).sum(axis=2)
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
        votes = train.labels[nearest]
        for kk in range(c):
            out[start : start + block.shape[0], kk] = (votes == kk).sum(axis=1)
    return out / k


CLASSIFIERS = {
    "nb": lambda train, cols, test: nb_score(nb_train(train, cols), test),
    "1nn": lambda train, cols, test: knn_score(train, cols, test, 1),
}
