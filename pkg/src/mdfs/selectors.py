"""Feature selectors: MDFS and the eight filter baselines it is compared with.

Every selector takes a :class:`~mdfs.data.Dataset` and a
:class:`SelectorConfig` and returns a :class:`SelectionResult` whose
``selected`` list is ordered by selection step.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from mdfs import _backend
from mdfs.data import DEFAULT_BINS, Dataset, discretize_all
from mdfs.decompose import (
    RankingList,
    feature_aucs,
    metric_scores,
    one_vs_all_subproblems,
    one_vs_one_subproblems,
    rank_features_by_auc,
    rank_order,
    ranking_lists,
)
from mdfs.metrics import (
    chi_square_table,
    fsdd_scores,
    mutual_information_table,
    symmetrical_uncertainty_table,
)


class SelectionError(ValueError):
    pass


@dataclass(frozen=True)
class SelectorConfig:
    k_target: int
    seed: int | None = None
    bins: int = DEFAULT_BINS
    beta: float = 2.0
    relieff_neighbors: int = 10
    relieff_iterations: int | None = None  # None: ceil(log2 n)
    mdfs_schedule: str = "random"
    oriented_auc: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.k_target < 1:
            raise SelectionError(f"k_target must be >= 1, got {self.k_target}")
        if self.bins < 2:
            raise SelectionError(f"bins must be >= 2, got {self.bins}")
        if self.relieff_neighbors < 1:
            raise SelectionError(f"relieff_neighbors must be >= 1, got {self.relieff_neighbors}")
        if self.relieff_iterations is not None and self.relieff_iterations < 1:
            raise SelectionError("relieff_iterations must be >= 1")
        if self.mdfs_schedule not in ("random", "round-robin"):
            raise SelectionError(f"unknown schedule {self.mdfs_schedule!r}")

    def with_k(self, k: int) -> "SelectorConfig":
        return SelectorConfig(**{**asdict(self), "k_target": k})


@dataclass(frozen=True, eq=False)
class SelectionResult:
    selected: tuple[int, ...]
    scores: tuple[float, ...]
    provenance: tuple[str, ...]
    method: dict
    source_rows: np.ndarray = field(default=None, repr=False)

    def __eq__(self, other):
        if not isinstance(other, SelectionResult):
            return NotImplemented
        return (
            self.selected == other.selected
            and self.provenance == other.provenance
            and self.method == other.method
            and np.allclose(self.scores, other.scores, rtol=0, atol=0, equal_nan=True)
        )

    def prefix(self, k: int) -> "SelectionResult":
        return SelectionResult(
            self.selected[:k], self.scores[:k], self.provenance[:k],
            {**self.method, "k_target": k}, self.source_rows,
        )

    def to_dict(self, feature_names=None) -> dict:
        out = {
            "selected": list(self.selected),
            "scores": [float(s) for s in self.scores],
            "provenance": list(self.provenance),
            "method": dict(self.method),
        }
        if feature_names is not None:
            out["names"] = [feature_names[j] for j in self.selected]
        return out


def _check_k(dataset: Dataset, config: SelectorConfig):
    if config.k_target > dataset.m:
        raise SelectionError(f"cannot select K={config.k_target} features from m={dataset.m}")


def _method(name, config, **extra):
    cfg = {k: v for k, v in asdict(config).items() if k != "threads"}
    return {"id": name, **cfg, **extra}


def _result(dataset, chosen, scores, provenance, method):
    return SelectionResult(
        tuple(int(f) for f in chosen),
        tuple(float(s) for s in scores),
        tuple(str(p) for p in provenance),
        method,
        dataset.row_ids,
    )


def _top_k(dataset, scores, config, name, **extra):
    order = rank_order(scores)[: config.k_target]
    return _result(
        dataset,
        order,
        np.asarray(scores)[order],
        [f"rank {r + 1}" for r in range(order.size)],
        _method(name, config, **extra),
    )


def schedule_lists(lists: list[RankingList], k: int, schedule: str, rng=None):
    """Pop features from ranking lists until ``k`` distinct ones are collected.

    ``schedule`` is ``"random"`` (uniform choice of list each step, drawn from
    ``rng``) or ``"round-robin"`` (lists visited in order). A popped feature
    that is already selected is discarded. Returns parallel lists of
    (feature, score, list id).
    """
    heads = [0] * len(lists)
    chosen: list[int] = []
    taken: set[int] = set()
    scores: list[float] = []
    origin: list[str] = []
    turn = 0
    while len(chosen) < k:
        live = [i for i, lst in enumerate(lists) if heads[i] < len(lst)]
        if not live:
            raise SelectionError(f"ranking lists exhausted after {len(chosen)} of {k} features")
        if schedule == "random":
            pick = int(rng.integers(len(lists)))
            if heads[pick] >= len(lists[pick]):
                continue
        else:
            pick = turn % len(lists)
            turn += 1
            if heads[pick] >= len(lists[pick]):
                continue
        lst = lists[pick]
        f = int(lst.order[heads[pick]])
        s = float(lst.scores[heads[pick]])
        heads[pick] += 1
        if f not in taken:
            taken.add(f)
            chosen.append(f)
            scores.append(s)
            origin.append(lst.subproblem.id)
    return chosen, scores, origin


def select_mdfs(dataset: Dataset, config: SelectorConfig) -> SelectionResult:
    """Rank features by AUC on every class pair, then collect the best unused
    feature of a scheduled pair until K features are held."""
    _check_k(dataset, config)
    if config.mdfs_schedule == "random" and config.seed is None:
        raise SelectionError("mdfs with the random schedule needs a seed")
    subproblems = one_vs_one_subproblems(dataset)
    lists = ranking_lists(
        dataset,
        subproblems,
        lambda d, sp: rank_features_by_auc(d, sp, config.oriented_auc),
        config.threads,
    )
    rng = np.random.default_rng(config.seed) if config.mdfs_schedule == "random" else None
    chosen, scores, origin = schedule_lists(lists, config.k_target, config.mdfs_schedule, rng)
    return _result(dataset, chosen, scores, origin, _method("mdfs", config))


def maucd_scores(dataset: Dataset, oriented: bool = True) -> np.ndarray:
    subproblems = one_vs_one_subproblems(dataset)
    per_pair = np.vstack([feature_aucs(dataset, sp, oriented) for sp in subproblems])
    return per_pair.mean(axis=0)


def select_maucd(dataset: Dataset, config: SelectorConfig) -> SelectionResult:
    """Top-K by the mean pairwise AUC of each feature taken as a classifier."""
    _check_k(dataset, config)
    return _top_k(dataset, maucd_scores(dataset, config.oriented_auc), config, "maucd")


def ranking_scores(dataset: Dataset, metric: str, bins: int = DEFAULT_BINS, beta: float = 2.0) -> np.ndarray:
    metric = metric.lower()
    if metric == "fsdd":
        return fsdd_scores(dataset.values, dataset.labels, dataset.class_count, beta)[0]
    codes, counts = discretize_all(dataset.values, bins)
    tables = _backend.contingency_tables(codes, dataset.labels, int(counts.max()), dataset.class_count)
    if metric == "chi":
        return chi_square_table(tables)
    if metric == "su":
        return symmetrical_uncertainty_table(tables)
    raise SelectionError(f"unknown ranking metric {metric!r}")


def select_ranking(dataset: Dataset, config: SelectorConfig, metric: str) -> SelectionResult:
    _check_k(dataset, config)
    scores = ranking_scores(dataset, metric, config.bins, config.beta)
    return _top_k(dataset, scores, config, metric.lower())


def select_spreadfx(dataset: Dataset, config: SelectorConfig, metric: str) -> SelectionResult:
    """Class-versus-rest ranking lists visited Round-Robin in class order.

    ``metric`` is ``"chi"``, ``"su"`` or ``"auc"``.
    """
    _check_k(dataset, config)
    metric = metric.lower()
    subproblems = one_vs_all_subproblems(dataset)
    if metric == "auc":
        lists = [rank_features_by_auc(dataset, sp, config.oriented_auc) for sp in subproblems]
    else:
        # every class-vs-rest view covers all rows: discretize once
        codes, counts = discretize_all(dataset.values, config.bins)
        lists = []
        for sp in subproblems:
            target = (dataset.labels == sp.classes[0]).astype(np.int64)
            scores = metric_scores(codes, counts, target, metric)
            order = rank_order(scores)
            lists.append(RankingList(sp, order, scores[order]))
    chosen, scores, origin = schedule_lists(lists, config.k_target, "round-robin")
    name = {"chi": "schi", "su": "ssu"}.get(metric, f"spreadfx-{metric}")
    return _result(dataset, chosen, scores, origin, _method(name, config))


def relieff_weights(dataset: Dataset, neighbors: int = 10, iterations: int | None = None,
                    seed: int | None = None) -> np.ndarray:
    """ReliefF weights with Manhattan distance on range-normalised features.

    For each of ``iterations`` sampled instances the k nearest hits pull the
    weight down and, for every other class, the k nearest misses push it up in
    proportion to that class's prior among the non-own classes.
    """
    x = dataset.values
    n = dataset.n
    lo = x.min(axis=0)
    span = x.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    xn = np.where(span > 0, (x - lo) / safe, 0.0)
    labels = dataset.labels
    priors = dataset.class_counts() / n
    t = iterations if iterations is not None else max(1, math.ceil(math.log2(n)))
    rng = np.random.default_rng(seed)
    sample = rng.choice(n, size=min(t, n), replace=False)
    members = [np.flatnonzero(labels == k) for k in range(dataset.class_count)]
    w = np.zeros(dataset.m)
    for r in sample:
        r = int(r)
        dist = np.abs(xn - xn[r]).sum(axis=1)
        own = labels[r]
        for cls, rows in enumerate(members):
            cand = rows[rows != r]
            if cand.size == 0:
                continue
            nearest = cand[np.argsort(dist[cand], kind="stable")[:neighbors]]
            diff = np.abs(xn[nearest] - xn[r]).mean(axis=0)
            if cls == own:
                w -= diff / t
            else:
                w += priors[cls] / (1.0 - priors[own]) * diff / t
    return w


def select_relieff(dataset: Dataset, config: SelectorConfig) -> SelectionResult:
    _check_k(dataset, config)
    if config.seed is None:
        raise SelectionError("relieff needs a seed")
    w = relieff_weights(dataset, config.relieff_neighbors, config.relieff_iterations, config.seed)
    t = config.relieff_iterations or max(1, math.ceil(math.log2(dataset.n)))
    return _top_k(dataset, w, config, "relieff", iterations_used=t)


def select_mrmr(dataset: Dataset, config: SelectorConfig) -> SelectionResult:
    """Greedy max-relevance min-redundancy on discretized features.

    Relevance is I(f; y); a candidate's redundancy is its mean mutual
    information with the features already chosen.
    """
    _check_k(dataset, config)
    codes, counts = discretize_all(dataset.values, config.bins)
    width = int(counts.max())
    relevance = mutual_information_table(
        _backend.contingency_tables(codes, dataset.labels, width, dataset.class_count)
    )
    remaining = np.arange(dataset.m)
    redundancy = np.zeros(dataset.m)
    chosen: list[int] = []
    gains: list[float] = []
    while len(chosen) < config.k_target:
        if chosen:
            score = relevance[remaining] - redundancy[remaining] / len(chosen)
        else:
            score = relevance[remaining]
        best = int(np.argmax(score))  # first maximum = lowest index
        f = int(remaining[best])
        chosen.append(f)
        gains.append(float(score[best]))
        remaining = np.delete(remaining, best)
        if remaining.size and len(chosen) < config.k_target:
            redundancy[remaining] += _backend.mutual_info_with(codes, f, remaining, width, int(counts[f]))
    return _result(
        dataset, chosen, gains, [f"step {i + 1}" for i in range(len(chosen))], _method("mrmr", config)
    )


METHODS: dict[str, Callable[[Dataset, SelectorConfig], SelectionResult]] = {
    "mdfs": select_mdfs,
    "maucd": select_maucd,
    "chi": lambda d, c: select_ranking(d, c, "chi"),
    "su": lambda d, c: select_ranking(d, c, "su"),
    "fsdd": lambda d, c: select_ranking(d, c, "fsdd"),
    "schi": lambda d, c: select_spreadfx(d, c, "chi"),
    "ssu": lambda d, c: select_spreadfx(d, c, "su"),
    "relieff": select_relieff,
    "mrmr": select_mrmr,
}

SEEDED = frozenset({"mdfs", "relieff"})


def select(method: str, dataset: Dataset, config: SelectorConfig) -> SelectionResult:
    try:
        fn = METHODS[method]
    except KeyError:
        raise SelectionError(f"unknown method {method!r}; choose from {sorted(METHODS)}") from None
    return fn(dataset, config)
