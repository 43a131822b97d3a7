"""Datasets, CSV ingestion, discretization, stratified folds and a
synthetic multi-class generator with controllable pairwise difficulty."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_BINS = 10


class DataError(ValueError):
    """Raised for malformed or inconsistent input data."""


def _frozen(arr):
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """Numeric feature matrix with dense integer class labels.

    ``values`` is stored column-major (Fortran order) so per-feature scans are
    contiguous. ``row_ids`` maps each row back to the instance it came from in
    the originally loaded data; subsetting keeps it, which is what the
    evaluation harness uses to audit train/test separation.
    """

    values: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    class_count: int
    class_names: tuple[str, ...] = ()
    row_ids: np.ndarray = None

    def __post_init__(self):
        values = np.asfortranarray(np.asarray(self.values, dtype=np.float64))
        labels = np.asarray(self.labels)
        if values.ndim != 2:
            raise DataError("values must be a 2-D matrix")
        n, m = values.shape
        if n < 2 or m < 1:
            raise DataError(f"need n >= 2 and m >= 1, got n={n}, m={m}")
        if labels.shape != (n,):
            raise DataError(f"expected {n} labels, got shape {labels.shape}")
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            if not np.all(np.equal(np.mod(labels, 1), 0)):
                raise DataError("labels must be integers")
        labels = labels.astype(np.int64)
        c = int(self.class_count)
        if c < 2:
            raise DataError(f"class_count must be >= 2, got {c}")
        if labels.min() < 0 or labels.max() >= c:
            raise DataError(f"labels must lie in [0, {c - 1}]")
        missing = np.setdiff1d(np.arange(c), labels)
        if missing.size:
            raise DataError(f"classes without instances: {missing.tolist()}")
        if not np.all(np.isfinite(values)):
            r, j = np.argwhere(~np.isfinite(values))[0]
            raise DataError(f"non-finite value at row {r}, column {j}")
        names = tuple(str(s) for s in self.feature_names) if self.feature_names else tuple(
            f"f{j}" for j in range(m)
        )
        if len(names) != m:
            raise DataError(f"expected {m} feature names, got {len(names)}")
        class_names = tuple(str(s) for s in self.class_names) or tuple(str(k) for k in range(c))
        if len(class_names) != c:
            raise DataError(f"expected {c} class names, got {len(class_names)}")
        row_ids = np.arange(n, dtype=np.int64) if self.row_ids is None else np.asarray(
            self.row_ids, dtype=np.int64
        )
        if row_ids.shape != (n,):
            raise DataError("row_ids must have one entry per row")
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "class_count", c)
        object.__setattr__(self, "class_names", class_names)
        object.__setattr__(self, "row_ids", _frozen(row_ids))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.class_count)

    def subset(self, rows) -> "Dataset":
        """Rows ``rows`` as a new dataset (a copy); every class must remain present."""
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(
            self.values[rows],
            self.labels[rows],
            self.feature_names,
            self.class_count,
            self.class_names,
            self.row_ids[rows],
        )

    def select_features(self, columns) -> "Dataset":
        columns = np.asarray(columns, dtype=np.int64)
        if columns.size == 0:
            raise DataError("empty feature subset")
        return Dataset(
            self.values[:, columns],
            self.labels,
            tuple(self.feature_names[j] for j in columns),
            self.class_count,
            self.class_names,
            self.row_ids,
        )

    def equals(self, other: "Dataset") -> bool:
        return (
            self.class_count == other.class_count
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.labels, other.labels)
            and self.feature_names == other.feature_names
        )


@dataclass(frozen=True)
class DiscretizedFeature:
    codes: np.ndarray
    bin_count: int


@dataclass(frozen=True)
class FoldAssignment:
    fold_of: np.ndarray
    k: int
    seed: int

    def split(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        """(train_rows, test_rows) for one fold."""
        test = np.flatnonzero(self.fold_of == fold)
        train = np.flatnonzero(self.fold_of != fold)
        return train, test


def _resolve_label_column(label_column, header, width):
    if label_column is None:
        return width - 1
    if isinstance(label_column, str):
        if header is not None and label_column in header:
            return header.index(label_column)
        try:
            label_column = int(label_column)
        except ValueError:
            raise DataError(f"label column {label_column!r} not found in header") from None
    idx = int(label_column)
    if idx < 0:
        idx += width
    if not 0 <= idx < width:
        raise DataError(f"label column index {label_column} out of range for {width} columns")
    return idx


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def _sniff_header(rows, label_column) -> bool:
    first = rows[0]
    if isinstance(label_column, str):
        return True
    lab = -1 if label_column is None else label_column
    try:
        lab = range(len(first))[lab]
    except IndexError:
        return not all(_is_number(cell) for cell in first)
    if not all(_is_number(cell) for j, cell in enumerate(first) if j != lab):
        return True
    if _is_number(first[lab]):
        return False
    return len(rows) > 1 and all(len(r) > lab and _is_number(r[lab]) for r in rows[1:])


def load_csv(path, label_column=None, has_header: bool | None = None) -> Dataset:
    """Read a comma-separated file into a :class:`Dataset`.

    Parameters
    ----------
    path : str or path-like
    label_column : int or str, optional
        Column index (0-based, negative allowed) or header name. Defaults to the
        last column.
    has_header : bool, optional
        ``None`` sniffs: the first row is a header when one of its feature
        cells is not a number, or when its label cell is text while every
        other label is numeric.

    Labels are re-encoded densely to ``0..c-1`` in order of first appearance;
    the original label text is kept in ``class_names``.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path} is empty")
    if has_header is None:
        has_header = _sniff_header(rows, label_column)
    header = [cell.strip() for cell in rows[0]] if has_header else None
    body = rows[1:] if has_header else rows
    width = len(rows[0])
    if width < 2:
        raise DataError("need at least one feature column and one label column")
    lab = _resolve_label_column(label_column, header, width)

    values = np.empty((len(body), width - 1), dtype=np.float64)
    raw_labels = []
    first_line = 2 if has_header else 1
    for r, row in enumerate(body):
        if len(row) != width:
            raise DataError(
                f"ragged row {r} (line {first_line + r}): expected {width} cells, got {len(row)}"
            )
        out_j = 0
        for j, cell in enumerate(row):
            if j == lab:
                raw_labels.append(cell.strip())
                continue
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"non-numeric value {cell!r} at row {r}, column {j}") from None
            if not math.isfinite(v):
                raise DataError(f"non-finite value at row {r}, column {j}")
            values[r, out_j] = v
            out_j += 1

    class_names: list[str] = []
    index: dict[str, int] = {}
    labels = np.empty(len(raw_labels), dtype=np.int64)
    for r, text in enumerate(raw_labels):
        if text not in index:
            index[text] = len(class_names)
            class_names.append(text)
        labels[r] = index[text]
    if len(class_names) < 2:
        raise DataError(f"need at least 2 classes, found {len(class_names)}")
    if header is not None:
        names = tuple(h for j, h in enumerate(header) if j != lab)
    else:
        names = tuple(f"f{j}" for j in range(width) if j != lab)
    return Dataset(values, labels, names, len(class_names), tuple(class_names))


def save_csv(dataset: Dataset, path) -> None:
    """Write features then a trailing ``label`` column, with a header row."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(dataset.feature_names) + ["label"])
        for row, lab in zip(dataset.values, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [dataset.class_names[lab]])


def equal_frequency_codes(column, bins: int = DEFAULT_BINS) -> DiscretizedFeature:
    """Equal-frequency discretization of one numeric column.

    A value's bin is ``floor(bins * r / n)`` where ``r`` counts the values
    strictly below it, so equal values always share a bin and the mapping is
    monotone. Empty bins are squeezed out, hence ``bin_count <= bins``.
    """
    if bins < 1:
        raise DataError(f"bins must be >= 1, got {bins}")
    column = np.asarray(column, dtype=np.float64)
    n = column.shape[0]
    sorted_vals = np.sort(column, kind="stable")
    below = np.searchsorted(sorted_vals, column, side="left")
    raw = (bins * below) // n
    used, codes = np.unique(raw, return_inverse=True)
    return DiscretizedFeature(codes.astype(np.int64), int(used.size))


def discretize_equal_frequency(dataset: Dataset, feature: int, bins: int = DEFAULT_BINS) -> DiscretizedFeature:
    if not 0 <= feature < dataset.m:
        raise DataError(f"feature {feature} out of range for m={dataset.m}")
    return equal_frequency_codes(dataset.values[:, feature], bins)


def discretize_all(values, bins: int = DEFAULT_BINS) -> tuple[np.ndarray, np.ndarray]:
    """Discretize every column at once; returns ``(codes[n, m], bin_counts[m])``.

    Same codes as :func:`equal_frequency_codes` applied column by column.
    """
    from mdfs import _backend

    values = np.asfortranarray(values, dtype=np.float64)
    if bins < 1:
        raise DataError(f"bins must be >= 1, got {bins}")
    # tie order inside a run is irrelevant, so an unstable sort is fine
    order = np.argsort(values, axis=0)
    return _backend.equal_frequency_scan(values, order, bins)


def stratified_folds(labels, k: int, seed: int) -> FoldAssignment:
    """Shuffle each class with ``seed`` and deal its instances round-robin.

    Dealing continues across classes from where the previous class stopped, so
    overall fold sizes stay balanced too.
    """
    if k < 2:
        raise DataError(f"fold count must be >= 2, got {k}")
    labels = np.asarray(labels, dtype=np.int64)
    rng = np.random.default_rng(seed)
    fold_of = np.empty(labels.shape[0], dtype=np.int64)
    offset = 0
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        members = members[rng.permutation(members.size)]
        fold_of[members] = (offset + np.arange(members.size)) % k
        offset = (offset + members.size) % k
    return FoldAssignment(_frozen(fold_of), k, seed)


@dataclass(frozen=True)
class FeatureGroup:
    """Features ``features`` carry signal for the class pair ``pair``."""

    pair: tuple[int, int]
    features: tuple[int, ...]


@dataclass(frozen=True)
class SirenSpec:
    """Recipe for :func:`generate_siren_dataset`.

    ``gaps[i][j]`` is the mean gap, in standard deviations, between classes i
    and j on the features of any group serving the pair (i, j).

    ``layout`` decides where classes outside the pair sit on a group's
    features. ``"centered"`` places the pair at -gap/2 and +gap/2 and every
    other class at 0. ``"anchored"`` keeps the first class of the pair and all
    outside classes at 0 and moves only the second class to +gap, so outside
    classes are indistinguishable from the first one. Features not in any group
    are N(0, 1) noise for everyone.
    """

    class_sizes: tuple[int, ...]
    gaps: tuple[tuple[float, ...], ...]
    groups: tuple[FeatureGroup, ...]
    n_features: int
    seed: int = 0
    layout: str = "centered"


@dataclass(frozen=True, eq=False)
class SirenData:
    dataset: Dataset
    informative: dict  # pair -> tuple of feature indices
    spec: SirenSpec

    def features_for(self, pair) -> tuple[int, ...]:
        return self.informative.get(tuple(sorted(pair)), ())


def make_siren_spec(class_sizes, gaps, groups, n_features, seed=0, layout="centered") -> SirenSpec:
    """Build a :class:`SirenSpec` from plain Python containers.

    ``groups`` is a sequence of ``((i, j), features)`` entries.
    """
    c = len(class_sizes)
    gaps = np.asarray(gaps, dtype=float)
    if gaps.shape != (c, c):
        raise DataError(f"gap matrix must be {c}x{c}, got shape {gaps.shape}")
    gap_rows = tuple(tuple(float(g) for g in row) for row in gaps)
    fgroups = tuple(FeatureGroup((int(p[0]), int(p[1])), tuple(int(f) for f in fs)) for p, fs in groups)
    return SirenSpec(tuple(int(s) for s in class_sizes), gap_rows, fgroups, int(n_features), int(seed), layout)


def _validate_siren(spec: SirenSpec):
    c = len(spec.class_sizes)
    if c < 2:
        raise DataError("need at least 2 classes")
    if any(s < 1 for s in spec.class_sizes):
        raise DataError("every class needs at least one instance")
    gaps = np.asarray(spec.gaps, dtype=float)
    if gaps.shape != (c, c):
        raise DataError(f"gap matrix must be {c}x{c}, got {gaps.shape}")
    if np.any(gaps < 0) or not np.all(np.isfinite(gaps)):
        raise DataError("gaps must be finite and non-negative")
    if spec.layout not in ("centered", "anchored"):
        raise DataError(f"unknown layout {spec.layout!r}")
    if spec.n_features < 1:
        raise DataError("need at least one feature")
    seen: set[int] = set()
    for g in spec.groups:
        i, j = g.pair
        if not (0 <= i < c and 0 <= j < c and i != j):
            raise DataError(f"invalid class pair {g.pair}")
        for f in g.features:
            if not 0 <= f < spec.n_features:
                raise DataError(f"feature {f} outside 0..{spec.n_features - 1}")
            if f in seen:
                raise DataError(f"feature {f} assigned to more than one group")
            seen.add(f)
    return gaps


def generate_siren_dataset(spec: SirenSpec) -> SirenData:
    """Gaussian class-conditional data where each feature group helps one class pair.

    Deterministic given ``spec.seed``. Within a group serving (i, j) the two
    classes differ in mean by ``gaps[i][j]`` with unit variance, so the
    population AUC of any such feature on that pair is ``Phi(gap / sqrt(2))``.
    """
    gaps = _validate_siren(spec)
    c = len(spec.class_sizes)
    labels = np.repeat(np.arange(c), spec.class_sizes)
    n = labels.size
    rng = np.random.default_rng(spec.seed)
    values = rng.standard_normal((n, spec.n_features))
    informative: dict = {}
    for g in spec.groups:
        i, j = g.pair
        gap = max(gaps[i, j], gaps[j, i])
        means = np.zeros(c)
        if spec.layout == "centered":
            means[i], means[j] = -gap / 2.0, gap / 2.0
        else:
            means[j] = gap
        cols = list(g.features)
        values[:, cols] += means[labels][:, None]
        key = (min(i, j), max(i, j))
        informative[key] = tuple(sorted(informative.get(key, ()) + tuple(cols)))
    names = tuple(f"f{j}" for j in range(spec.n_features))
    ds = Dataset(values, labels, names, c)
    return SirenData(ds, informative, spec)


def siren_benchmark_spec(seed: int = 0, per_class: int = 200, n_features: int = 60,
                         hard_gap: float = 1.0, easy_gap: float = 3.0, group_size: int = 10) -> SirenSpec:
    """Three classes, one hard pair (0, 1) and two easy pairs sharing class 2.

    Uses the anchored layout, so the easy-pair features say nothing about the
    hard pair: globally strong features are exactly the wrong ones for it.
    """
    if 3 * group_size > n_features:
        raise DataError("not enough features for three groups")
    gaps = [[0.0, hard_gap, easy_gap], [hard_gap, 0.0, easy_gap], [easy_gap, easy_gap, 0.0]]
    g = group_size
    groups = [
        ((0, 1), range(0, g)),
        ((0, 2), range(g, 2 * g)),
        ((1, 2), range(2 * g, 3 * g)),
    ]
    return make_siren_spec([per_class] * 3, gaps, groups, n_features, seed, layout="anchored")
