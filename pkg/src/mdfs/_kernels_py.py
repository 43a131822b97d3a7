"""Pure numpy kernels; the reference behaviour for the compiled module."""
import numpy as np


def auc_columns(values, pos_idx, neg_idx):
    """AUC of every column, positives ranked above negatives, ties count 0.5."""
    n_pos, n_neg = len(pos_idx), len(neg_idx)
    if n_pos == 0 or n_neg == 0:
        raise ValueError("both sides of the sub-problem must be non-empty")
    values = np.asarray(values, dtype=np.float64)
    pos = np.sort(values[np.asarray(pos_idx)], axis=0)
    neg = np.sort(values[np.asarray(neg_idx)], axis=0)
    wins = np.empty(values.shape[1])
    for j in range(values.shape[1]):
        below = np.searchsorted(neg[:, j], pos[:, j], side="left")
        upto = np.searchsorted(neg[:, j], pos[:, j], side="right")
        wins[j] = below.sum() + 0.5 * (upto - below).sum()
    return wins / (n_pos * n_neg)


def contingency_tables(codes, target, n_codes, n_target):
    """Joint count table of every column against ``target``.

    Returns an int64 array of shape ``(m, n_codes, n_target)``.
    """
    codes = np.asarray(codes, dtype=np.int64)
    target = np.asarray(target, dtype=np.int64)
    n, m = codes.shape
    if target.shape[0] != n:
        raise ValueError("codes and target differ in length")
    cell = codes * n_target + target[:, None]
    cell = cell + (np.arange(m, dtype=np.int64) * (n_codes * n_target))[None, :]
    counts = np.bincount(cell.ravel(), minlength=m * n_codes * n_target)
    return counts.reshape(m, n_codes, n_target)


def mutual_info_with(codes, target_col, columns, n_codes, n_target):
    """I(column; codes[:, target_col]) in bits for each of ``columns``."""
    from mdfs.metrics import mutual_information_table

    codes = np.asarray(codes, dtype=np.int64)
    tables = contingency_tables(codes[:, columns], codes[:, target_col], n_codes, n_target)
    return mutual_information_table(tables)


def equal_frequency_scan(values, order, bins):
    """Equal-frequency codes from per-column ascending ``order``.

    A value's raw bin is ``bins * (count of smaller values) // n``; raw bins
    are then renumbered densely. Returns ``(codes[n, m], bin_counts[m])``.
    """
    values = np.asarray(values, dtype=np.float64)
    n, m = values.shape
    sorted_vals = np.take_along_axis(values, order, axis=0)
    # a tie run starts where the sorted value changes; its start position is
    # the count of strictly smaller values
    starts = np.zeros((n, m), dtype=np.int64)
    starts[1:] = np.where(sorted_vals[1:] != sorted_vals[:-1], np.arange(1, n)[:, None], 0)
    below = np.maximum.accumulate(starts, axis=0)
    raw = (bins * below) // n
    dense = np.zeros((n, m), dtype=np.int64)
    dense[1:] = np.cumsum(raw[1:] != raw[:-1], axis=0)
    codes = np.empty((n, m), dtype=np.int64, order="F")
    np.put_along_axis(codes, order, dense, axis=0)
    return codes, dense[-1] + 1
