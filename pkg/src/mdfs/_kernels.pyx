# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled rank and counting kernels.

Same signatures and results as :mod:`mdfs._kernels_py`.
"""
import numpy as np
cimport numpy as cnp
from libcpp.vector cimport vector

from libc.math cimport log2

cnp.import_array()


def auc_columns(const double[:, :] values, const cnp.int64_t[:] pos_idx,
                const cnp.int64_t[:] neg_idx):
    """AUC of every column, positives ranked above negatives, ties count 0.5.

    Each side is sorted on its own (numpy's vectorised sort); a compiled
    two-pointer sweep then counts, for every positive, the negatives strictly
    below it and those tied with it.
    """
    cdef Py_ssize_t n_pos = pos_idx.shape[0]
    cdef Py_ssize_t n_neg = neg_idx.shape[0]
    cdef Py_ssize_t m = values.shape[1]
    cdef Py_ssize_t j, r, lo, hi
    cdef double wins, v
    if n_pos == 0 or n_neg == 0:
        raise ValueError("both sides of the sub-problem must be non-empty")
    arr = np.asarray(values)
    pos_arr = np.asfortranarray(arr[np.asarray(pos_idx)])
    neg_arr = np.asfortranarray(arr[np.asarray(neg_idx)])
    pos_arr.sort(axis=0)
    neg_arr.sort(axis=0)
    cdef double[::1, :] pv = pos_arr
    cdef double[::1, :] nv = neg_arr
    out = np.empty(m, dtype=np.float64)
    cdef double[:] res = out
    with nogil:
        for j in range(m):
            wins = 0.0
            lo = 0
            hi = 0
            for r in range(n_pos):
                v = pv[r, j]
                while lo < n_neg and nv[lo, j] < v:
                    lo += 1
                if hi < lo:
                    hi = lo
                while hi < n_neg and nv[hi, j] <= v:
                    hi += 1
                wins += lo + 0.5 * (hi - lo)
            res[j] = wins / (<double>n_pos * <double>n_neg)
    return out


def contingency_tables(const cnp.int64_t[:, :] codes, const cnp.int64_t[:] target,
                       Py_ssize_t n_codes, Py_ssize_t n_target):
    """Joint count table of every column against ``target``.

    Returns an int64 array of shape ``(m, n_codes, n_target)``.
    """
    cdef Py_ssize_t n = codes.shape[0]
    cdef Py_ssize_t m = codes.shape[1]
    cdef Py_ssize_t i, j
    if target.shape[0] != n:
        raise ValueError("codes and target differ in length")
    out = np.zeros((m, n_codes, n_target), dtype=np.int64)
    cdef cnp.int64_t[:, :, :] tab = out
    with nogil:
        for j in range(m):
            for i in range(n):
                tab[j, codes[i, j], target[i]] += 1
    return out


def mutual_info_with(const cnp.int64_t[:, :] codes, Py_ssize_t target_col,
                     const cnp.int64_t[:] columns, Py_ssize_t n_codes, Py_ssize_t n_target):
    """I(column; codes[:, target_col]) in bits for each of ``columns``.

    Evaluated as H(target) - H(target | column) from the joint counts.
    """
    cdef Py_ssize_t n = codes.shape[0]
    cdef Py_ssize_t n_cols = columns.shape[0]
    cdef Py_ssize_t i, a, b, q, col
    cdef double h_t, h_cond, row_tot, p, inv_n
    cdef vector[double] tab, tcount
    out = np.empty(n_cols, dtype=np.float64)
    cdef double[:] res = out
    if n == 0:
        raise ValueError("empty input")
    inv_n = 1.0 / n
    tab.resize(n_codes * n_target)
    tcount.resize(n_target)
    with nogil:
        for b in range(n_target):
            tcount[b] = 0.0
        for i in range(n):
            tcount[codes[i, target_col]] += 1.0
        h_t = 0.0
        for b in range(n_target):
            if tcount[b] > 0:
                p = tcount[b] * inv_n
                h_t -= p * log2(p)
        for q in range(n_cols):
            col = columns[q]
            for a in range(n_codes * n_target):
                tab[a] = 0.0
            for i in range(n):
                tab[codes[i, col] * n_target + codes[i, target_col]] += 1.0
            h_cond = 0.0
            for a in range(n_codes):
                row_tot = 0.0
                for b in range(n_target):
                    row_tot += tab[a * n_target + b]
                if row_tot == 0:
                    continue
                for b in range(n_target):
                    if tab[a * n_target + b] > 0:
                        p = tab[a * n_target + b] / row_tot
                        h_cond -= (row_tot * inv_n) * p * log2(p)
            res[q] = h_t - h_cond if h_t - h_cond > 0 else 0.0
    return out


def equal_frequency_scan(const double[:, :] values, const cnp.int64_t[:, :] order, Py_ssize_t bins):
    """Equal-frequency codes from per-column ascending ``order``.

    A value's raw bin is ``bins * (count of smaller values) // n``; raw bins
    are then renumbered densely. Returns ``(codes[n, m], bin_counts[m])``.
    """
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t m = values.shape[1]
    cdef Py_ssize_t j, p, i, first, raw, raw_prev, dense
    cdef double v, prev
    codes_arr = np.empty((n, m), dtype=np.int64, order="F")
    counts_arr = np.empty(m, dtype=np.int64)
    cdef cnp.int64_t[:, :] codes = codes_arr
    cdef cnp.int64_t[:] counts = counts_arr
    with nogil:
        for j in range(m):
            raw_prev = -1
            dense = -1
            first = 0
            prev = 0.0
            for p in range(n):
                i = order[p, j]
                v = values[i, j]
                if p == 0 or v != prev:
                    first = p
                    raw = (bins * first) // n
                    if raw != raw_prev:
                        dense += 1
                        raw_prev = raw
                    prev = v
                codes[i, j] = dense
            counts[j] = dense + 1
    return codes_arr, counts_arr
