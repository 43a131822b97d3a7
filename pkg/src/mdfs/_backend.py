"""Kernel backend selection.

The compiled Cython module is used when it imports; otherwise the numpy
fallback. Set ``MDFS_BACKEND=python`` to force the fallback.
"""
import contextlib
import os

import numpy as np

from mdfs import _kernels_py

try:
    from mdfs import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled


def available():
    """Names of the backends importable in this environment."""
    return sorted(_BACKENDS)


def _default():
    requested = os.environ.get("MDFS_BACKEND", "").strip().lower()
    if requested:
        if requested not in _BACKENDS:
            raise ImportError(f"MDFS_BACKEND={requested!r} is not available; have {available()}")
        return requested
    return "cython" if "cython" in _BACKENDS else "python"


_active = _default()


def current():
    return _active


def set_backend(name):
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; have {available()}")
    _active = name


@contextlib.contextmanager
def using(name):
    """Temporarily switch the kernel backend."""
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def auc_columns(values, pos_idx, neg_idx):
    return _BACKENDS[_active].auc_columns(
        values,
        np.ascontiguousarray(pos_idx, dtype=np.int64),
        np.ascontiguousarray(neg_idx, dtype=np.int64),
    )


def contingency_tables(codes, target, n_codes, n_target):
    return _BACKENDS[_active].contingency_tables(
        np.asarray(codes, dtype=np.int64),
        np.ascontiguousarray(target, dtype=np.int64),
        int(n_codes),
        int(n_target),
    )


def mutual_info_with(codes, target_col, columns, n_codes, n_target):
    return _BACKENDS[_active].mutual_info_with(
        np.asarray(codes, dtype=np.int64),
        int(target_col),
        np.ascontiguousarray(columns, dtype=np.int64),
        int(n_codes),
        int(n_target),
    )


def equal_frequency_scan(values, order, bins):
    return _BACKENDS[_active].equal_frequency_scan(
        np.asarray(values, dtype=np.float64),
        np.asarray(order, dtype=np.int64),
        int(bins),
    )
