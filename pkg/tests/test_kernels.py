"""Compiled and numpy kernels must agree with each other and with brute force."""
import numpy as np
import pytest

from mdfs import _backend, _kernels_py
from mdfs.metrics import auc_by_enumeration

compiled = pytest.mark.skipif("cython" not in _backend.available(), reason="extension not built")


def _tied_matrix(rng, n, m):
    # coarse rounding forces plenty of ties
    return np.asfortranarray(np.round(rng.normal(size=(n, m)), 1))


def test_auc_columns_matches_enumeration(backend, rng):
    x = _tied_matrix(rng, 40, 7)
    pos, neg = np.arange(0, 40, 3), np.setdiff1d(np.arange(40), np.arange(0, 40, 3))
    got = _backend.auc_columns(x, pos, neg)
    want = [auc_by_enumeration(x[pos, j], x[neg, j]) for j in range(7)]
    np.testing.assert_allclose(got, want, rtol=0, atol=1e-12)


def test_auc_columns_rejects_empty_side(backend):
    with pytest.raises(ValueError):
        _backend.auc_columns(np.zeros((3, 1)), np.array([], dtype=np.int64), np.arange(3))


def test_contingency_tables_counts(backend):
    codes = np.array([[0, 1], [1, 1], [1, 0], [0, 0]])
    target = np.array([0, 1, 1, 0])
    tab = _backend.contingency_tables(codes, target, 2, 2)
    np.testing.assert_array_equal(tab[0], [[2, 0], [0, 2]])
    np.testing.assert_array_equal(tab[1], [[1, 1], [1, 1]])


def test_equal_frequency_scan_matches_fallback(backend, rng):
    x = _tied_matrix(rng, 57, 5)
    order = np.argsort(x, axis=0)
    codes, counts = _backend.equal_frequency_scan(x, order, 4)
    ref_codes, ref_counts = _kernels_py.equal_frequency_scan(x, order, 4)
    np.testing.assert_array_equal(codes, ref_codes)
    np.testing.assert_array_equal(counts, ref_counts)


@compiled
def test_backends_agree_on_all_kernels(rng):
    from mdfs import _kernels

    x = _tied_matrix(rng, 300, 12)
    pos, neg = np.arange(120), np.arange(120, 300)
    np.testing.assert_allclose(
        _kernels.auc_columns(x, pos, neg), _kernels_py.auc_columns(x, pos, neg), rtol=0, atol=1e-15
    )
    codes = rng.integers(0, 6, size=(300, 12))
    target = rng.integers(0, 3, size=300)
    np.testing.assert_array_equal(
        _kernels.contingency_tables(codes, target, 6, 3),
        _kernels_py.contingency_tables(codes, target, 6, 3),
    )
    cols = np.arange(1, 12)
    np.testing.assert_allclose(
        _kernels.mutual_info_with(codes, 0, cols, 6, 6),
        _kernels_py.mutual_info_with(codes, 0, cols, 6, 6),
        rtol=0, atol=1e-12,
    )


def test_backend_switching():
    before = _backend.current()
    with _backend.using("python"):
        assert _backend.current() == "python"
    assert _backend.current() == before
    with pytest.raises(ValueError):
        _backend.set_backend("fortran")
