import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from innerprec.sparse import SparseMatrix, spmv, spmv_t


def test_spmv_identity():
    a = SparseMatrix.identity(3)
    np.testing.assert_array_equal(spmv(a, [1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])


def test_spmv_diagonal():
    a = SparseMatrix.from_dense(np.diag([2.0, 1.0, 0.0]))
    np.testing.assert_array_equal(spmv(a, [1.0, 1.0, 1.0]), [2.0, 1.0, 0.0])


def test_spmv_null_space_vector():
    a = SparseMatrix.from_dense([[1.0, 1.0], [1.0, 1.0]])
    np.testing.assert_array_equal(spmv(a, [1.0, -1.0]), [0.0, 0.0])


def test_spmv_dimension_mismatch():
    a = SparseMatrix.identity(3)
    with pytest.raises(ValueError, match="dimension"):
        spmv(a, np.ones(4))


def test_spmv_t_trivial():
    a = SparseMatrix.from_dense([[1.0], [1.0]])
    np.testing.assert_array_equal(spmv_t(a, [1.0, 0.0]), [1.0])
    np.testing.assert_array_equal(spmv_t(SparseMatrix.identity(3), [4.0, 5.0, 6.0]), [4.0, 5.0, 6.0])


def test_spmv_t_matches_materialized_transpose(rng):
    dense = rng.standard_normal((5, 3))
    a = SparseMatrix.from_dense(dense)
    at = SparseMatrix.from_dense(dense.T)
    y = rng.standard_normal(5)
    np.testing.assert_allclose(spmv_t(a, y), spmv(at, y), rtol=0, atol=1e-14)


def test_spmv_t_dimension_mismatch():
    a = SparseMatrix.from_dense(np.ones((5, 3)))
    with pytest.raises(ValueError, match="dimension"):
        spmv_t(a, np.ones(3))


def test_from_coo_sums_duplicates():
    a = SparseMatrix.from_coo(2, 2, [0, 0, 1], [1, 1, 0], [2.0, 3.0, 1.0])
    np.testing.assert_array_equal(a.to_dense(), [[0.0, 5.0], [1.0, 0.0]])


def test_from_coo_rejects_out_of_bounds():
    with pytest.raises(ValueError, match="out of bounds"):
        SparseMatrix.from_coo(2, 2, [2], [0], [1.0])


def test_invariants_rejected():
    with pytest.raises(ValueError):
        SparseMatrix(2, 2, [0, 1], [0], [1.0])  # indptr wrong length
    with pytest.raises(ValueError):
        SparseMatrix(1, 2, [0, 2], [1, 0], [1.0, 1.0])  # unsorted columns
    with pytest.raises(ValueError, match="finite"):
        SparseMatrix(1, 1, [0, 1], [0], [np.nan])


def test_norms_and_diagonal(rng):
    dense = rng.standard_normal((4, 6))
    dense[2, :] = 0.0
    a = SparseMatrix.from_dense(dense)
    np.testing.assert_allclose(a.row_norms_sq(), (dense**2).sum(axis=1), atol=1e-14)
    np.testing.assert_allclose(a.col_norms_sq(), (dense**2).sum(axis=0), atol=1e-14)
    sq = rng.standard_normal((5, 5))
    np.testing.assert_allclose(SparseMatrix.from_dense(sq).diagonal(), np.diag(sq))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 1000))
def test_adjointness(m, n, seed):
    rng = np.random.default_rng(seed)
    dense = np.round(rng.standard_normal((m, n)) * 4) / 4  # keep entries tame
    a = SparseMatrix.from_dense(dense)
    x = rng.standard_normal(n)
    y = rng.standard_normal(m)
    left = spmv(a, x) @ y
    right = x @ spmv_t(a, y)
    assert abs(left - right) <= 1e-12 * max(1.0, abs(left), abs(right))
