"""Compressed sparse row storage and matrix-free products."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as _spsparse


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """Immutable CSR matrix.

    Invariants enforced at construction: row pointers start at 0 and are
    nondecreasing, column indices are strictly increasing within each row,
    and all stored values are finite. Use :meth:`from_coo` or
    :meth:`from_dense` instead of assembling the raw arrays by hand.
    """

    nrows: int
    ncols: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        indptr = np.asarray(self.indptr, dtype=np.int64)
        indices = np.asarray(self.indices, dtype=np.int64)
        data = np.asarray(self.data, dtype=np.float64)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "data", data)
        if self.nrows < 0 or self.ncols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        if indptr.shape != (self.nrows + 1,):
            raise ValueError("row pointer array must have length nrows + 1")
        if indptr[0] != 0 or np.any(np.diff(indptr) < 0):
            raise ValueError("row pointers must start at 0 and be nondecreasing")
        if indptr[-1] != indices.size or indices.size != data.size:
            raise ValueError("nnz mismatch between row pointers, indices, and values")
        if indices.size and (indices.min() < 0 or indices.max() >= self.ncols):
            raise ValueError("column index out of bounds")
        for i in range(self.nrows):
            row = indices[indptr[i] : indptr[i + 1]]
            if row.size > 1 and np.any(np.diff(row) <= 0):
                raise ValueError(f"column indices not strictly increasing in row {i}")
        if data.size and not np.all(np.isfinite(data)):
            raise ValueError("stored values must be finite")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def nnz(self) -> int:
        return int(self.indptr[-1])

    @cached_property
    def _csr(self) -> _spsparse.csr_matrix:
        return _spsparse.csr_matrix(
            (self.data, self.indices, self.indptr), shape=self.shape
        )

    @cached_property
    def _csr_t(self) -> _spsparse.csc_matrix:
        # Transpose as a CSC view over the same arrays; A^T is never copied.
        return self._csr.T

    @classmethod
    def from_coo(cls, nrows, ncols, rows, cols, values) -> "SparseMatrix":
        """Build from coordinate triplets; duplicate entries are summed."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if rows.size and (rows.min() < 0 or rows.max() >= nrows):
            raise ValueError("row index out of bounds")
        if cols.size and (cols.min() < 0 or cols.max() >= ncols):
            raise ValueError("column index out of bounds")
        coo = _spsparse.coo_matrix((values, (rows, cols)), shape=(nrows, ncols))
        csr = coo.tocsr()
        csr.sum_duplicates()
        csr.sort_indices()
        return cls(nrows, ncols, csr.indptr, csr.indices, csr.data)

    @classmethod
    def from_dense(cls, a) -> "SparseMatrix":
        """Build from a dense array, dropping exact zeros."""
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2:
            raise ValueError("expected a 2-d array")
        csr = _spsparse.csr_matrix(a)
        csr.sort_indices()
        return cls(a.shape[0], a.shape[1], csr.indptr, csr.indices, csr.data)

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls.from_dense(np.eye(n))

    def to_dense(self) -> np.ndarray:
        return self._csr.toarray()

    def transpose(self) -> "SparseMatrix":
        t = self._csr.T.tocsr()
        t.sort_indices()
        return SparseMatrix(self.ncols, self.nrows, t.indptr, t.indices, t.data)

    def diagonal(self) -> np.ndarray:
        return self._csr.diagonal()

    def row_norms_sq(self) -> np.ndarray:
        """Squared 2-norms of the rows (diagonal of A A^T)."""
        out = np.zeros(self.nrows)
        np.add.at(out, np.repeat(np.arange(self.nrows), np.diff(self.indptr)), self.data**2)
        return out

    def col_norms_sq(self) -> np.ndarray:
        """Squared 2-norms of the columns (diagonal of A^T A)."""
        return np.bincount(self.indices, weights=self.data**2, minlength=self.ncols)

    def max_asymmetry(self) -> float:
        """max |A - A^T| entrywise; 0.0 for non-square input is never returned."""
        if self.nrows != self.ncols:
            raise ValueError("asymmetry is only defined for square matrices")
        d = self._csr - self._csr_t.tocsr()
        return 0.0 if d.nnz == 0 else float(np.abs(d.data).max())


def spmv(a: SparseMatrix, x: np.ndarray) -> np.ndarray:
    """Product A x with fixed row-order, index-order accumulation."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size != a.ncols:
        raise ValueError(
            f"dimension mismatch: matrix is {a.nrows}x{a.ncols}, vector has length {x.size}"
        )
    return a._csr @ x


def spmv_t(a: SparseMatrix, y: np.ndarray) -> np.ndarray:
    """Product A^T y without materializing the transpose."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size != a.nrows:
        raise ValueError(
            f"dimension mismatch: matrix is {a.nrows}x{a.ncols}, vector has length {y.size}"
        )
    return a._csr_t @ y
