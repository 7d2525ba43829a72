"""Stationary splittings and the inner-iteration preconditioner.

A splitting decomposes the induced symmetric matrix as M - N and exposes the
application of M^{-1}. Running ``ell`` stationary steps from a zero initial
iterate applies the preconditioner

    C = (I + H + ... + H^{ell-1}) M^{-1},   H = M^{-1} N,

to a vector without ever forming M, N, H, or a normal-equations product.
For the normal-equations variants, the induced matrix is A^T A (left) or
A A^T (right) and all sweeps run through the columns / rows of A itself.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg as _spla

from .dense import DENSE_CAP, DenseCapExceeded
from .sparse import SparseMatrix, spmv, spmv_t

# Dense triangular factors are cached for SSOR sweeps when the operand is
# small and dense enough that LAPACK beats a row-by-row sparse sweep.
_DENSE_SWEEP_MAX_DIM = 600
_DENSE_SWEEP_MIN_FILL = 0.05


class SplittingKind(str, enum.Enum):
    RICHARDSON = "richardson"
    JOR = "jor"
    SSOR = "ssor"
    RICHARDSON_NE = "richardson-ne"
    CIMMINO_NE = "cimmino-ne"
    NE_SSOR = "ne-ssor"

    @property
    def is_normal_equations(self) -> bool:
        return self in (SplittingKind.RICHARDSON_NE, SplittingKind.CIMMINO_NE, SplittingKind.NE_SSOR)

    @property
    def is_ssor_family(self) -> bool:
        return self in (SplittingKind.SSOR, SplittingKind.NE_SSOR)

    @property
    def needs_diagonal(self) -> bool:
        return self not in (SplittingKind.RICHARDSON, SplittingKind.RICHARDSON_NE)


class Side(str, enum.Enum):
    DIRECT = "direct"
    NORMAL_LEFT = "normal-left"  # induced matrix A^T A
    NORMAL_RIGHT = "normal-right"  # induced matrix A A^T


class Splitting:
    """A named stationary splitting of the induced symmetric matrix.

    Parameters
    ----------
    kind : SplittingKind
    operand : SparseMatrix
        A itself. Must be square and symmetric for direct kinds.
    omega : float
        Relaxation parameter; nonzero, and not 2 for the SSOR family.
    side : Side, optional
        Required for normal-equations kinds; forbidden values are rejected.
    """

    def __init__(self, kind: SplittingKind, operand: SparseMatrix, omega: float, side: Side | None = None):
        kind = SplittingKind(kind)
        if side is None:
            side = Side.DIRECT
        side = Side(side)
        if kind.is_normal_equations and side == Side.DIRECT:
            raise ValueError(f"{kind.value} requires a normal-equations side")
        if not kind.is_normal_equations and side != Side.DIRECT:
            raise ValueError(f"{kind.value} is a direct splitting; side must be direct")
        if omega == 0.0:
            raise ValueError("relaxation parameter must be nonzero")
        if kind.is_ssor_family and omega == 2.0:
            raise ValueError("SSOR splitting matrix is singular at omega = 2")
        if side == Side.DIRECT:
            if operand.nrows != operand.ncols:
                raise ValueError("direct splitting requires a square operand")
            scale = 1.0
            if operand.nnz:
                scale = max(1.0, float(np.abs(operand.data).max()))
            if operand.max_asymmetry() > 1e-12 * scale:
                raise ValueError("direct splitting requires a symmetric operand")

        self.kind = kind
        self.operand = operand
        self.omega = float(omega)
        self.side = side
        self.dimension = {
            Side.DIRECT: operand.nrows,
            Side.NORMAL_LEFT: operand.ncols,
            Side.NORMAL_RIGHT: operand.nrows,
        }[side]

        if side == Side.DIRECT:
            self.diag = operand.diagonal()
        elif side == Side.NORMAL_LEFT:
            self.diag = operand.col_norms_sq()
        else:
            self.diag = operand.row_norms_sq()

        if kind.needs_diagonal and np.any(self.diag == 0.0):
            what = {
                Side.DIRECT: "zero diagonal entry in operand",
                Side.NORMAL_LEFT: "operand has a zero column",
                Side.NORMAL_RIGHT: "operand has a zero row",
            }[side]
            raise ValueError(f"{kind.value} splitting undefined: {what}")

        self._sweeps = None
        if kind.is_ssor_family:
            self._sweeps = self._build_sweeps()

    # -- construction helpers -------------------------------------------------

    def _build_sweeps(self):
        a = self.operand
        if self.side == Side.DIRECT:
            n = self.dimension
            if n <= _DENSE_SWEEP_MAX_DIM and a.nnz >= _DENSE_SWEEP_MIN_FILL * n * n:
                lower = np.tril(a.to_dense(), -1) * self.omega + np.diag(self.diag)
                return ("dense", lower)
            lo_idx, lo_val, up_idx, up_val = [], [], [], []
            for i in range(n):
                sl = slice(a.indptr[i], a.indptr[i + 1])
                cols = a.indices[sl]
                vals = a.data[sl]
                below = cols < i
                above = cols > i
                lo_idx.append(cols[below].copy())
                lo_val.append(vals[below].copy())
                up_idx.append(cols[above].copy())
                up_val.append(vals[above].copy())
            return ("rows", lo_idx, lo_val, up_idx, up_val)
        # Normal-equations sides sweep through A itself: columns for A^T A,
        # rows for A A^T. Cache one strand of index/value slices per sweep step.
        if self.side == Side.NORMAL_LEFT:
            at = self.operand.transpose()  # rows of A^T are columns of A
            src = at
        else:
            src = a
        idx = []
        val = []
        for i in range(src.nrows):
            sl = slice(src.indptr[i], src.indptr[i + 1])
            idx.append(src.indices[sl].copy())
            val.append(src.data[sl].copy())
        return ("strands", idx, val, a.ncols if self.side == Side.NORMAL_RIGHT else a.nrows)

    # -- application ----------------------------------------------------------

    def apply_operator(self, z: np.ndarray) -> np.ndarray:
        """Apply the induced symmetric matrix (A, A^T A, or A A^T) matrix-free."""
        if self.side == Side.DIRECT:
            return spmv(self.operand, z)
        if self.side == Side.NORMAL_LEFT:
            return spmv_t(self.operand, spmv(self.operand, z))
        return spmv(self.operand, spmv_t(self.operand, z))

    def apply_m_inv(self, r: np.ndarray) -> np.ndarray:
        """Solve M z = r for the splitting matrix M of this kind."""
        r = np.asarray(r, dtype=np.float64)
        if r.shape != (self.dimension,):
            raise ValueError(
                f"dimension mismatch: splitting acts on length {self.dimension}, got {r.shape}"
            )
        if self.kind in (SplittingKind.RICHARDSON, SplittingKind.RICHARDSON_NE):
            return self.omega * r
        if self.kind in (SplittingKind.JOR, SplittingKind.CIMMINO_NE):
            return self.omega * r / self.diag
        return self._apply_ssor_m_inv(r)

    def _apply_ssor_m_inv(self, r: np.ndarray) -> np.ndarray:
        # M = w^{-1} (2-w)^{-1} (D + wL) D^{-1} (D + wL^T); one forward and one
        # backward triangular sweep, then the scalar factor w(2-w).
        w = self.omega
        if self._sweeps[0] == "dense":
            lower = self._sweeps[1]
            u = _spla.solve_triangular(lower, r, lower=True)
            z = _spla.solve_triangular(lower, self.diag * u, lower=True, trans="T")
            return w * (2.0 - w) * z
        if self._sweeps[0] == "rows":
            _, lo_idx, lo_val, up_idx, up_val = self._sweeps
            d = self.diag
            n = self.dimension
            u = np.empty(n)
            for i in range(n):
                u[i] = (r[i] - w * (lo_val[i] @ u[lo_idx[i]])) / d[i]
            v = d * u
            z = np.empty(n)
            for i in range(n - 1, -1, -1):
                z[i] = (v[i] - w * (up_val[i] @ z[up_idx[i]])) / d[i]
            return w * (2.0 - w) * z
        # normal-equations strands: the strict triangles of A^T A (or A A^T)
        # are never formed; their action is accumulated through A's columns
        # (rows) in a running combination vector.
        _, idx, val, other_dim = self._sweeps
        d = self.diag
        n = self.dimension
        u = np.empty(n)
        acc = np.zeros(other_dim)
        for i in range(n):
            u[i] = (r[i] - w * (val[i] @ acc[idx[i]])) / d[i]
            acc[idx[i]] += u[i] * val[i]
        v = d * u
        z = np.empty(n)
        acc = np.zeros(other_dim)
        for i in range(n - 1, -1, -1):
            z[i] = (v[i] - w * (val[i] @ acc[idx[i]])) / d[i]
            acc[idx[i]] += z[i] * val[i]
        return w * (2.0 - w) * z

    # -- dense materialization (oracle use) -----------------------------------

    def dense_operator(self, cap: int = DENSE_CAP) -> np.ndarray:
        """The induced symmetric matrix as a dense array (size-capped)."""
        if self.dimension > cap:
            raise DenseCapExceeded(
                f"dense materialization capped at n <= {cap}, got {self.dimension}"
            )
        ad = self.operand.to_dense()
        if self.side == Side.DIRECT:
            return ad
        if self.side == Side.NORMAL_LEFT:
            return ad.T @ ad
        return ad @ ad.T

    def dense_m(self, cap: int = DENSE_CAP) -> np.ndarray:
        """The splitting matrix M as a dense array (size-capped)."""
        if self.dimension > cap:
            raise DenseCapExceeded(
                f"dense materialization capped at n <= {cap}, got {self.dimension}"
            )
        w = self.omega
        if self.kind in (SplittingKind.RICHARDSON, SplittingKind.RICHARDSON_NE):
            return np.eye(self.dimension) / w
        if self.kind in (SplittingKind.JOR, SplittingKind.CIMMINO_NE):
            return np.diag(self.diag / w)
        lower = np.tril(self.dense_operator(cap), -1)
        core = np.diag(self.diag) + w * lower
        m = core @ np.diag(1.0 / self.diag) @ core.T / (w * (2.0 - w))
        return (m + m.T) / 2.0


@dataclass(frozen=True)
class InnerPreconditioner:
    """A splitting plus the number of stationary steps it runs per application."""

    splitting: Splitting
    ell: int

    def __post_init__(self):
        if self.ell < 1:
            raise ValueError("number of inner steps must be at least 1")

    @property
    def dimension(self) -> int:
        return self.splitting.dimension

    def apply(self, r: np.ndarray) -> np.ndarray:
        """Run exactly ``ell`` stationary steps on (induced) A z = r from z = 0.

        The result equals C r with C = sum_{i<ell} H^i M^{-1}.
        """
        s = self.splitting
        z = s.apply_m_inv(r)
        for _ in range(self.ell - 1):
            z = z + s.apply_m_inv(r - s.apply_operator(z))
        return z


def materialize_dense(p: InnerPreconditioner, cap: int = DENSE_CAP) -> tuple[np.ndarray, np.ndarray]:
    """Dense (C, H) for oracle use: C = sum_{i<ell} H^i M^{-1}, H = M^{-1} N.

    Raises if C comes out asymmetric beyond rounding, which would indicate a
    broken sweep kernel (C is symmetric in exact arithmetic whenever M is).
    """
    s = p.splitting
    a = s.dense_operator(cap)
    m = s.dense_m(cap)
    n = s.dimension
    m_inv = np.linalg.inv(m)
    m_inv = (m_inv + m_inv.T) / 2.0
    h = np.eye(n) - np.linalg.solve(m, a)
    c = m_inv.copy()
    term = m_inv
    for _ in range(p.ell - 1):
        term = h @ term
        # every H^i M^{-1} is symmetric whenever M and N are; resymmetrizing
        # removes rounding drift without changing the exact value
        term = (term + term.T) / 2.0
        c = c + term
    scale = max(1.0, np.abs(c).max())
    if np.abs(c - c.T).max() > 1e-10 * scale:
        raise RuntimeError("materialized preconditioner is asymmetric; splitting kernels are inconsistent")
    return c, h
