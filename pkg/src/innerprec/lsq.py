"""Least-squares and minimum-norm solvers as adapters over the Krylov kernels.

cgls / lsmr run CG / MINRES on the implicit A^T A operator with left
normal-equations inner iterations; cgne / mrne run them on the implicit
A A^T operator with right normal-equations inner iterations and map back
through x = A^T u. Residual norms in the result are always recomputed from
A, b, and x rather than trusted from the recurrences.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .krylov import SolveResult, SolverConfig, normal_left_operator, normal_right_operator, pcg, pminres
from .splittings import InnerPreconditioner, Side
from .sparse import SparseMatrix, spmv, spmv_t


class ProblemKind(enum.Enum):
    LEAST_SQUARES = "least-squares"
    MIN_NORM = "min-norm"


@dataclass(frozen=True)
class LsqProblem:
    a: SparseMatrix
    b: np.ndarray
    kind: ProblemKind = ProblemKind.LEAST_SQUARES

    def __post_init__(self):
        b = np.asarray(self.b, dtype=np.float64)
        object.__setattr__(self, "b", b)
        if b.shape != (self.a.nrows,):
            raise ValueError(
                f"dimension mismatch: matrix has {self.a.nrows} rows, rhs has shape {b.shape}"
            )


@dataclass(frozen=True)
class LsqResult:
    x: np.ndarray
    ls_residual_norm: float
    normal_residual_norm: float
    inner: SolveResult

    @property
    def converged(self) -> bool:
        return self.inner.converged


def _require_side(precond: InnerPreconditioner, prob: LsqProblem, side: Side, name: str):
    s = precond.splitting
    if s.side != side:
        raise ValueError(f"{name} requires an inner preconditioner with side {side.value}")
    if s.operand.shape != prob.a.shape:
        raise ValueError("inner preconditioner was built for a different operand shape")


def _finalize(prob: LsqProblem, x: np.ndarray, inner: SolveResult) -> LsqResult:
    residual = prob.b - spmv(prob.a, x)
    return LsqResult(
        x=x,
        ls_residual_norm=float(np.linalg.norm(residual)),
        normal_residual_norm=float(np.linalg.norm(spmv_t(prob.a, residual))),
        inner=inner,
    )


def cgls(prob: LsqProblem, precond: InnerPreconditioner, x0=None, cfg: SolverConfig | None = None) -> LsqResult:
    """CG on A^T A x = A^T b; stops on ||A^T r_k|| / ||A^T r_0|| <= tol.

    Converges to a least-squares solution for any rank and shape. Note that
    the inner iterations steer which one: with x0 = 0 the limit is the
    minimum-norm solution in the preconditioner-weighted norm, which is the
    pseudo-inverse solution only when the preconditioner preserves the row
    space (e.g. the identity).
    """
    _require_side(precond, prob, Side.NORMAL_LEFT, "cgls")
    op = normal_left_operator(prob.a)
    rhs = spmv_t(prob.a, prob.b)
    inner = pcg(op, precond, rhs, x0, cfg)
    return _finalize(prob, inner.x, inner)


def lsmr(prob: LsqProblem, precond: InnerPreconditioner, x0=None, cfg: SolverConfig | None = None) -> LsqResult:
    """MINRES on A^T A x = A^T b; the preconditioned normal residual is
    nonincreasing across iterations."""
    _require_side(precond, prob, Side.NORMAL_LEFT, "lsmr")
    op = normal_left_operator(prob.a)
    rhs = spmv_t(prob.a, prob.b)
    inner = pminres(op, precond, rhs, x0, cfg)
    return _finalize(prob, inner.x, inner)


def cgne(prob: LsqProblem, precond: InnerPreconditioner, u0=None, cfg: SolverConfig | None = None) -> LsqResult:
    """CG on A A^T u = b with back-map x = A^T u.

    Intended for b in the range of A; with u0 = 0 the returned x lies in the
    row space of A and equals the pseudo-inverse solution. When b is not in
    the range, the inner solve stalls and reports max_iterations.
    """
    _require_side(precond, prob, Side.NORMAL_RIGHT, "cgne")
    op = normal_right_operator(prob.a)
    inner = pcg(op, precond, prob.b, u0, cfg)
    return _finalize(prob, spmv_t(prob.a, inner.x), inner)


def mrne(prob: LsqProblem, precond: InnerPreconditioner, u0=None, cfg: SolverConfig | None = None) -> LsqResult:
    """MINRES on A A^T u = b with back-map x = A^T u."""
    _require_side(precond, prob, Side.NORMAL_RIGHT, "mrne")
    op = normal_right_operator(prob.a)
    inner = pminres(op, precond, prob.b, u0, cfg)
    return _finalize(prob, spmv_t(prob.a, inner.x), inner)
