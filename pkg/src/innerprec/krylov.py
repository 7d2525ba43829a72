"""Matrix-free preconditioned CG and MINRES over an abstract symmetric operator.

Both solvers accept any preconditioner object exposing ``apply(vector)``
whose matrix is expected symmetric positive definite. A symmetric negative
definite preconditioner is detected from the sign of the first preconditioned
inner product and every application is negated for the rest of the solve;
a genuinely indefinite one surfaces as a breakdown.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .sparse import SparseMatrix, spmv, spmv_t


@dataclass(frozen=True)
class LinearOperator:
    """Symmetric-by-contract linear map given by its dimension and action."""

    dimension: int
    apply: Callable[[np.ndarray], np.ndarray]


def operator_from_sparse(a: SparseMatrix) -> LinearOperator:
    if a.nrows != a.ncols:
        raise ValueError("operator requires a square matrix")
    return LinearOperator(a.nrows, lambda x: spmv(a, x))


def normal_left_operator(a: SparseMatrix) -> LinearOperator:
    """The A^T A operator (dimension ncols), applied matrix-free."""
    return LinearOperator(a.ncols, lambda x: spmv_t(a, spmv(a, x)))


def normal_right_operator(a: SparseMatrix) -> LinearOperator:
    """The A A^T operator (dimension nrows), applied matrix-free."""
    return LinearOperator(a.nrows, lambda x: spmv(a, spmv_t(a, x)))


class Termination(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    BREAKDOWN_INDEFINITE_PRECONDITIONER = "breakdown_indefinite_preconditioner"
    BREAKDOWN_ZERO_CURVATURE = "breakdown_zero_curvature"


@dataclass
class SolverConfig:
    tol: float = 1e-10
    max_outer: int | None = None  # None -> 10 * dimension
    breakdown_tol: float = 1e-14
    record_history: bool = True
    record_iterates: bool = False
    refresh_every: int = 50

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_outer is not None and self.max_outer < 1:
            raise ValueError("max_outer must be at least 1")


@dataclass
class ConvergenceHistory:
    """Per-iteration residual trace.

    ``aux`` holds <r_k, z_k> for CG and the estimated preconditioned residual
    norm for MINRES. ``iterates`` is populated only on request.
    """

    ks: list[int] = field(default_factory=list)
    res_norms: list[float] = field(default_factory=list)
    aux: list[float] = field(default_factory=list)
    iterates: list[np.ndarray] | None = None

    def append(self, k: int, res_norm: float, aux: float, x: np.ndarray | None = None):
        self.ks.append(k)
        self.res_norms.append(float(res_norm))
        self.aux.append(float(aux))
        if self.iterates is not None and x is not None:
            self.iterates.append(x.copy())

    def __len__(self) -> int:
        return len(self.ks)

    def to_csv(self, stream):
        stream.write("k,res_norm,aux\n")
        for k, res, aux in zip(self.ks, self.res_norms, self.aux):
            stream.write(f"{k},{res:.17g},{aux:.17g}\n")


@dataclass
class SolveResult:
    x: np.ndarray
    iterations: int
    termination: Termination
    history: ConvergenceHistory | None
    preconditioner_negated: bool = False

    @property
    def converged(self) -> bool:
        return self.termination == Termination.CONVERGED


def _prepare(op, b, x0, cfg):
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (op.dimension,):
        raise ValueError(
            f"dimension mismatch: operator has dimension {op.dimension}, rhs has shape {b.shape}"
        )
    if x0 is None:
        x0 = np.zeros(op.dimension)
    else:
        x0 = np.asarray(x0, dtype=np.float64).copy()
        if x0.shape != (op.dimension,):
            raise ValueError("dimension mismatch: initial iterate has wrong length")
    cfg = cfg or SolverConfig()
    max_outer = cfg.max_outer if cfg.max_outer is not None else 10 * op.dimension
    history = None
    if cfg.record_history:
        history = ConvergenceHistory(iterates=[] if cfg.record_iterates else None)
    return b, x0, cfg, max_outer, history


def _precond_fn(precond):
    if precond is None:
        return lambda r: r.copy()
    return precond.apply


def pcg(op: LinearOperator, precond, b, x0=None, cfg: SolverConfig | None = None) -> SolveResult:
    """Preconditioned conjugate gradients.

    Inner-product recurrences: alpha_k = <r_k, z_k> / <A p_k, p_k> and
    beta_k = <r_{k+1}, z_{k+1}> / <r_k, z_k>, with z = C r the preconditioner
    application. Stops on the true unpreconditioned relative residual; the
    recurrence residual is refreshed from scratch every ``refresh_every``
    iterations to suppress drift.
    """
    b, x, cfg, max_outer, history = _prepare(op, b, x0, cfg)
    apply_c = _precond_fn(precond)

    r = b - op.apply(x)
    r0_norm = float(np.linalg.norm(r))
    target = cfg.tol * r0_norm

    sign = 1.0
    z = apply_c(r)
    rz = float(r @ z)
    if rz < 0.0 and -rz > cfg.breakdown_tol * np.linalg.norm(r) * np.linalg.norm(z):
        sign = -1.0
        z = -z
        rz = -rz
    if history is not None:
        history.append(0, r0_norm, rz, x)
    if r0_norm == 0.0:
        return SolveResult(x, 0, Termination.CONVERGED, history, sign < 0)
    if rz <= cfg.breakdown_tol * np.linalg.norm(r) * np.linalg.norm(z):
        return SolveResult(x, 0, Termination.BREAKDOWN_INDEFINITE_PRECONDITIONER, history, sign < 0)

    p = z.copy()
    for k in range(max_outer):
        ap = op.apply(p)
        pap = float(ap @ p)
        if pap <= 0.0:
            return SolveResult(x, k + 1, Termination.BREAKDOWN_ZERO_CURVATURE, history, sign < 0)
        alpha = rz / pap
        x = x + alpha * p
        r = r - alpha * ap
        if cfg.refresh_every and (k + 1) % cfg.refresh_every == 0:
            r = b - op.apply(x)
        res = float(np.linalg.norm(r))
        if res <= target:
            r_true = b - op.apply(x)
            res_true = float(np.linalg.norm(r_true))
            if res_true <= target:
                if history is not None:
                    zf = sign * apply_c(r_true)
                    history.append(k + 1, res_true, float(r_true @ zf), x)
                return SolveResult(x, k + 1, Termination.CONVERGED, history, sign < 0)
            r, res = r_true, res_true
        z = sign * apply_c(r)
        rz_next = float(r @ z)
        if history is not None:
            history.append(k + 1, res, rz_next, x)
        if rz_next <= cfg.breakdown_tol * np.linalg.norm(r) * np.linalg.norm(z):
            return SolveResult(x, k + 1, Termination.BREAKDOWN_INDEFINITE_PRECONDITIONER, history, sign < 0)
        p = z + (rz_next / rz) * p
        rz = rz_next
    return SolveResult(x, max_outer, Termination.MAX_ITERATIONS, history, sign < 0)


def pminres(op: LinearOperator, precond, b, x0=None, cfg: SolverConfig | None = None) -> SolveResult:
    """Preconditioned MINRES: Lanczos in the preconditioner inner product with
    Givens-rotation QR of the tridiagonal.

    The iterate minimizes || C^{1/2} (b - A x) ||_2 over the preconditioned
    Krylov subspace; the stopping test uses the true unpreconditioned residual.
    A nonpositive Lanczos inner product <w, z> beyond rounding means the
    preconditioner is not definite and the solve stops with a breakdown.
    """
    b, x, cfg, max_outer, history = _prepare(op, b, x0, cfg)
    apply_c = _precond_fn(precond)

    r1 = b - op.apply(x)
    r0_norm = float(np.linalg.norm(r1))
    target = cfg.tol * r0_norm

    sign = 1.0
    y = apply_c(r1)
    beta1_sq = float(r1 @ y)
    if beta1_sq < 0.0 and -beta1_sq > cfg.breakdown_tol * np.linalg.norm(r1) * np.linalg.norm(y):
        sign = -1.0
        y = -y
        beta1_sq = -beta1_sq
    if history is not None:
        history.append(0, r0_norm, np.sqrt(max(beta1_sq, 0.0)), x)
    if r0_norm == 0.0:
        return SolveResult(x, 0, Termination.CONVERGED, history, sign < 0)
    if beta1_sq <= cfg.breakdown_tol * np.linalg.norm(r1) * np.linalg.norm(y):
        return SolveResult(x, 0, Termination.BREAKDOWN_INDEFINITE_PRECONDITIONER, history, sign < 0)

    beta1 = np.sqrt(beta1_sq)
    oldb, beta = 0.0, beta1
    dbar, epsln, phibar = 0.0, 0.0, beta1
    cs, sn = -1.0, 0.0
    w = np.zeros_like(b)
    w2 = np.zeros_like(b)
    r2 = r1
    tnorm2 = 0.0
    eps = np.finfo(float).eps
    stop = None

    for k in range(max_outer):
        v = y / beta
        y = op.apply(v)
        if k >= 1:
            y = y - (beta / oldb) * r1
        alfa = float(v @ y)
        y = y - (alfa / beta) * r2
        r1, r2 = r2, y
        y = sign * apply_c(r2)
        oldb = beta
        beta_sq = float(r2 @ y)
        guard = cfg.breakdown_tol * np.linalg.norm(r2) * np.linalg.norm(y)
        if beta_sq < -guard:
            return SolveResult(x, k + 1, Termination.BREAKDOWN_INDEFINITE_PRECONDITIONER, history, sign < 0)
        beta = np.sqrt(max(beta_sq, 0.0))
        tnorm2 += alfa**2 + oldb**2 + beta**2
        anorm = np.sqrt(tnorm2)
        if beta_sq <= guard or beta <= 100.0 * eps * anorm:
            # Krylov space exhausted: the next direction is pure rounding noise
            beta = 0.0
            stop = "exhausted"

        oldeps = epsln
        delta = cs * dbar + sn * alfa
        gbar = sn * dbar - cs * alfa
        epsln = sn * beta
        dbar = -cs * beta
        if np.hypot(gbar, dbar) <= cfg.tol * anorm and stop is None:
            # normal-equations residual of the preconditioned system is at the
            # noise floor: the minimum-residual point is reached (rhs may be
            # outside the range)
            stop = "stalled"
        gamma = np.hypot(gbar, beta)
        if gamma <= 100.0 * eps * anorm:
            # singular last column of the tridiagonal QR: the remaining
            # component is unresolvable, so keep the current iterate
            r_true = b - op.apply(x)
            res = float(np.linalg.norm(r_true))
            if history is not None:
                history.append(k + 1, res, phibar, x)
            term = Termination.CONVERGED if res <= target else Termination.MAX_ITERATIONS
            return SolveResult(x, k + 1, term, history, sign < 0)
        cs = gbar / gamma
        sn = beta / gamma
        phi = cs * phibar
        phibar = sn * phibar

        w1, w2 = w2, w
        w = (v - oldeps * w1 - delta * w2) / gamma
        x = x + phi * w

        r_true = b - op.apply(x)
        res = float(np.linalg.norm(r_true))
        if history is not None:
            history.append(k + 1, res, phibar, x)
        if res <= target:
            return SolveResult(x, k + 1, Termination.CONVERGED, history, sign < 0)
        if stop is not None:
            return SolveResult(x, k + 1, Termination.MAX_ITERATIONS, history, sign < 0)
    return SolveResult(x, max_outer, Termination.MAX_ITERATIONS, history, sign < 0)
