"""Stationary inner-iteration preconditioning for Krylov methods on symmetric,
possibly singular, possibly indefinite systems, with adapters for
rank-deficient least-squares and minimum-norm problems."""

from .analysis import (
    BoundCurve,
    Definiteness,
    DefinitenessReport,
    OmegaIntervals,
    SpectralSummary,
    cg_bound_curve,
    check_definiteness,
    kappa_ell,
    kappa_from_spectrum,
    mr_bound_curve,
    omega_interval_shifted,
    solution_form_oracle,
    spectral_summary,
    ssor_omega_intervals,
)
from .dense import DENSE_CAP, DenseCapExceeded, SymEig, dense_sym_eig, pinv_sym, sqrt_sym_pd
from .krylov import (
    ConvergenceHistory,
    LinearOperator,
    SolveResult,
    SolverConfig,
    Termination,
    normal_left_operator,
    normal_right_operator,
    operator_from_sparse,
    pcg,
    pminres,
)
from .lsq import LsqProblem, LsqResult, ProblemKind, cgls, cgne, lsmr, mrne
from .mmio import MatrixMarketHeader, mm_read, mm_write, read_rhs
from .sparse import SparseMatrix, spmv, spmv_t
from .splittings import InnerPreconditioner, Side, Splitting, SplittingKind, materialize_dense

__all__ = [
    "BoundCurve",
    "ConvergenceHistory",
    "DENSE_CAP",
    "Definiteness",
    "DefinitenessReport",
    "DenseCapExceeded",
    "InnerPreconditioner",
    "LinearOperator",
    "LsqProblem",
    "LsqResult",
    "MatrixMarketHeader",
    "OmegaIntervals",
    "ProblemKind",
    "Side",
    "SolveResult",
    "SolverConfig",
    "SparseMatrix",
    "SpectralSummary",
    "Splitting",
    "SplittingKind",
    "SymEig",
    "Termination",
    "cg_bound_curve",
    "cgls",
    "cgne",
    "check_definiteness",
    "dense_sym_eig",
    "kappa_ell",
    "kappa_from_spectrum",
    "lsmr",
    "materialize_dense",
    "mm_read",
    "mm_write",
    "mr_bound_curve",
    "mrne",
    "normal_left_operator",
    "normal_right_operator",
    "omega_interval_shifted",
    "operator_from_sparse",
    "pcg",
    "pinv_sym",
    "pminres",
    "read_rhs",
    "solution_form_oracle",
    "spectral_summary",
    "spmv",
    "spmv_t",
    "sqrt_sym_pd",
    "ssor_omega_intervals",
]
