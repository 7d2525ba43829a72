"""Dense symmetric linear algebra used as desk-scale oracles.

Everything here is eigendecomposition-based and capped at ``DENSE_CAP`` rows;
callers that outgrow the cap get a :class:`DenseCapExceeded` instead of a
silent approximation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DENSE_CAP = 2000
SYM_TOL = 1e-10


class DenseCapExceeded(ValueError):
    """Raised when a dense analysis operation is asked for too large a matrix."""


def check_dense_operand(a: np.ndarray, cap: int = DENSE_CAP, sym_tol: float = SYM_TOL) -> np.ndarray:
    """Validate a square symmetric dense operand; returns it as float64."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > cap:
        raise DenseCapExceeded(f"dense operations are capped at n <= {cap}, got {a.shape[0]}")
    scale = max(1.0, np.abs(a).max()) if a.size else 1.0
    if np.abs(a - a.T).max(initial=0.0) > sym_tol * scale:
        raise ValueError("asymmetric input")
    return a


@dataclass(frozen=True)
class SymEig:
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending."""

    values: np.ndarray
    vectors: np.ndarray


def dense_sym_eig(a) -> SymEig:
    a = check_dense_operand(a)
    values, vectors = np.linalg.eigh((a + a.T) / 2.0)
    return SymEig(values, vectors)


def pinv_sym(a, rank_tol: float = 1e-12) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a symmetric matrix.

    Eigenvalues with |lambda| <= rank_tol * max|lambda| are treated as zero.
    """
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    eig = dense_sym_eig(a)
    mags = np.abs(eig.values)
    cutoff = rank_tol * mags.max(initial=0.0)
    inv = np.where(mags > cutoff, 1.0 / np.where(mags > cutoff, eig.values, 1.0), 0.0)
    return (eig.vectors * inv) @ eig.vectors.T


def sqrt_sym_pd(a) -> np.ndarray:
    """Symmetric square root of a symmetric positive definite matrix."""
    eig = dense_sym_eig(a)
    if eig.values.size == 0 or eig.values.min() <= 0.0:
        raise ValueError("input is not symmetric positive definite")
    root = (eig.vectors * np.sqrt(eig.values)) @ eig.vectors.T
    return (root + root.T) / 2.0
