"""Seeded generators for desk-scale test and benchmark problems.

Rank is controlled exactly by building matrices from random orthonormal
factors and a prescribed spectrum; the results are dense but stored in CSR
like everything else, since exact rank control matters more here than
sparsity realism.
"""

from __future__ import annotations

import numpy as np

from .sparse import SparseMatrix


def random_orthonormal(rng: np.random.Generator, n: int, k: int | None = None) -> np.ndarray:
    """n x k matrix with orthonormal columns (k defaults to n)."""
    k = n if k is None else k
    q, r = np.linalg.qr(rng.standard_normal((n, k)))
    return q * np.sign(np.where(np.diag(r) == 0, 1.0, np.diag(r)))


def random_symmetric(
    rng: np.random.Generator,
    n: int,
    spectral_radius: float = 1.0,
    min_abs_diag: float = 0.0,
) -> np.ndarray:
    """Dense random symmetric matrix scaled to roughly the requested spectral
    radius.

    With ``min_abs_diag`` > 0 every diagonal entry is pushed away from zero
    (keeping its sign), which the diagonal-based splittings require; the bump
    perturbs the spectral radius slightly.
    """
    a = rng.standard_normal((n, n))
    a = (a + a.T) / 2.0
    radius = float(np.abs(np.linalg.eigvalsh(a)).max())
    if radius > 0.0:
        a *= spectral_radius / radius
    if min_abs_diag > 0.0:
        bump = min_abs_diag * spectral_radius
        d = np.diag(a).copy()
        d = np.where(np.abs(d) < bump, np.where(d < 0.0, -bump, bump), d)
        np.fill_diagonal(a, d)
    return a


def random_spsd(
    rng: np.random.Generator,
    n: int,
    rank: int,
    eig_range: tuple[float, float] = (0.5, 2.0),
) -> np.ndarray:
    """Dense random SPSD matrix with exact rank and eigenvalues in eig_range."""
    if not 0 <= rank <= n:
        raise ValueError("rank must lie in [0, n]")
    q = random_orthonormal(rng, n)
    eigs = np.zeros(n)
    eigs[:rank] = rng.uniform(*eig_range, size=rank)
    a = (q * eigs) @ q.T
    return (a + a.T) / 2.0


def random_rank_deficient(
    rng: np.random.Generator,
    m: int,
    n: int,
    rank: int,
    sv_range: tuple[float, float] = (0.5, 2.0),
) -> SparseMatrix:
    """m x n matrix with exact rank, singular values in sv_range, stored CSR."""
    if not 1 <= rank <= min(m, n):
        raise ValueError("rank must lie in [1, min(m, n)]")
    u = random_orthonormal(rng, m, rank)
    v = random_orthonormal(rng, n, rank)
    sv = rng.uniform(*sv_range, size=rank)
    return SparseMatrix.from_dense((u * sv) @ v.T)


def consistent_rhs(rng: np.random.Generator, a: np.ndarray) -> np.ndarray:
    """Right-hand side guaranteed to lie in the range of a (dense, square)."""
    return a @ rng.standard_normal(a.shape[0])
