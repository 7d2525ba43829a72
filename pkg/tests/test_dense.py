import numpy as np
import pytest

from innerprec.dense import DenseCapExceeded, dense_sym_eig, pinv_sym, sqrt_sym_pd


def test_eig_known_values():
    eig = dense_sym_eig(np.diag([3.0, 1.0]))
    np.testing.assert_allclose(eig.values, [1.0, 3.0])
    eig2 = dense_sym_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(eig2.values, [-1.0, 1.0])


def test_eig_reconstruction(rng):
    a = rng.standard_normal((20, 20))
    a = (a + a.T) / 2
    eig = dense_sym_eig(a)
    assert np.all(np.diff(eig.values) >= 0)
    q = eig.vectors
    assert np.abs(q.T @ q - np.eye(20)).max() <= 1e-10
    assert np.abs(a @ q - q * eig.values).max() <= 1e-8 * np.abs(a).max()


def test_eig_rejects_asymmetric_and_oversize():
    with pytest.raises(ValueError, match="asymmetric"):
        dense_sym_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(DenseCapExceeded):
        dense_sym_eig(np.zeros((2001, 2001)))


def test_pinv_known_values():
    np.testing.assert_allclose(pinv_sym(np.diag([2.0, 1.0, 0.0])), np.diag([0.5, 1.0, 0.0]), atol=1e-14)
    np.testing.assert_allclose(pinv_sym(np.eye(3)), np.eye(3), atol=1e-14)
    # eigenvalues {2, 0}: the nonzero part inverts to 1/2 on the (1,1)/sqrt(2) direction
    np.testing.assert_allclose(
        pinv_sym(np.array([[1.0, 1.0], [1.0, 1.0]])), np.full((2, 2), 0.25), atol=1e-14
    )


def test_pinv_moore_penrose_identities(rng):
    q, _ = np.linalg.qr(rng.standard_normal((12, 12)))
    eigs = np.concatenate([rng.uniform(0.5, 2.0, 8), np.zeros(4)])
    a = (q * eigs) @ q.T
    a = (a + a.T) / 2
    x = pinv_sym(a)
    assert np.abs(a @ x @ a - a).max() <= 1e-8
    assert np.abs(x @ a @ x - x).max() <= 1e-8
    assert np.abs(a @ x - (a @ x).T).max() <= 1e-8
    assert np.abs(x @ a - (x @ a).T).max() <= 1e-8


def test_pinv_rank_tol_required_positive():
    with pytest.raises(ValueError):
        pinv_sym(np.eye(2), rank_tol=0.0)


def test_sqrt_known_values():
    np.testing.assert_allclose(sqrt_sym_pd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)
    np.testing.assert_allclose(sqrt_sym_pd(np.eye(4)), np.eye(4), atol=1e-14)


def test_sqrt_squares_back(rng):
    b = rng.standard_normal((10, 10))
    a = b @ b.T + 0.5 * np.eye(10)
    s = sqrt_sym_pd(a)
    assert np.abs(s @ s - a).max() <= 1e-10 * np.abs(a).max()
    assert np.abs(s - s.T).max() == 0.0


def test_sqrt_rejects_non_spd():
    with pytest.raises(ValueError, match="positive definite"):
        sqrt_sym_pd(np.diag([1.0, 0.0]))
    with pytest.raises(ValueError, match="positive definite"):
        sqrt_sym_pd(np.diag([1.0, -1.0]))
