import math

import numpy as np
import pytest

from innerprec.analysis import (
    Definiteness,
    OmegaIntervals,
    cg_bound_curve,
    check_definiteness,
    classify_definiteness,
    kappa_ell,
    kappa_from_spectrum,
    mr_bound_curve,
    omega_interval_shifted,
    solution_form_oracle,
    spectral_summary,
    ssor_omega_intervals,
)
from innerprec.dense import pinv_sym, sqrt_sym_pd
from innerprec.krylov import SolverConfig, operator_from_sparse, pcg
from innerprec.problems import random_spsd, random_symmetric
from innerprec.sparse import SparseMatrix
from innerprec.splittings import InnerPreconditioner, Splitting, SplittingKind, materialize_dense


def _precond(a_dense, kind, omega, ell):
    return InnerPreconditioner(Splitting(kind, SparseMatrix.from_dense(a_dense), omega), ell)


# -- definiteness -------------------------------------------------------------

def test_classify_verdicts():
    assert classify_definiteness(np.array([0.5, 2.0])).verdict == Definiteness.SPD
    assert classify_definiteness(np.array([-2.0, -0.5])).verdict == Definiteness.SND
    assert classify_definiteness(np.array([-1.0, 1.0])).verdict == Definiteness.INDEFINITE
    assert classify_definiteness(np.array([0.0, 1.0])).verdict == Definiteness.SINGULAR_SEMIDEFINITE
    assert classify_definiteness(np.array([-1.0, 0.0])).verdict == Definiteness.SINGULAR_SEMIDEFINITE


def test_check_definiteness_identity():
    rep_m, rep_mn, rep_c = check_definiteness(_precond(np.eye(2), SplittingKind.RICHARDSON, 1.0, 3))
    assert rep_m.verdict == rep_mn.verdict == rep_c.verdict == Definiteness.SPD


def test_check_definiteness_indefinite_operand_spd_preconditioner():
    # A = diag(1, -1) with M = I: M and M + N = diag(1, 3) are both SPD even
    # though the stationary iteration itself diverges
    rep_m, rep_mn, rep_c = check_definiteness(
        _precond(np.diag([1.0, -1.0]), SplittingKind.RICHARDSON, 1.0, 1)
    )
    assert rep_m.verdict == Definiteness.SPD
    assert rep_mn.verdict == Definiteness.SPD
    assert rep_c.verdict == Definiteness.SPD
    np.testing.assert_allclose([rep_mn.min_eig, rep_mn.max_eig], [1.0, 3.0], atol=1e-12)


def test_check_definiteness_ssor_large_omega_not_spd():
    # omega (2 - omega) < 0 makes the SSOR splitting matrix negative definite
    rep_m, _, rep_c = check_definiteness(
        _precond(np.array([[2.0, -1.0], [-1.0, 2.0]]), SplittingKind.SSOR, 2.5, 1)
    )
    assert rep_m.verdict == Definiteness.SND
    assert rep_c.verdict == Definiteness.SND


def _definite_matches(report, side):
    return report.verdict == side


def test_definiteness_theorem_iff_random(rng):
    kinds = [SplittingKind.RICHARDSON, SplittingKind.JOR, SplittingKind.SSOR]
    checked = 0
    attempts = 0
    while checked < 60 and attempts < 600:
        attempts += 1
        n = int(rng.integers(3, 14))
        a = random_symmetric(rng, n, min_abs_diag=0.15)
        kind = kinds[attempts % 3]
        omega = float(rng.uniform(-3.0, 3.0))
        if abs(omega) < 0.05 or abs(omega - 2.0) < 0.05:
            continue
        ell = int(rng.integers(1, 6))
        p = _precond(a, kind, omega, ell)
        rep_m, rep_mn, rep_c = check_definiteness(p)
        governing = rep_m if ell % 2 == 1 else rep_mn
        margins = [
            min(abs(r.min_eig), abs(r.max_eig)) / max(abs(r.min_eig), abs(r.max_eig), 1e-300)
            for r in (governing, rep_c)
        ]
        if min(margins) < 1e-8:
            continue
        for side in (Definiteness.SPD, Definiteness.SND):
            assert _definite_matches(rep_c, side) == _definite_matches(governing, side)
        checked += 1
    assert checked == 60


# -- omega intervals ----------------------------------------------------------

def test_omega_interval_shifted_cases():
    pos = omega_interval_shifted(np.diag([1.0, -1.0]), np.eye(2))
    assert pos.intervals == ((0.0, 2.0),)
    neg = omega_interval_shifted(-np.eye(2), np.eye(2))
    assert neg.intervals == ((-math.inf, -2.0), (0.0, math.inf))
    zero = omega_interval_shifted(np.zeros((2, 2)), np.eye(2))
    assert zero.intervals == ((0.0, math.inf),)


def test_omega_interval_shifted_rejects_non_spd_basis():
    with pytest.raises(ValueError, match="positive definite"):
        omega_interval_shifted(np.eye(2), np.diag([1.0, 0.0]))


def _two_m_minus_a_spd(a, b, omega):
    m = b / omega
    return np.linalg.eigvalsh(2.0 * m - a).min() > 0.0


def test_omega_interval_boundary_flips(rng):
    for trial in range(20):
        n = int(rng.integers(3, 10))
        a = random_symmetric(rng, n, min_abs_diag=0.3)
        if trial % 2 == 0:
            b = np.eye(n)
        else:
            b = np.diag(np.abs(np.diag(a)) + 0.5)
        intervals = omega_interval_shifted(a, b)
        eps = 1e-3
        for lo, hi in intervals.intervals:
            for endpoint, inside, outside in ((lo, lo + eps, lo - eps), (hi, hi - eps, hi + eps)):
                if math.isinf(endpoint):
                    continue
                assert _two_m_minus_a_spd(a, b, inside), f"inside {inside} should be SPD"
                if not intervals.contains(outside) and outside != 0.0:
                    assert not _two_m_minus_a_spd(a, b, outside), f"outside {outside} should fail"


def test_ssor_intervals_tridiagonal_example():
    a = np.array([[2.0, -1.0], [-1.0, 2.0]])
    odd, even = ssor_omega_intervals(a)
    assert odd.intervals == ((0.0, 2.0),)
    # mu = -1/2 + 1 = 1/2 and rho_s = 1/2 + 2/4 + 1 = 2: only the mu >= 1/2 row fires
    assert even.intervals == ((0.0, 2.0),)
    assert "mu >= 1/2" in even.case_label
    assert "rho_s" not in even.case_label


def test_ssor_intervals_identity():
    odd, even = ssor_omega_intervals(np.eye(3))
    assert odd.intervals == ((0.0, 2.0),)
    assert even.intervals == ((0.0, 2.0),)


def test_ssor_intervals_sampled_omegas_yield_spd(rng):
    hits = 0
    for _ in range(20):
        n = int(rng.integers(3, 10))
        a = random_symmetric(rng, n)
        a += np.diag(np.abs(np.diag(a)) - np.diag(a) + 0.4)  # force positive diagonal
        _, even = ssor_omega_intervals(a)
        for lo, hi in even.intervals:
            lo_c = max(lo + 1e-3, -8.0)
            hi_c = min(hi - 1e-3, 8.0)
            if lo_c >= hi_c:
                continue
            for omega in np.linspace(lo_c, hi_c, 4):
                if abs(omega) < 1e-6 or abs(omega - 2.0) < 1e-6:
                    continue
                c, _ = materialize_dense(_precond(a, SplittingKind.SSOR, float(omega), 2))
                assert np.linalg.eigvalsh(c).min() > 0.0, f"omega={omega} not SPD"
                hits += 1
    assert hits >= 20


def test_omega_intervals_validation():
    with pytest.raises(ValueError, match="empty"):
        OmegaIntervals(((1.0, 1.0),), "bad")
    with pytest.raises(ValueError, match="overlap"):
        OmegaIntervals(((0.0, 2.0), (1.0, 3.0)), "bad")
    enc = OmegaIntervals(((-math.inf, -2.0), (0.0, math.inf)), "x").to_dict()
    assert enc["intervals"] == [["-inf", -2.0], [0.0, "inf"]]


# -- spectral summary ---------------------------------------------------------

def test_spectral_summary_divergent_example():
    summary = spectral_summary(_precond(np.diag([1.0, -1.0]), SplittingKind.RICHARDSON, 1.0, 1))
    assert summary.nu == pytest.approx(2.0, abs=1e-12)
    assert not summary.semiconvergent


def test_spectral_summary_jor_unit_eigenvalue():
    summary = spectral_summary(_precond(np.full((2, 2), 1.0), SplittingKind.JOR, 0.5, 1))
    assert summary.nu == pytest.approx(0.0, abs=1e-12)
    assert summary.unit_eigs_simple
    assert summary.semiconvergent


def test_spectral_summary_h_zero():
    summary = spectral_summary(_precond(np.eye(3), SplittingKind.RICHARDSON, 1.0, 2))
    assert summary.nu == 0.0
    assert summary.semiconvergent
    assert summary.lambda_max_h == pytest.approx(0.0, abs=1e-12)


def test_spectral_summary_all_unit_spectrum():
    # zero operand: H = I, no non-unit eigenvalues at all
    summary = spectral_summary(_precond(np.zeros((3, 3)), SplittingKind.RICHARDSON, 1.0, 1))
    assert summary.nu == 0.0
    assert summary.lambda_max_h is None
    assert summary.semiconvergent


def test_keller_semiconvergence_criterion(rng):
    # with M symmetric nonsingular and M + N SPD, the inner iteration is
    # semiconvergent exactly when the operand is positive semidefinite
    checked = 0
    while checked < 40:
        n = int(rng.integers(3, 16))
        if checked % 2 == 0:
            a = random_spsd(rng, n, int(rng.integers(1, n + 1)))
        else:
            a = random_symmetric(rng, n)
            eigs = np.linalg.eigvalsh(a)
            if eigs.min() > -1e-8:
                continue
        use_jor = checked % 4 == 1
        if use_jor:
            a = a + np.diag(np.abs(np.diag(a)) - np.diag(a) + 0.4)
            b = np.diag(np.diag(a))
            kind = SplittingKind.JOR
        else:
            b = np.eye(n)
            kind = SplittingKind.RICHARDSON
        intervals = omega_interval_shifted(a, b)
        lo, hi = intervals.intervals[-1]  # the interval with positive omegas
        omega = float(min(hi - 1e-3, lo + 1.0) if math.isfinite(hi) else lo + 1.0)
        p = _precond(a, kind, omega, 1)
        summary = spectral_summary(p)
        a_psd = np.linalg.eigvalsh(a).min() >= -1e-8
        assert summary.semiconvergent == a_psd
        checked += 1


# -- kappa and bounds ---------------------------------------------------------

def test_kappa_identity_is_one():
    for ell in (1, 2, 3):
        assert kappa_ell(_precond(np.eye(3), SplittingKind.RICHARDSON, 1.0, ell)) == pytest.approx(1.0)


def test_kappa_rank_one_projector():
    # spectrum of I - H is {1, 0}; the nonzero part is a single point
    p = _precond(np.full((2, 2), 1.0), SplittingKind.JOR, 0.5, 1)
    assert kappa_ell(p) == pytest.approx(1.0, abs=1e-12)


def test_kappa_matches_pinv_oracle(rng):
    a = random_spsd(rng, 20, 14)
    p = _precond(a, SplittingKind.SSOR, 1.0, 2)
    kappa = kappa_ell(p)
    c, _ = materialize_dense(p)
    root = sqrt_sym_pd(c)
    s_hat = root @ a @ root
    s_hat = (s_hat + s_hat.T) / 2
    norm = np.linalg.norm(s_hat, 2)
    pinv_norm = np.linalg.norm(pinv_sym(s_hat), 2)
    assert kappa == pytest.approx(norm * pinv_norm, rel=1e-8)


def test_kappa_even_step_spectrum_estimate_agrees(rng):
    # for even step counts the spectrum-based closed form matches the
    # operational value on semiconvergent instances
    for _ in range(5):
        a = random_spsd(rng, 12, 9)
        p = _precond(a, SplittingKind.SSOR, 1.1, 2)
        summary = spectral_summary(p)
        assert summary.semiconvergent
        assert kappa_from_spectrum(summary, 2) == pytest.approx(kappa_ell(p), rel=1e-8)


def test_kappa_rejects_indefinite_operand():
    with pytest.raises(ValueError, match="positive semidefinite"):
        kappa_ell(_precond(np.diag([1.0, -1.0]), SplittingKind.RICHARDSON, 0.5, 1))


def test_mr_bound_nu_zero_collapses():
    p = _precond(np.full((2, 2), 1.0), SplittingKind.JOR, 0.5, 1)
    curve = mr_bound_curve(p, 4)
    assert curve.values[0] == 1.0
    np.testing.assert_allclose(curve.values[1:], 0.0, atol=1e-15)


def test_mr_bound_requires_semiconvergence():
    p = _precond(np.diag([1.0, -1.0]), SplittingKind.RICHARDSON, 1.0, 1)
    with pytest.raises(ValueError, match="semiconvergent"):
        mr_bound_curve(p, 3)


def test_mr_bound_monotone_random(rng):
    a = random_spsd(rng, 15, 11)
    curve = mr_bound_curve(_precond(a, SplittingKind.SSOR, 1.3, 2), 12)
    assert curve.values[0] == 1.0
    assert np.all(np.diff(curve.values) <= 1e-15)


def test_cg_bound_values():
    p_id = _precond(np.eye(3), SplittingKind.RICHARDSON, 1.0, 1)
    np.testing.assert_allclose(cg_bound_curve(p_id, 3).values[1:], 0.0, atol=1e-15)
    # kappa = 9 gives ratio (3-1)/(3+1) = 1/2, so bound(3) = 2 / 8 = 0.25
    ks = np.arange(4)
    q = (3.0 - 1.0) / (3.0 + 1.0)
    expected = np.minimum(1.0, 2.0 * q**ks)
    assert expected[3] == pytest.approx(0.25)


def test_cg_bound_dominates_measured_error(rng):
    a = random_spsd(rng, 16, 16, eig_range=(0.5, 4.0))  # SPD instance
    sp = SparseMatrix.from_dense(a)
    p = _precond(a, SplittingKind.SSOR, 1.0, 1)
    b = a @ rng.standard_normal(16)
    cfg = SolverConfig(tol=1e-13, max_outer=60, record_iterates=True)
    res = pcg(operator_from_sparse(sp), p, b, cfg=cfg)
    c, _ = materialize_dense(p)
    x_star = solution_form_oracle(a, c, b, np.zeros(16))
    curve = cg_bound_curve(p, len(res.history.iterates) - 1)
    e0 = np.sqrt((res.history.iterates[0] - x_star) @ (a @ (res.history.iterates[0] - x_star)))
    for k, x in enumerate(res.history.iterates):
        err = np.sqrt(max((x - x_star) @ (a @ (x - x_star)), 0.0))
        assert err <= curve.values[k] * e0 + 1e-10


# -- solution-form oracle -----------------------------------------------------

def test_solution_form_identity():
    b = np.array([1.0, -2.0, 0.5])
    np.testing.assert_allclose(solution_form_oracle(np.eye(3), np.eye(3), b, np.zeros(3)), b)


def test_solution_form_singular_diagonal():
    x = solution_form_oracle(np.diag([1.0, -1.0, 0.0]), np.eye(3), np.array([1.0, 1.0, 0.0]), np.zeros(3))
    np.testing.assert_allclose(x, [1.0, -1.0, 0.0], atol=1e-12)


def test_solution_form_scaled_preconditioner():
    a = np.full((2, 2), 1.0)
    x = solution_form_oracle(a, 0.5 * np.eye(2), np.array([2.0, 2.0]), np.zeros(2))
    np.testing.assert_allclose(x, [1.0, 1.0], atol=1e-12)


def test_solution_form_keeps_null_component():
    a = np.diag([1.0, 0.0])
    x0 = np.array([0.0, 3.0])
    x = solution_form_oracle(a, np.eye(2), np.array([2.0, 0.0]), x0)
    np.testing.assert_allclose(x, [2.0, 3.0], atol=1e-12)


def test_solution_form_rejects_inconsistent_rhs():
    with pytest.raises(ValueError, match="range"):
        solution_form_oracle(np.diag([1.0, 0.0]), np.eye(2), np.array([0.0, 1.0]), np.zeros(2))
