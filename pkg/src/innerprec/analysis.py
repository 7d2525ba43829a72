"""Dense desk-scale analysis: definiteness verdicts, admissible relaxation
intervals, iteration-matrix spectra, and convergence-bound curves.

Everything here materializes matrices densely and is capped at n <= 2000;
the solvers themselves stay matrix-free at any size.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .dense import DENSE_CAP, check_dense_operand, dense_sym_eig, pinv_sym, sqrt_sym_pd
from .splittings import InnerPreconditioner, materialize_dense

UNIT_EIG_TOL = 1e-10  # |lambda - 1| below this counts as a unit eigenvalue
DEFINITENESS_TOL = 1e-10  # relative to the spectral range


class Definiteness(enum.Enum):
    SPD = "spd"
    SND = "snd"
    INDEFINITE = "indefinite"
    SINGULAR_SEMIDEFINITE = "singular-semidefinite"


@dataclass(frozen=True)
class DefinitenessReport:
    subject: str  # one of "m", "m_plus_n", "c_ell"
    verdict: Definiteness
    min_eig: float
    max_eig: float

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "verdict": self.verdict.value,
            "min_eig": self.min_eig,
            "max_eig": self.max_eig,
        }


def classify_definiteness(eigenvalues: np.ndarray, subject: str = "") -> DefinitenessReport:
    lo = float(eigenvalues.min())
    hi = float(eigenvalues.max())
    tol = DEFINITENESS_TOL * max(abs(lo), abs(hi), 1.0)
    if lo > tol:
        verdict = Definiteness.SPD
    elif hi < -tol:
        verdict = Definiteness.SND
    elif lo < -tol and hi > tol:
        verdict = Definiteness.INDEFINITE
    else:
        verdict = Definiteness.SINGULAR_SEMIDEFINITE
    return DefinitenessReport(subject, verdict, lo, hi)


def _decisive(report: DefinitenessReport) -> bool:
    # Margin guard: near-singular matrices are not second-guessed by the
    # self-consistency check below.
    scale = max(abs(report.min_eig), abs(report.max_eig), 1.0)
    return min(abs(report.min_eig), abs(report.max_eig)) > 1e-8 * scale


def check_definiteness(
    p: InnerPreconditioner, cap: int = DENSE_CAP
) -> tuple[DefinitenessReport, DefinitenessReport, DefinitenessReport]:
    """Verdicts for M, M + N (= 2M - A), and C via dense eigendecompositions.

    For odd step counts C is definite exactly when M is; for even step counts
    exactly when M + N is. The computed verdicts are cross-checked against
    that equivalence and a violation (away from singular margins) raises.
    """
    s = p.splitting
    a = s.dense_operator(cap)
    m = s.dense_m(cap)
    c, _ = materialize_dense(p, cap)
    rep_m = classify_definiteness(dense_sym_eig(m).values, "m")
    rep_mn = classify_definiteness(dense_sym_eig(2.0 * m - a).values, "m_plus_n")
    rep_c = classify_definiteness(dense_sym_eig(c).values, "c_ell")
    governing = rep_m if p.ell % 2 == 1 else rep_mn
    if _decisive(governing) and _decisive(rep_c):
        for side in (Definiteness.SPD, Definiteness.SND):
            if (rep_c.verdict == side) != (governing.verdict == side):
                raise RuntimeError(
                    "definiteness self-consistency violated: "
                    f"C is {rep_c.verdict.value} but {governing.subject} is {governing.verdict.value}"
                )
    return rep_m, rep_mn, rep_c


@dataclass(frozen=True)
class OmegaIntervals:
    """Open intervals of admissible relaxation parameters."""

    intervals: tuple[tuple[float, float], ...]
    case_label: str

    def __post_init__(self):
        for lo, hi in self.intervals:
            if not lo < hi:
                raise ValueError(f"empty interval ({lo}, {hi})")
        spans = sorted(self.intervals)
        for (_, hi), (lo, _) in zip(spans, spans[1:]):
            if lo < hi:
                raise ValueError("intervals overlap")

    def contains(self, omega: float) -> bool:
        return any(lo < omega < hi for lo, hi in self.intervals)

    def to_dict(self) -> dict:
        def enc(v):
            if math.isinf(v):
                return "inf" if v > 0 else "-inf"
            return v

        return {
            "intervals": [[enc(lo), enc(hi)] for lo, hi in self.intervals],
            "case_label": self.case_label,
        }


def omega_interval_shifted(a, b) -> OmegaIntervals:
    """Relaxation parameters for which 2 M - A is SPD, with M = B / omega.

    B must be SPD. The interval follows from the sign of the largest
    eigenvalue of B^{-1/2} A B^{-1/2}.
    """
    a = check_dense_operand(a)
    b = check_dense_operand(b)
    if a.shape != b.shape:
        raise ValueError("operands must have matching shapes")
    b_eig = dense_sym_eig(b)
    if b_eig.values.min() <= 0.0:
        raise ValueError("B must be symmetric positive definite")
    s_inv = (b_eig.vectors / np.sqrt(b_eig.values)) @ b_eig.vectors.T
    lam_max = float(dense_sym_eig(s_inv @ a @ s_inv).values.max())
    scale = max(1.0, float(np.abs(a).max()))
    if abs(lam_max) <= 1e-12 * scale:
        return OmegaIntervals(((0.0, math.inf),), "lambda_max = 0")
    if lam_max > 0.0:
        return OmegaIntervals(((0.0, 2.0 / lam_max),), "lambda_max > 0")
    return OmegaIntervals(
        ((-math.inf, 2.0 / lam_max), (0.0, math.inf)), "lambda_max < 0"
    )


def ssor_omega_intervals(a_induced) -> tuple[OmegaIntervals, OmegaIntervals]:
    """(odd-step, even-step) admissible relaxation intervals for SSOR.

    The odd-step interval is exactly (0, 2). The even-step set is a union of
    sufficient intervals determined by

        mu    = lambda_min[D^{-1/2} (L + L^T) D^{-1/2}] + 1,
        rho_s = lambda_max[D^{-1/2} (L + L^T) D^{-1/2}]
                + 2 lambda_max[D^{-1/2} L D^{-1} L^T D^{-1/2}] + 1.
    """
    a = check_dense_operand(a_induced)
    d = np.diag(a).copy()
    if np.any(d == 0.0):
        raise ValueError("SSOR intervals require a nonzero diagonal")
    if np.any(d < 0.0):
        # The interval table is derived for a positive diagonal; with mixed
        # signs the scaled matrices below are not the right objects.
        raise ValueError("SSOR intervals require a positive diagonal")
    d_isqrt = 1.0 / np.sqrt(d)
    lower = np.tril(a, -1)
    off = a - np.diag(d)
    scaled_off = d_isqrt[:, None] * off * d_isqrt[None, :]
    scaled_low = d_isqrt[:, None] * (lower @ np.diag(1.0 / d) @ lower.T) * d_isqrt[None, :]
    off_eigs = dense_sym_eig(scaled_off).values
    mu = float(off_eigs.min()) + 1.0
    rho_s = float(off_eigs.max()) + 2.0 * float(dense_sym_eig(scaled_low).values.max()) + 1.0

    zero_tol = 1e-12
    intervals: list[tuple[float, float]] = []
    labels: list[str] = []
    if abs(mu) <= zero_tol:
        intervals.append((0.0, 1.0))
        labels.append("mu = 0")
    elif mu < 0.5:
        intervals.append((0.0, (1.0 - math.sqrt(1.0 - 2.0 * mu)) / mu))
        labels.append("mu < 1/2")
    else:
        intervals.append((0.0, 2.0))
        labels.append("mu >= 1/2")
    if abs(rho_s) <= zero_tol:
        intervals.append((2.0, math.inf))
        labels.append("rho_s = 0")
    elif rho_s < 0.0:
        cut = (1.0 + math.sqrt(1.0 - 2.0 * rho_s)) / rho_s
        intervals.append((-math.inf, cut))
        intervals.append((2.0, math.inf))
        labels.append("rho_s < 0")
    elif rho_s < 0.5:
        intervals.append((2.0, (1.0 + math.sqrt(1.0 - 2.0 * rho_s)) / rho_s))
        labels.append("rho_s in (0, 1/2)")
    odd = OmegaIntervals(((0.0, 2.0),), "odd steps")
    even = OmegaIntervals(tuple(intervals), "; ".join(labels))
    return odd, even


@dataclass(frozen=True)
class SpectralSummary:
    """Spectrum facts for the iteration matrix H = M^{-1} N.

    ``nu`` is the largest eigenvalue modulus excluding eigenvalues equal to 1;
    ``delta`` is the eigenvalue of smallest modulus over the whole spectrum.
    H is semiconvergent exactly when nu < 1 and the unit eigenvalues are
    simple (their eigenspace has full dimension).
    """

    nu: float
    lambda_max_h: float | None
    lambda_min_h: float | None
    delta: float
    semiconvergent: bool
    unit_eigs_simple: bool
    spectrum_real: bool

    def to_dict(self) -> dict:
        return {
            "nu": self.nu,
            "lambda_max_h": self.lambda_max_h,
            "lambda_min_h": self.lambda_min_h,
            "delta": self.delta,
            "semiconvergent": self.semiconvergent,
            "unit_eigs_simple": self.unit_eigs_simple,
            "spectrum_real": self.spectrum_real,
        }


def spectral_summary(p: InnerPreconditioner, cap: int = DENSE_CAP) -> SpectralSummary:
    s = p.splitting
    a = s.dense_operator(cap)
    m = s.dense_m(cap)
    n = s.dimension
    m_report = classify_definiteness(dense_sym_eig(m).values)
    if m_report.verdict in (Definiteness.SPD, Definiteness.SND):
        # Symmetric similarity transform: H ~ I - |M|^{-1/2} (sgn A) |M|^{-1/2},
        # guaranteeing a real spectrum and a full eigenbasis.
        m_signed = m if m_report.verdict == Definiteness.SPD else -m
        a_signed = a if m_report.verdict == Definiteness.SPD else -a
        eig_m = dense_sym_eig(m_signed)
        s_inv = (eig_m.vectors / np.sqrt(eig_m.values)) @ eig_m.vectors.T
        h_sym = np.eye(n) - s_inv @ a_signed @ s_inv
        eigs = dense_sym_eig(h_sym).values.astype(complex)
        simple = True  # full orthogonal eigenbasis: unit eigenvalues are semisimple
        real_spectrum = True
    else:
        h = np.eye(n) - np.linalg.solve(m, a)
        eigs = np.linalg.eigvals(h)
        unit_mult = int(np.sum(np.abs(eigs - 1.0) <= UNIT_EIG_TOL))
        if unit_mult == 0:
            simple = True
        else:
            rank = np.linalg.matrix_rank(h - np.eye(n), tol=UNIT_EIG_TOL * max(1.0, np.abs(h).max()))
            simple = rank == n - unit_mult
        real_spectrum = bool(np.abs(eigs.imag).max(initial=0.0) <= 1e-8)

    non_unit = eigs[np.abs(eigs - 1.0) > UNIT_EIG_TOL]
    if non_unit.size:
        nu = float(np.abs(non_unit).max())
        lam_max = float(non_unit.real.max()) if real_spectrum else None
        lam_min = float(non_unit.real.min()) if real_spectrum else None
    else:
        nu = 0.0
        lam_max = None
        lam_min = None
    delta_eig = eigs[np.argmin(np.abs(eigs))]
    return SpectralSummary(
        nu=nu,
        lambda_max_h=lam_max,
        lambda_min_h=lam_min,
        delta=float(delta_eig.real),
        semiconvergent=nu < 1.0 and simple,
        unit_eigs_simple=simple,
        spectrum_real=real_spectrum,
    )


def _check_spsd(a: np.ndarray, what: str):
    eigs = dense_sym_eig(a).values
    tol = DEFINITENESS_TOL * max(abs(eigs[0]), abs(eigs[-1]), 1.0)
    if eigs.min() < -tol:
        raise ValueError(f"{what} must be symmetric positive semidefinite")


def kappa_ell(p: InnerPreconditioner, cap: int = DENSE_CAP) -> float:
    """Effective condition number of the preconditioned matrix C A = I - H^ell.

    Computed from the spectrum of C^{1/2} A C^{1/2}: the ratio of the largest
    to the smallest eigenvalue above a 1e-12 relative null-space threshold.
    Requires C SPD and the induced matrix SPSD.
    """
    s = p.splitting
    a = s.dense_operator(cap)
    _check_spsd(a, "induced operator")
    c, _ = materialize_dense(p, cap)
    c_eigs = dense_sym_eig(c).values
    if c_eigs.min() <= 0.0:
        raise ValueError("preconditioner matrix is not SPD")
    root = sqrt_sym_pd(c)
    spec = dense_sym_eig(root @ a @ root).values
    cutoff = 1e-12 * spec.max(initial=0.0)
    positive = spec[spec > cutoff]
    if positive.size == 0:
        raise ValueError("all preconditioned eigenvalues fall below the null-space threshold")
    return float(positive.max() / positive.min())


def kappa_from_spectrum(summary: SpectralSummary, ell: int) -> float:
    """Condition-number estimate evaluated from iteration-matrix spectrum facts.

    Odd step count: (1 - lambda_max[H]) / (1 - lambda_min[H]); even step
    count: (1 - delta^ell) / (1 - nu^ell). Reported alongside the operational
    value from :func:`kappa_ell`; the operational one drives the bounds.
    """
    if ell % 2 == 1:
        if summary.lambda_max_h is None or summary.lambda_min_h is None:
            return 1.0
        return (1.0 - summary.lambda_max_h) / (1.0 - summary.lambda_min_h)
    if summary.nu == 0.0:
        return 1.0
    return (1.0 - summary.delta**ell) / (1.0 - summary.nu**ell)


@dataclass(frozen=True)
class BoundCurve:
    """Per-iteration residual bound, nonincreasing with bound(0) = 1."""

    kind: str  # "mr-nu", "mr-kappa", "cg-kappa", or the combined "mr-min"
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if v.size == 0 or abs(v[0] - 1.0) > 1e-12:
            raise ValueError("bound curve must start at 1")
        if np.any(np.diff(v) > 1e-15):
            raise ValueError("bound curve must be nonincreasing")


def _kappa_factor(kappa: float, ks: np.ndarray) -> np.ndarray:
    q = (math.sqrt(kappa) - 1.0) / (math.sqrt(kappa) + 1.0)
    # 2 q^k exceeds 1 for small k when kappa > 9; clip so the curve is a
    # valid nonincreasing bound starting at 1.
    return np.minimum(1.0, 2.0 * q**ks)


def mr_bound_curve(p: InnerPreconditioner, k_max: int, cap: int = DENSE_CAP) -> BoundCurve:
    """min( nu^{k ell}, 2 ((sqrt(kappa)-1)/(sqrt(kappa)+1))^k ) for k = 0..k_max.

    Valid for an SPSD induced matrix with semiconvergent H; refuses otherwise.
    """
    summary = spectral_summary(p, cap)
    if not summary.semiconvergent:
        raise ValueError(
            "residual bound requires a semiconvergent inner iteration "
            f"(nu = {summary.nu:.6g}, unit eigenvalues simple: {summary.unit_eigs_simple})"
        )
    kappa = kappa_ell(p, cap)
    ks = np.arange(k_max + 1)
    nu_part = summary.nu ** (ks * p.ell)
    values = np.minimum(nu_part, _kappa_factor(kappa, ks))
    return BoundCurve("mr-min", values)


def cg_bound_curve(p: InnerPreconditioner, k_max: int, cap: int = DENSE_CAP) -> BoundCurve:
    """Energy-norm error bound 2 ((sqrt(kappa)-1)/(sqrt(kappa)+1))^k, clipped at 1."""
    kappa = kappa_ell(p, cap)
    ks = np.arange(k_max + 1)
    return BoundCurve("cg-kappa", _kappa_factor(kappa, ks))


def solution_form_oracle(a, c, b, x0) -> np.ndarray:
    """Closed-form solution the preconditioned methods converge to.

    With P^{-1} = C (so P^{-1/2} = C^{1/2}), the hat system is
    A_hat = C^{1/2} A C^{1/2}, b_hat = C^{1/2} b, x0_hat = C^{-1/2} x0, and
    the limit point is C^{1/2} A_hat^+ b_hat + C^{1/2} (I - A_hat A_hat^+) x0_hat.
    Requires C SPD, A symmetric, and b in the range of A.
    """
    a = check_dense_operand(a)
    b = np.asarray(b, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    root = sqrt_sym_pd(c)
    a_hat = root @ a @ root
    a_hat = (a_hat + a_hat.T) / 2.0
    a_hat_pinv = pinv_sym(a_hat)
    b_hat = root @ b
    proj_residual = b_hat - a_hat @ (a_hat_pinv @ b_hat)
    if np.linalg.norm(proj_residual) > 1e-10 * max(1.0, np.linalg.norm(b_hat)):
        raise ValueError("right-hand side is not in the range of the operator")
    x0_hat = np.linalg.solve(root, x0)
    null_part = x0_hat - a_hat @ (a_hat_pinv @ x0_hat)
    return root @ (a_hat_pinv @ b_hat) + root @ null_part
