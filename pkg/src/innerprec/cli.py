"""Command-line front end: solve, analyze, bound, and bench subcommands.

Exit codes: 0 converged / success, 1 usage or I/O error, 2 iteration limit,
3 breakdown, 4 analysis precondition failure (size cap, bound hypothesis),
5 bound violation. All artifacts are written atomically.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import tempfile
import time

import numpy as np

from . import analysis
from .dense import DENSE_CAP, DenseCapExceeded, sqrt_sym_pd
from .krylov import SolverConfig, Termination, operator_from_sparse, pcg, pminres
from .lsq import LsqProblem, cgls, cgne, lsmr, mrne
from .mmio import mm_read, read_rhs
from .problems import random_rank_deficient
from .sparse import SparseMatrix, spmv
from .splittings import InnerPreconditioner, Side, Splitting, SplittingKind, materialize_dense

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MAX_ITERATIONS = 2
EXIT_BREAKDOWN = 3
EXIT_HYPOTHESIS = 4
EXIT_BOUND_VIOLATION = 5

_DIRECT_METHODS = {"cg", "minres"}
_NE_LEFT_METHODS = {"cgls", "lsqr", "lsmr"}
_NE_RIGHT_METHODS = {"cgne", "mrne"}
_DIRECT_KINDS = {SplittingKind.RICHARDSON, SplittingKind.JOR, SplittingKind.SSOR}
_NE_KINDS = {SplittingKind.RICHARDSON_NE, SplittingKind.CIMMINO_NE, SplittingKind.NE_SSOR}


class UsageError(ValueError):
    pass


def _write_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        _write_atomic(path, text)


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _build_preconditioner(method: str, kind: SplittingKind, a: SparseMatrix, omega: float, ell: int) -> InnerPreconditioner:
    if method in _DIRECT_METHODS:
        if kind not in _DIRECT_KINDS:
            raise UsageError(f"method {method} needs a direct splitting, got {kind.value}")
        side = Side.DIRECT
    elif method in _NE_LEFT_METHODS:
        if kind not in _NE_KINDS:
            raise UsageError(f"method {method} needs a normal-equations splitting, got {kind.value}")
        side = Side.NORMAL_LEFT
    elif method in _NE_RIGHT_METHODS:
        if kind not in _NE_KINDS:
            raise UsageError(f"method {method} needs a normal-equations splitting, got {kind.value}")
        side = Side.NORMAL_RIGHT
    else:
        raise UsageError(f"unknown method {method!r}")
    return InnerPreconditioner(Splitting(kind, a, omega, side), ell)


def _result_payload(method: str, term: Termination, iterations: int, fields: dict) -> dict:
    payload = {"method": method, "termination": term.value, "iterations": iterations}
    payload.update(fields)
    return payload


def _serialize_result(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(payload, indent=2) + "\n"
    buf = io.StringIO()
    keys = list(payload)
    buf.write(",".join(keys) + "\n")
    buf.write(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in (payload[k] for k in keys)) + "\n")
    return buf.getvalue()


def _exit_for(term: Termination) -> int:
    if term == Termination.CONVERGED:
        return EXIT_OK
    if term == Termination.MAX_ITERATIONS:
        return EXIT_MAX_ITERATIONS
    return EXIT_BREAKDOWN


def run_solve(args) -> int:
    a = mm_read(args.matrix)
    b = read_rhs(args.rhs)
    method = args.method
    if method == "lsqr":
        print("note: lsqr is an alias; routing to cgls (mathematically equivalent here)", file=sys.stderr)
        method = "cgls"
    kind = SplittingKind(args.inner)
    cfg = SolverConfig(
        tol=args.tol,
        max_outer=args.max_outer,
        record_history=True,
    )
    precond = _build_preconditioner(method, kind, a, args.omega, args.inner_steps)

    if method in _DIRECT_METHODS:
        if b.shape != (a.nrows,):
            raise UsageError(
                f"dimension mismatch: matrix is {a.nrows}x{a.ncols}, rhs has length {b.size}"
            )
        op = operator_from_sparse(a)
        solver = pcg if method == "cg" else pminres
        result = solver(op, precond, b, cfg=cfg)
        residual = b - spmv(a, result.x)
        payload = _result_payload(
            method,
            result.termination,
            result.iterations,
            {
                "residual_norm": float(np.linalg.norm(residual)),
                "relative_residual": float(np.linalg.norm(residual) / max(np.linalg.norm(b), 1e-300)),
            },
        )
        history = result.history
        term = result.termination
        x = result.x
    else:
        prob = LsqProblem(a, b)
        solver = {"cgls": cgls, "lsmr": lsmr, "cgne": cgne, "mrne": mrne}[method]
        result = solver(prob, precond, cfg=cfg)
        payload = _result_payload(
            method,
            result.inner.termination,
            result.inner.iterations,
            {
                "ls_residual_norm": result.ls_residual_norm,
                "normal_residual_norm": result.normal_residual_norm,
            },
        )
        history = result.inner.history
        term = result.inner.termination
        x = result.x

    if args.emit_x:
        payload["x"] = [float(v) for v in x]
    _emit(args.output, _serialize_result(payload, args.format))
    if args.history:
        buf = io.StringIO()
        history.to_csv(buf)
        _write_atomic(args.history, buf.getvalue())
    return _exit_for(term)


def run_analyze(args) -> int:
    a = mm_read(args.matrix)
    kind = SplittingKind(args.inner)
    side = Side.DIRECT
    if kind in _NE_KINDS:
        side = Side.NORMAL_LEFT if args.side == "normal-left" else Side.NORMAL_RIGHT
    precond = InnerPreconditioner(Splitting(kind, a, args.omega, side), args.inner_steps)

    rep_m, rep_mn, rep_c = analysis.check_definiteness(precond, cap=DENSE_CAP)
    summary = analysis.spectral_summary(precond, cap=DENSE_CAP)
    a_dense = precond.splitting.dense_operator(cap=DENSE_CAP)
    report: dict = {
        "matrix": args.matrix,
        "inner": kind.value,
        "side": side.value,
        "omega": args.omega,
        "inner_steps": args.inner_steps,
        "definiteness": {
            "m": rep_m.to_dict(),
            "m_plus_n": rep_mn.to_dict(),
            "c_ell": rep_c.to_dict(),
        },
        "spectral": summary.to_dict(),
    }
    if kind in (SplittingKind.SSOR, SplittingKind.NE_SSOR):
        try:
            odd, even = analysis.ssor_omega_intervals(a_dense)
            report["omega_intervals"] = {"odd": odd.to_dict(), "even": even.to_dict()}
        except ValueError as exc:
            report["omega_intervals"] = {"error": str(exc)}
    else:
        b_mat = np.eye(precond.splitting.dimension)
        label = "shift of identity"
        if kind in (SplittingKind.JOR, SplittingKind.CIMMINO_NE):
            b_mat = np.diag(precond.splitting.diag)
            label = "shift of diagonal"
        try:
            even = analysis.omega_interval_shifted(a_dense, b_mat)
            report["omega_intervals"] = {"even": even.to_dict(), "basis": label}
        except ValueError as exc:
            report["omega_intervals"] = {"error": str(exc)}
    try:
        report["kappa"] = {
            "operational": analysis.kappa_ell(precond, cap=DENSE_CAP),
            "spectrum_estimate": analysis.kappa_from_spectrum(summary, precond.ell),
        }
    except ValueError as exc:
        report["kappa"] = {"error": str(exc)}
    _emit(args.output, json.dumps(report, indent=2) + "\n")
    return EXIT_OK


def run_bound(args) -> int:
    a = mm_read(args.matrix)
    b = read_rhs(args.rhs)
    kind = SplittingKind(args.inner)
    if kind not in _DIRECT_KINDS:
        raise UsageError("bound operates on the direct system; pick a direct splitting")
    if b.shape != (a.nrows,):
        raise UsageError("dimension mismatch between matrix and rhs")
    precond = InnerPreconditioner(Splitting(kind, a, args.omega, Side.DIRECT), args.inner_steps)

    summary = analysis.spectral_summary(precond)
    a_dense = precond.splitting.dense_operator()
    eigs = np.linalg.eigvalsh(a_dense)
    tol = 1e-10 * max(abs(eigs[0]), abs(eigs[-1]), 1.0)
    if eigs.min() < -tol:
        print("bound hypothesis failed: operator is not positive semidefinite", file=sys.stderr)
        return EXIT_HYPOTHESIS
    if not summary.semiconvergent:
        print(
            "bound hypothesis failed: inner iteration matrix is not semiconvergent "
            f"(nu = {summary.nu:.6g})",
            file=sys.stderr,
        )
        return EXIT_HYPOTHESIS
    kappa = analysis.kappa_ell(precond)
    c_dense, _ = materialize_dense(precond)
    c_root = sqrt_sym_pd(c_dense)

    cfg = SolverConfig(tol=args.tol, max_outer=args.max_outer, record_iterates=True)
    result = pminres(operator_from_sparse(a), precond, b, cfg=cfg)
    iterates = result.history.iterates
    q = (np.sqrt(kappa) - 1.0) / (np.sqrt(kappa) + 1.0)
    r0 = c_root @ (b - a_dense @ iterates[0])
    denom = np.linalg.norm(r0)
    rows = ["k,measured,bound_nu,bound_kappa,bound_min"]
    violated = False
    for k, x in enumerate(iterates):
        measured = float(np.linalg.norm(c_root @ (b - a_dense @ x)) / denom)
        bound_nu = summary.nu ** (k * precond.ell)
        bound_kappa = 2.0 * q**k
        bound_min = min(bound_nu, bound_kappa)
        if measured > bound_min + 1e-8:
            violated = True
        rows.append(f"{k},{_fmt(measured)},{_fmt(bound_nu)},{_fmt(bound_kappa)},{_fmt(bound_min)}")
    _emit(args.output, "\n".join(rows) + "\n")
    if violated:
        print("residual bound violated; this indicates an implementation bug", file=sys.stderr)
        return EXIT_BOUND_VIOLATION
    return EXIT_OK


_BENCH_SHAPES = [
    # (m, n, full_rank) over/under-determined times full/deficient rank
    (40, 20, True),
    (40, 20, False),
    (20, 40, True),
    (20, 40, False),
]


def run_bench(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    omegas = [float(w) for w in args.omegas.split(",") if w.strip()]
    ells = [int(l) for l in args.ells.split(",") if l.strip()]
    if not methods or not omegas or not ells:
        raise UsageError("bench requires nonempty method, omega, and inner-step lists")
    for m in methods:
        if m not in (_NE_LEFT_METHODS | _NE_RIGHT_METHODS):
            raise UsageError(f"bench supports the least-squares/min-norm methods, got {m!r}")
    kind = SplittingKind(args.inner)
    if kind not in _NE_KINDS:
        raise UsageError("bench uses normal-equations splittings")

    rng = np.random.default_rng(args.seed)
    problems = []
    for pid, (m, n, full) in enumerate(_BENCH_SHAPES):
        rank = min(m, n) if full else max(1, int(0.6 * min(m, n)))
        a = random_rank_deficient(rng, m, n, rank)
        b = rng.standard_normal(m)
        problems.append((f"p{pid}-{m}x{n}-r{rank}", a, b))

    solver_map = {"cgls": cgls, "lsmr": lsmr, "cgne": cgne, "mrne": mrne, "lsqr": cgls}
    rows = ["problem,method,omega,ell,iterations,termination,ls_residual,normal_residual,wall_ms"]
    cell = 0
    for method in methods:
        for omega in omegas:
            for ell in ells:
                pid, a, b = problems[cell % len(problems)]
                cell += 1
                if method in _NE_RIGHT_METHODS:
                    # min-norm problems need a consistent rhs
                    b_used = spmv(a, np.ones(a.ncols))
                else:
                    b_used = b
                precond = _build_preconditioner(method, kind, a, omega, ell)
                prob = LsqProblem(a, b_used)
                cfg = SolverConfig(tol=args.tol, max_outer=args.max_outer)
                t0 = time.perf_counter()
                result = solver_map[method](prob, precond, cfg=cfg)
                wall_ms = (time.perf_counter() - t0) * 1e3
                wall_field = _fmt(wall_ms) if args.timing else ""
                rows.append(
                    f"{pid},{method},{_fmt(omega)},{ell},{result.inner.iterations},"
                    f"{result.inner.termination.value},{_fmt(result.ls_residual_norm)},"
                    f"{_fmt(result.normal_residual_norm)},{wall_field}"
                )
    _emit(args.output, "\n".join(rows) + "\n")
    return EXIT_OK


def _add_common_solver_args(p: argparse.ArgumentParser):
    p.add_argument("--inner", default="ssor", help="splitting kind (richardson, jor, ssor, richardson-ne, cimmino-ne, ne-ssor)")
    p.add_argument("--omega", type=float, default=1.0, help="relaxation parameter")
    p.add_argument("--inner-steps", type=int, default=1, help="stationary steps per preconditioner application")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-outer", type=int, default=None, help="default: 10 * dimension")
    p.add_argument("--output", "-o", default=None, help="artifact path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="innerprec",
        description="Krylov solvers with stationary inner-iteration preconditioning",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run a solver on a Matrix Market problem")
    p_solve.add_argument("--matrix", required=True)
    p_solve.add_argument("--rhs", required=True)
    p_solve.add_argument("--method", required=True, choices=sorted(_DIRECT_METHODS | _NE_LEFT_METHODS | _NE_RIGHT_METHODS))
    _add_common_solver_args(p_solve)
    p_solve.add_argument("--format", choices=("csv", "json"), default="json")
    p_solve.add_argument("--history", default=None, help="write per-iteration CSV here")
    p_solve.add_argument("--emit-x", action="store_true", help="include the solution vector in the artifact")
    p_solve.set_defaults(func=run_solve)

    p_an = sub.add_parser("analyze", help="definiteness, spectrum, and omega-interval report")
    p_an.add_argument("--matrix", required=True)
    p_an.add_argument("--side", choices=("normal-left", "normal-right"), default="normal-left")
    _add_common_solver_args(p_an)
    p_an.set_defaults(func=run_analyze)

    p_bd = sub.add_parser("bound", help="residual bound vs measured decay for MINRES")
    p_bd.add_argument("--matrix", required=True)
    p_bd.add_argument("--rhs", required=True)
    _add_common_solver_args(p_bd)
    p_bd.set_defaults(func=run_bound)

    p_bench = sub.add_parser("bench", help="deterministic parameter-grid benchmark")
    p_bench.add_argument("--seed", type=int, required=True)
    p_bench.add_argument("--methods", default="cgls,lsmr")
    p_bench.add_argument("--omegas", default="0.8,1.0,1.5")
    p_bench.add_argument("--ells", default="1,2,3")
    p_bench.add_argument("--inner", default="ne-ssor")
    p_bench.add_argument("--tol", type=float, default=1e-10)
    p_bench.add_argument("--max-outer", type=int, default=None)
    p_bench.add_argument("--timing", action="store_true", help="fill the wall_ms column (breaks byte determinism)")
    p_bench.add_argument("--output", "-o", default=None)
    p_bench.set_defaults(func=run_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except DenseCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
