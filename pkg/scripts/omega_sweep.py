"""Sweep the SSOR relaxation parameter on a generated singular SPSD problem
and record outer-iteration counts for CG with inner-iteration preconditioning.

Writes a CSV (omega, steps, iterations, converged) to stdout or --output.
Omegas outside the admissible interval show up as breakdowns or stalls.
"""

import argparse
import sys

import numpy as np

from innerprec.krylov import SolverConfig, operator_from_sparse, pcg
from innerprec.problems import random_spsd
from innerprec.sparse import SparseMatrix
from innerprec.splittings import InnerPreconditioner, Splitting, SplittingKind


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--size", type=int, default=60)
    parser.add_argument("--rank", type=int, default=45)
    parser.add_argument("--steps", type=int, nargs="+", default=[1, 2, 3])
    parser.add_argument("--omegas", type=float, nargs="+",
                        default=[round(w, 2) for w in np.arange(0.1, 2.0, 0.1)])
    parser.add_argument("--tol", type=float, default=1e-10)
    parser.add_argument("--output", default=None)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    a = random_spsd(rng, args.size, args.rank)
    sp = SparseMatrix.from_dense(a)
    op = operator_from_sparse(sp)
    b = a @ rng.standard_normal(args.size)

    rows = ["omega,steps,iterations,converged"]
    for ell in args.steps:
        for omega in args.omegas:
            precond = InnerPreconditioner(Splitting(SplittingKind.SSOR, sp, omega), ell)
            res = pcg(op, precond, b, cfg=SolverConfig(tol=args.tol, max_outer=5 * args.size))
            rows.append(f"{omega},{ell},{res.iterations},{int(res.converged)}")

    text = "\n".join(rows) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
