"""Command-line entry point.

Subcommands:

  gen        write a seeded dataset matrix to a text file
  solve      run one solver on one generated (or file-supplied) instance
  bench      execute an experiment matrix described by a JSON spec
  classify   grade a point's stationarity and emit a JSON report
  enumerate  emit the closed-form stationary-point tables as JSON

Exit codes: 0 success, 2 bad arguments (argparse), 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .bench import (
    APPLICATIONS,
    DatasetSpec,
    ExperimentSpec,
    SOLVERS,
    build_application,
    gen_matrix,
    gen_signal_and_obs,
    run_experiment,
    run_solver,
    write_report,
)
from .linalg import read_matrix, write_matrix
from .optimality import (
    classify,
    enumerate_problem59,
    enumerate_problem61,
    enumerate_problem62,
    problem59,
)
from .problem import build_approx_binary, build_approx_sparse, build_eig_lp, build_glr, build_pca
from .solvers import NumericalError, SolverConfig, default_x0

__all__ = ["main"]


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return [float(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON-serializable: {type(obj).__name__}")


def _dump(doc, path=None) -> None:
    text = json.dumps(doc, indent=2, default=_json_default) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _read_vector(path) -> np.ndarray:
    M = read_matrix(path)
    if hasattr(M, "toarray"):
        M = M.toarray()
    return np.asarray(M, dtype=float).ravel()


def _add_dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", choices=["randn", "sparse_synth"], default="randn")
    p.add_argument("--m", type=int, default=128)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--contaminate", action="store_true")
    p.add_argument("--seed", type=int, default=0)


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--theta", type=float, default=1e-6)
    p.add_argument("--rule", choices=["random", "cyclic", "greedy"], default="cyclic")
    p.add_argument("--eps", type=float, default=1e-10)
    p.add_argument("--window", type=int, default=500)
    p.add_argument("--budget-s", type=float, default=10.0, dest="budget_s")
    p.add_argument("--max-epochs", type=int, default=1000)
    p.add_argument("--record-every", type=int, default=None)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dcmin",
                                     description="DC minimization toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a dataset matrix")
    _add_dataset_args(p)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("solve", help="run one solver on one instance")
    p.add_argument("--app", choices=list(APPLICATIONS), required=True)
    p.add_argument("--solver", choices=list(SOLVERS), required=True)
    _add_dataset_args(p)
    _add_config_args(p)
    p.add_argument("--G", help="matrix file (overrides --kind/--m/--n)")
    p.add_argument("--y", help="observation vector file (with --G)")
    p.add_argument("-o", "--output", help="trace CSV path")

    p = sub.add_parser("bench", help="run an experiment matrix")
    p.add_argument("--spec", required=True, help="ExperimentSpec JSON file")
    p.add_argument("-o", "--output", required=True, help="report directory")

    p = sub.add_parser("classify", help="grade a point's stationarity")
    p.add_argument("--app", choices=list(APPLICATIONS) + ["problem59"], required=True)
    p.add_argument("--point", required=True, help="vector file (n x 1 matrix)")
    p.add_argument("--theta", type=float, default=1e-6)
    p.add_argument("--G", help="matrix file")
    p.add_argument("--y", help="observation vector file")
    p.add_argument("--C", help="symmetric matrix file (pca)")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--s", type=int, default=None)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--p", default="1", help="norm for eig_l1-style problems: 1|2|inf")
    p.add_argument("-o", "--output")

    p = sub.add_parser("enumerate", help="emit a stationary-point table")
    p.add_argument("--problem", choices=["59", "61", "62"], required=True)
    p.add_argument("--theta", type=float, default=1e-6)
    p.add_argument("-o", "--output")

    return parser


def _cmd_gen(args) -> int:
    spec = DatasetSpec(kind=args.kind, m=args.m, n=args.n,
                       contaminated=args.contaminate, seed=args.seed)
    write_matrix(args.output, gen_matrix(spec))
    return 0


def _config_from_args(args) -> SolverConfig:
    return SolverConfig(theta=args.theta, rule=args.rule, seed=args.seed,
                        eps=args.eps, window=args.window,
                        time_budget_s=args.budget_s, max_epochs=args.max_epochs,
                        record_every=args.record_every)


def _cmd_solve(args) -> int:
    if args.G:
        G = read_matrix(args.G)
        y = _read_vector(args.y) if args.y else None
    else:
        spec = DatasetSpec(kind=args.kind, m=args.m, n=args.n,
                           contaminated=args.contaminate, seed=args.seed)
        G = gen_matrix(spec)
        _, y = gen_signal_and_obs(args.app, G, args.seed)
    problem = build_application(args.app, G, y)
    config = _config_from_args(args)
    trace = run_solver(problem, args.solver, config, default_x0(problem, args.seed))
    if args.output:
        trace.write_csv(args.output)
    _dump({
        "application": args.app,
        "solver": args.solver,
        "seed": args.seed,
        "final_F": trace.final_F,
        "iterations": trace.iterations,
        "stop_reason": trace.stop_reason,
    })
    return 0


def _cmd_bench(args) -> int:
    with open(args.spec) as fh:
        spec = ExperimentSpec.from_json(json.load(fh))
    rows = run_experiment(spec)
    write_report(rows, args.output)
    return 0


def _classify_problem(args):
    if args.app == "problem59":
        return problem59()
    if args.app == "pca":
        if not args.C:
            raise SystemExit("classify --app pca requires --C")
        C = read_matrix(args.C)
        if hasattr(C, "toarray"):
            C = C.toarray()
        return build_pca(C, alpha=args.alpha)
    if not args.G:
        raise SystemExit(f"classify --app {args.app} requires --G")
    G = read_matrix(args.G)
    if args.app == "eig_l1":
        p = math.inf if args.p == "inf" else int(args.p)
        return build_eig_lp(G, alpha=args.alpha, p=p)
    y = _read_vector(args.y) if args.y else None
    if y is None:
        raise SystemExit(f"classify --app {args.app} requires --y")
    if args.app == "sparse":
        n = G.n if hasattr(G, "n") else np.asarray(G).shape[1]
        s = args.s if args.s is not None else min(200, n // 2)
        return build_approx_sparse(G, y, rho=args.rho, s=s)
    if args.app == "binary":
        return build_approx_binary(G, y, rho=args.rho)
    return build_glr(G, y)


def _cmd_classify(args) -> int:
    problem = _classify_problem(args)
    x = _read_vector(args.point)
    report = classify(problem, x, theta=args.theta)
    _dump({
        "point": report.point,
        "F_value": report.F_value,
        "cws_residual": report.cws_residual,
        "sca_residual": report.sca_residual,
        "worst_index": report.worst_index,
        "is_cws": report.is_cws(),
    }, args.output)
    return 0


def _cmd_enumerate(args) -> int:
    table = {"59": enumerate_problem59, "61": enumerate_problem61,
             "62": enumerate_problem62}[args.problem]
    rows = table(theta=args.theta)
    _dump([{
        "y_pattern": r.y_pattern,
        "x": None if r.x is None else r.x,
        "F": r.F,
        "critical": r.critical,
        "cws": r.cws,
    } for r in rows], args.output)
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "bench": _cmd_bench,
    "classify": _cmd_classify,
    "enumerate": _cmd_enumerate,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
