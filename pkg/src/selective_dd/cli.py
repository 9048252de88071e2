"""Command-line front end.

Exit codes: 0 success, 2 input or domain error, 3 numerical guard
(branch ambiguity of the logarithm, unusable scaling fit).
"""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__, io, linalg
from .errors import BranchAmbiguityError, DecouplingError, ScalingFitError, UnsupportedOrderError
from .evaluator import evaluate, scaling_study
from .magnus import closed_form_vs_oracle
from .sequences import BRANCHES, PulseSequence, family_n4, family_n4_feasible, uhrig
from .solver import (
    FAMILY_CSV_HEADER,
    newton_search,
    residuals,
    residuals_dict,
    search_full_third_order,
    solve_n2,
    sweep_family_n4,
)
from .system import pulse_operator

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class UsageError(DecouplingError, ValueError):
    pass


def _emit(args, payload: dict) -> None:
    text = io.dumps(payload)
    if args.out:
        io.write_output(args.out, text, io.manifest(args.command, _params(args), args.seed))
    else:
        sys.stdout.write(text)


def _write_csv(args, path, header, rows) -> None:
    io.write_output(path, io.csv_text(header, rows), io.manifest(args.command, _params(args), args.seed))


def _params(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def cmd_uhrig(args):
    _emit(args, uhrig(args.n).to_json())


def cmd_design(args):
    if args.n == 2:
        if args.delta1 is not None:
            raise UsageError("--delta1 only applies to n = 4")
        seq, branch = solve_n2(), None
        others = []
    elif args.n == 4:
        if args.delta1 is None:
            raise UsageError("n = 4 needs --delta1")
        if args.branch == "auto":
            found = family_n4_feasible(args.delta1)
            if not found:
                family_n4(args.delta1, "lower")  # re-raise the branch error
            branch = next(iter(found))
            seq = found[branch]
            others = [
                {"branch": b, **s.to_json(), "residuals": residuals_dict(residuals(s))}
                for b, s in found.items() if b != branch
            ]
        else:
            branch = args.branch
            seq = family_n4(args.delta1, branch)
            others = []
    else:
        raise UsageError(f"design supports n = 2 or n = 4, got {args.n}")
    payload = {**seq.to_json(), "branch": branch, "residuals": residuals_dict(residuals(seq))}
    if others:
        payload["other_feasible_branches"] = others
    _emit(args, payload)


def _load_inputs(args):
    config = io.load_system(args.system, tol=args.tol)
    seq = io.load_sequence(args.sequence)
    return config, seq, pulse_operator(config.system)


def cmd_evaluate(args):
    config, seq, plan = _load_inputs(args)
    rep = evaluate(config.hamiltonian, plan, seq, args.tf)
    _emit(args, {**rep.summary(), "sequence": seq.to_json(), "U": rep.U, "H_eff": rep.H_eff})


def cmd_scan(args):
    config, seq, plan = _load_inputs(args)
    fit = scaling_study(config.hamiltonian, plan, seq, args.tf_min, args.tf_max, args.points)
    if args.csv:
        _write_csv(args, args.csv, io.SCAN_CSV_HEADER, fit.grid)
    _emit(args, fit.summary())


def cmd_solve(args):
    if args.n == 2:
        seq = solve_n2()
        _emit(args, {**seq.to_json(), "residuals": residuals_dict(residuals(seq))})
        return
    if args.n != 4:
        raise UsageError(f"solve supports n = 2 or n = 4, got {args.n}")
    sweep = sweep_family_n4(args.sweep)
    rows = [r.csv_row() for r in sweep.rows]
    if args.csv:
        _write_csv(args, args.csv, FAMILY_CSV_HEADER, rows)
    trend = sweep.min_delta_trend()
    _emit(args, {
        "points": sweep.points,
        "rows": len(sweep.rows),
        "infeasible_branches": sweep.infeasible,
        "max_residual": max(r.residuals.max_order_defect() for r in sweep.rows),
        "min_delta_first_row": trend[0][1],
        "min_delta_last_row": trend[-1][1],
    })


def cmd_search_exact(args):
    found = search_full_third_order(4, args.grid, args.refine_tol)
    newton = newton_search(args.newton_starts, seed=args.seed)
    if args.csv:
        _write_csv(args, args.csv, ["delta1", "branch", "feasible", "C1", "C2"],
                   [(x, b, str(ok).lower(), c1, c2) for x, b, ok, c1, c2 in found.scan])
    _emit(args, {**found.summary(), "newton": newton.summary()})


def cmd_magnus_check(args):
    if args.order not in (1, 2, 3):
        raise UnsupportedOrderError(f"Magnus order {args.order} is not supported (1, 2 or 3)")
    if args.sequence:
        seq = io.load_sequence(args.sequence)
    elif args.order == 3:
        seq = uhrig(4)
    else:
        seq = PulseSequence(2, (0.3, 0.5, 0.2))
    rep = closed_form_vs_oracle(seq, T_f=args.tf, trials=args.trials, seed=args.seed)
    if args.order not in rep.oracle_deviation:
        raise UnsupportedOrderError(f"no closed form at order {args.order} for n = {seq.n}")
    _emit(args, {
        "order": args.order,
        "sequence": seq.to_json(),
        "max_relative_deviation": rep.oracle_deviation[args.order],
        **rep.summary(),
    })


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="selective-dd", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--out", help="write the JSON result here instead of stdout")
    p.add_argument("--tol", type=float, default=linalg.HERMITIAN_TOL, help="Hermiticity tolerance for inputs")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("uhrig", help="Uhrig pulse fractions")
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(func=cmd_uhrig)

    s = sub.add_parser("design", help="sequence satisfying the order conditions")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--delta1", type=float)
    s.add_argument("--branch", choices=(*BRANCHES, "auto"), default="auto")
    s.set_defaults(func=cmd_design)

    for name, func, helptext in (("evaluate", cmd_evaluate, "exact propagator and residuals at one tf"),
                                 ("scan", cmd_scan, "residual scaling over a tf grid")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--system", help="system config JSON (default: bundled qutrit)")
        s.add_argument("--sequence", required=True, help="sequence JSON")
        if name == "evaluate":
            s.add_argument("--tf", type=float, required=True)
        else:
            s.add_argument("--tf-min", type=float, required=True)
            s.add_argument("--tf-max", type=float, required=True)
            s.add_argument("--points", type=int, default=9)
            s.add_argument("--csv", help="write the tf grid here")
        s.set_defaults(func=func)

    s = sub.add_parser("solve", help="solve n=2 or sweep the n=4 family")
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--sweep", type=int, default=99, help="delta1 points for n=4")
    s.add_argument("--csv", help="write the sweep table here")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("search-exact", help="search for full third-order n=4 solutions")
    s.add_argument("--grid", type=int, default=1000)
    s.add_argument("--refine-tol", type=float, default=1e-10)
    s.add_argument("--newton-starts", type=int, default=200)
    s.add_argument("--csv", help="write the C1/C2 scan here")
    s.set_defaults(func=cmd_search_exact)

    s = sub.add_parser("magnus-check", help="closed forms vs ordered-sum Magnus terms")
    s.add_argument("--order", type=int, required=True)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--tf", type=float, default=1.0)
    s.add_argument("--sequence", help="sequence JSON (default depends on order)")
    s.set_defaults(func=cmd_magnus_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (BranchAmbiguityError, ScalingFitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
