"""``offload-opt`` command line entry point.

Exit codes: 0 success, 1 invalid input, 2 infeasible, 3 unsupported structure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io as oio
from .errors import (GraphValidationError, InfeasibleError, LimitExceededError, OffloadError,
                     StalledScheduleError, UnsupportedStructureError)
from .graph import validate_graph
from .physical import ConcurrencyProfile

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_UNSUPPORTED = 0, 1, 2, 3


def _conc(text):
    if text == "auto":
        return "auto"
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected 1..4 or auto") from None
    if not 1 <= n <= 4:
        raise argparse.ArgumentTypeError("expected 1..4 or auto")
    return ConcurrencyProfile.uniform(n)


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _common(p, plan=False):
    p.add_argument("--graph", required=True)
    p.add_argument("--profile", default=None, help="defaults to the bundled paper.json")
    if plan:
        p.add_argument("--plan", required=True)
    p.add_argument("--out", default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="offload-opt", description="Joint offloading and power optimization.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("validate", help="check a call-graph file")
    p.add_argument("graph")

    solve = sub.add_parser("solve").add_subparsers(dest="mode", required=True)
    p = solve.add_parser("serial")
    _common(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--separate", action="store_true", help="separate-design baseline")
    p = solve.add_parser("parallel")
    _common(p)
    p.add_argument("--lmax", type=float, required=True)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--conc", type=_conc, default=ConcurrencyProfile.uniform(1))
    p.add_argument("--eps-d", type=float, default=0.1)
    p.add_argument("--separate", action="store_true")

    p = sub.add_parser("evaluate")
    _common(p, plan=True)
    p.add_argument("--mode", choices=("serial", "recursion", "simulate"), required=True)
    p.add_argument("--conc", type=_conc, default=ConcurrencyProfile.uniform(1))
    p.add_argument("--eps-d", type=float, default=0.1)

    sweep = sub.add_parser("sweep").add_subparsers(dest="mode", required=True)
    p = sweep.add_parser("serial")
    _common(p)
    p.add_argument("--lambdas", required=True, help="a:b:logN, a:b:N or a,b,c")
    p = sweep.add_parser("parallel")
    _common(p)
    p.add_argument("--lmax", required=True, help="a:b:N, a:b:logN or a,b,c")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--conc", type=_conc, default=ConcurrencyProfile.uniform(1))
    p.add_argument("--eps-d", type=float, default=0.1)

    orc = sub.add_parser("oracle").add_subparsers(dest="mode", required=True)
    p = orc.add_parser("serial")
    _common(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--limit", type=int, default=20)
    p = orc.add_parser("parallel")
    _common(p)
    p.add_argument("--lmax", type=float, required=True)
    p.add_argument("--conc", type=_conc, default=ConcurrencyProfile.uniform(1))
    p.add_argument("--grid-points", type=int, default=200)
    p.add_argument("--limit", type=int, default=10)

    p = sub.add_parser("timeline")
    _common(p, plan=True)
    p.add_argument("--eps-d", type=float, default=0.1)
    p.add_argument("--summary", default=None, help="also write the run summary JSON here")
    return ap


def _load(args):
    g = oio.load_graph(args.graph)
    prof = oio.load_profile(args.profile or oio.default_profile_path())
    errs = validate_graph(g)
    if errs:
        raise GraphValidationError(errs)
    return g, prof


def _plan_doc(plan, **summary):
    return {**summary, "plan": oio.plan_to_dict(plan)}


def _cmd_validate(args):
    g = oio.load_graph(args.graph)
    errs = validate_graph(g)
    if errs:
        for v in errs:
            print(f"invalid: {v}", file=sys.stderr)
        return EXIT_INVALID
    print("ok")
    return EXIT_OK


def _cmd_solve(args):
    from .parallel import QuantGrid, separate_design_parallel, solve_parallel, solve_parallel_auto
    from .serial import evaluate_serial, separate_design_serial, solve_serial_general
    from .simulator import run

    g, prof = _load(args)
    if args.mode == "serial":
        if args.separate:
            res = separate_design_serial(g, prof, args.lam)
            doc = _plan_doc(res.plan, **oio.summary(res.energy, res.latency, res.flags))
        else:
            plan, obj = solve_serial_general(g, prof, args.lam)
            el = evaluate_serial(g, prof, plan)
            doc = _plan_doc(plan, **oio.summary(el.energy, el.latency, el.flags, objective=obj))
        _emit(oio.dumps_json(doc), args.out)
        return EXIT_OK

    grid = QuantGrid(args.eps, args.lmax)
    if args.separate:
        conc = ConcurrencyProfile.uniform(1) if args.conc == "auto" else args.conc
        res = separate_design_parallel(g, prof, conc, grid)
        plan, energy, latency = res.plan, res.energy, res.latency
    elif args.conc == "auto":
        auto = solve_parallel_auto(g, prof, grid, args.eps_d)
        plan, energy, conc = auto.plan, auto.energy, auto.conc
    else:
        conc = args.conc
        plan, energy = solve_parallel(g, prof, conc, grid)
    from .parallel import latency_recursion

    latency = latency_recursion(g, prof, conc, plan)
    sim = run(g, prof, plan, args.eps_d)
    doc = _plan_doc(plan, **oio.summary(energy, latency), conc=conc.n_ul,
                    sim={"energy_J": sim.energy, "latency_s": sim.latency, "steps": sim.steps, "eps_d": args.eps_d})
    _emit(oio.dumps_json(doc), args.out)
    return EXIT_OK


def _cmd_evaluate(args):
    from .parallel import evaluate_parallel
    from .serial import evaluate_serial
    from .simulator import run

    g, prof = _load(args)
    plan = oio.load_plan(args.plan)
    if args.mode == "serial":
        el = evaluate_serial(g, prof, plan)
        doc = oio.summary(el.energy, el.latency, el.flags)
    elif args.mode == "recursion":
        conc = ConcurrencyProfile.uniform(1) if args.conc == "auto" else args.conc
        el = evaluate_parallel(g, prof, conc, plan)
        doc = oio.summary(el.energy, el.latency, el.flags)
    else:
        sim = run(g, prof, plan, args.eps_d)
        doc = {"energy_J": sim.energy, "latency_s": sim.latency, "steps": sim.steps, "eps_d": args.eps_d}
    _emit(oio.dumps_json(doc), args.out)
    return EXIT_OK


def _cmd_sweep(args):
    from .parallel import SWEEP_COLUMNS, sweep_deadline
    from .serial import sweep_lambda

    g, prof = _load(args)
    if args.mode == "serial":
        pts = sweep_lambda(g, prof, oio.parse_range(args.lambdas))
        _emit(oio.serial_sweep_csv(g, pts), args.out)
    else:
        rows = sweep_deadline(g, prof, args.conc, oio.parse_range(args.lmax), args.eps, args.eps_d)
        _emit(oio.rows_to_csv(SWEEP_COLUMNS, rows), args.out)
    return EXIT_OK


def _cmd_oracle(args):
    from .oracle import brute_force_parallel, brute_force_serial

    g, prof = _load(args)
    if args.mode == "serial":
        res = brute_force_serial(g, prof, args.lam, args.limit)
    else:
        conc = ConcurrencyProfile.uniform(1) if args.conc == "auto" else args.conc
        res = brute_force_parallel(g, prof, conc, args.lmax, args.grid_points, args.limit)
    doc = _plan_doc(res.plan, objective=res.objective, enumerated_count=res.enumerated_count)
    _emit(oio.dumps_json(doc), args.out)
    return EXIT_OK


def _cmd_timeline(args):
    from .simulator import export_timeline, run

    g, prof = _load(args)
    plan = oio.load_plan(args.plan)
    sim = run(g, prof, plan, args.eps_d)
    _emit(export_timeline(sim.timeline), args.out)
    if args.summary:
        oio.dump_json({"energy_J": sim.energy, "latency_s": sim.latency, "steps": sim.steps,
                       "eps_d": args.eps_d}, args.summary)
    return EXIT_OK


COMMANDS = {"validate": _cmd_validate, "solve": _cmd_solve, "evaluate": _cmd_evaluate,
            "sweep": _cmd_sweep, "oracle": _cmd_oracle, "timeline": _cmd_timeline}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.cmd](args)
    except (InfeasibleError, StalledScheduleError) as e:
        print(f"{e.code}: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (UnsupportedStructureError, LimitExceededError) as e:
        print(f"{e.code}: {e}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except OffloadError as e:
        print(f"{e.code}: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
