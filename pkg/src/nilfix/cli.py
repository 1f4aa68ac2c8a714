"""Command-line front end: ``nilfix <command> SCENARIO.json [options]``.

Exit codes: 0 success, 1 a negative or uncertified result, 2 invalid input
(parse or validation failure, boundary not isolating, I/O failure).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Callable, Dict, Tuple

from . import __version__
from .action import (INCONCLUSIVE, ActionError, build_action, verify_main)
from .config import DEFAULT, Options
from .flow import flow_displacement_index
from .index import BoundaryZeroError, IndexComputationError, block_index
from .lie import center, is_nilpotent, lower_central_series
from .plot import phase_portrait
from .scenario import Scenario, ScenarioError, load
from .zeros import System, zero_search

REPORT_VERSION = 1

Report = Tuple[int, dict]


class InputError(Exception):
    """Invalid input discovered while running a command (exit 2)."""


def normalize(obj):
    """Plain JSON data with floats rounded to 12 significant digits and -0 folded to 0."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return repr(obj)
        r = float(f"{obj:.12g}")
        return 0.0 if r == 0 else r
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    return obj


def dumps(report: dict) -> str:
    return json.dumps(normalize(report), sort_keys=True, indent=2) + "\n"


def write_atomic(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _q(x):
    return [x.numerator, x.denominator]


def _envelope(command: str, body: dict) -> dict:
    return {"schema_version": REPORT_VERSION, "command": command, **body}


def _options(args) -> Options:
    opts = DEFAULT
    if getattr(args, "tol", None) is not None:
        if args.command == "verify-main":
            opts = opts.with_(witness_tol=args.tol)
        else:
            opts = opts.with_(modulus_floor=args.tol)
    return opts


def _need(args, name):
    value = getattr(args, name, None)
    if value is None:
        raise InputError(f"--{name.replace('_', '-')} is required")
    return value


# commands --------------------------------------------------------------------


def cmd_check_algebra(sc: Scenario, args) -> Report:
    alg = sc.algebra
    if alg is None:
        raise InputError("scenario has no algebra block")
    if sc.algebra_problems:
        return 1, _envelope("check-algebra", {"valid": False, "problems": sc.algebra_problems})
    series = lower_central_series(alg)
    return 0, _envelope("check-algebra", {
        "valid": True,
        "problems": [],
        "dim": alg.dim,
        "names": list(alg.basis_names),
        "nilpotent": is_nilpotent(alg),
        "lower_central_series": [s.dim for s in series],
        "center": [[_q(c) for c in v] for v in center(alg).basis],
    })


def _action(sc: Scenario):
    alg = sc.valid_algebra()
    if not sc.generators:
        raise InputError("scenario has no generators block")
    return build_action(alg, sc.surface, [sc.field(g) for g in sc.generators])


def cmd_check_action(sc: Scenario, args) -> Report:
    try:
        _action(sc)
    except ActionError as exc:
        body = {"valid": False, "error": str(exc)}
        pair = getattr(exc, "pair", None)
        if pair is not None:
            names = sc.algebra.basis_names
            body["pair"] = [names[pair[0]], names[pair[1]]]
            body["residual"] = {c: {"P": p.to_list(), "Q": q.to_list()}
                                for c, (p, q) in exc.residual.charts.items()}
        return 1, _envelope("check-action", body)
    return 0, _envelope("check-action", {
        "valid": True, "generators": list(sc.generators),
        "nilpotent": is_nilpotent(sc.algebra)})


def cmd_index(sc: Scenario, args) -> Report:
    field = sc.field(_need(args, "field"))
    region = sc.region(_need(args, "region"))
    opts = _options(args)
    body = {"field": args.field, "region": args.region, "flow_t": args.flow_t}
    try:
        if args.flow_t is not None:
            res = flow_displacement_index(field, region, args.flow_t, opts)
        else:
            res = block_index(field, region, opts)
    except BoundaryZeroError as exc:
        return 2, _envelope("index", {**body, "error": f"BoundaryZeroError: {exc}"})
    except IndexComputationError as exc:
        return 1, _envelope("index", {**body, "error": f"{type(exc).__name__}: {exc}"})
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return (0 if res.certified else 1), _envelope("index", {**body, **res.to_json()})


def cmd_verify_main(sc: Scenario, args) -> Report:
    try:
        action = _action(sc)
    except ActionError as exc:
        raise InputError(str(exc)) from None
    name = _need(args, "field")
    x = sc.element(name)
    region = sc.region(_need(args, "region"))
    try:
        rep = verify_main(action, x, region, _options(args), seed=args.seed)
    except BoundaryZeroError as exc:
        raise InputError(f"region does not isolate the zeros of {name}: {exc}") from None
    code = 1 if rep.status == INCONCLUSIVE else 0
    return code, _envelope("verify-main", {"field": name, "region": args.region, **rep.to_json()})


def cmd_plot(sc: Scenario, args) -> Report:
    field = sc.field(_need(args, "field"))
    region = sc.region(_need(args, "region"))
    out = _need(args, "output")
    opts = _options(args)
    try:
        index = block_index(field, region, opts)
        value = index.value if index.certified else None
    except IndexComputationError:
        value = None
    zeros = zero_search(System.of([field], region.chart), region, opts, region.chart).clusters
    svg = phase_portrait(field, region, zeros, value, f"{args.field} on {args.region}")
    try:
        write_atomic(out, svg)
    except OSError as exc:
        raise InputError(f"cannot write {out}: {exc.strerror}") from None
    return 0, _envelope("plot", {"field": args.field, "region": args.region, "output": Path(out).name,
                                 "index": value, "zeros": len(zeros)})


COMMANDS: Dict[str, Callable[[Scenario, argparse.Namespace], Report]] = {
    "check-algebra": cmd_check_algebra,
    "check-action": cmd_check_action,
    "index": cmd_index,
    "verify-main": cmd_verify_main,
    "plot": cmd_plot,
}


def cmd_run(sc: Scenario, args) -> Report:
    """Every task listed in the scenario, in order; exit code is the worst one."""
    results = []
    worst = 0
    for task in sc.tasks:
        ns = argparse.Namespace(command=task["command"], field=task.get("field"),
                                region=task.get("region"), flow_t=task.get("flow_t"),
                                tol=task.get("tol"), seed=task.get("seed", args.seed),
                                output=task.get("output"))
        if ns.output is not None:
            base = Path(args.output).parent if args.output else Path.cwd()
            ns.output = str(base / ns.output)
        try:
            code, rep = COMMANDS[ns.command](sc, ns)
        except (InputError, ScenarioError) as exc:
            code, rep = 2, _envelope(ns.command, {"error": str(exc)})
        worst = max(worst, code)
        results.append({"exit_code": code, "report": rep})
    return worst, _envelope("run", {"tasks": results})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nilfix", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*COMMANDS, "run"):
        p = sub.add_parser(name)
        p.add_argument("scenario", help="scenario JSON file")
        p.add_argument("--field", help="field (or algebra element) name")
        p.add_argument("--region", help="region name")
        p.add_argument("--flow-t", type=float, dest="flow_t",
                       help="use the time-t map displacement instead of the field")
        p.add_argument("--tol", type=float,
                       help="witness tolerance (verify-main) or boundary modulus floor")
        p.add_argument("--seed", type=int, default=0, help="seed for extra multi-start points")
        p.add_argument("-o", "--output", help="write the report (or SVG for plot) here")
    return parser


def run(argv=None) -> Tuple[int, str]:
    """``(exit_code, report_text)`` without touching stdout; handy for tests."""
    args = build_parser().parse_args(argv)
    try:
        sc = load(args.scenario)
        if args.command == "run":
            code, report = cmd_run(sc, args)
        else:
            code, report = COMMANDS[args.command](sc, args)
    except (ScenarioError, InputError) as exc:
        code, report = 2, _envelope(args.command, {"error": str(exc)})
    report["exit_code"] = code
    return code, dumps(report)


def main(argv=None) -> int:
    args_list = sys.argv[1:] if argv is None else list(argv)
    code, text = run(args_list)
    args = build_parser().parse_args(args_list)
    if args.output and args.command not in ("plot",):
        try:
            write_atomic(args.output, text)
        except OSError as exc:
            sys.stderr.write(f"nilfix: cannot write {args.output}: {exc.strerror}\n")
            return 2
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
