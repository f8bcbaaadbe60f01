"""Command-line frontend.

Subcommands: bound, facet, value, seesaw, visibility, report.  Inequalities
are given either as ``catalog:<name>:<K>`` or as a path to a bracket-format
text file; models are JSON files produced by the serialization helpers.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys

from . import __version__
from .catalog import CATALOG_NAMES, catalog
from .expressions import evaluate
from .polytope import facet_check, local_bound
from .quantum import state_factory, visibility
from .report import ReportSpec, run_report
from .seesaw import MODES, SeesawConfig, seesaw
from .textio import (
    model_from_json,
    model_to_json,
    parse_expression,
    serialize_expression,
)

EXTENDED_OUTPUT_LIMIT = 5  # enumeration beyond K=5 needs --extended


def _load_expression(spec: str):
    if spec.startswith("catalog:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise SystemExit(f"expected catalog:<name>:<K>, got {spec!r}")
        name, k_txt = parts[1], parts[2]
        if name not in CATALOG_NAMES:
            raise SystemExit(
                f"unknown inequality {name!r}; choices: {', '.join(CATALOG_NAMES)}"
            )
        try:
            return catalog(name, int(k_txt))
        except (ValueError, KeyError) as exc:
            raise SystemExit(str(exc)) from exc
    try:
        with open(spec, encoding="utf-8") as fh:
            return parse_expression(fh.read())
    except OSError as exc:
        raise SystemExit(f"cannot read {spec}: {exc}") from exc


def _config_hash(args: argparse.Namespace) -> str:
    payload = json.dumps(
        {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        sort_keys=True,
        default=str,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _meta(args) -> dict:
    return {
        "version": __version__,
        "seed": args.seed,
        "config_hash": _config_hash(args),
    }


def _emit(args, payload: dict) -> None:
    if args.format == "csv":
        raise SystemExit("csv output is only available for the report command")
    print(json.dumps(payload, indent=2, default=str))


def _guard_extended(expr, args) -> None:
    if expr.scenario.outputs > EXTENDED_OUTPUT_LIMIT and not args.extended:
        raise SystemExit(
            f"K={expr.scenario.outputs} enumeration is slow; rerun with --extended"
        )


def _cmd_bound(args) -> int:
    expr = _load_expression(args.ineq)
    _guard_extended(expr, args)
    bound, optimizers = local_bound(expr)
    _emit(args, {
        "meta": _meta(args),
        "comparator": expr.comparator,
        "local_bound": str(bound),
        "local_bound_float": float(bound),
        "optimizer_count": len(optimizers),
    })
    return 0


def _cmd_facet(args) -> int:
    expr = _load_expression(args.ineq)
    _guard_extended(expr, args)
    report = facet_check(expr, seed=args.seed)
    _emit(args, {"meta": _meta(args), **report.to_dict()})
    return 0


def _cmd_value(args) -> int:
    expr = _load_expression(args.ineq)
    with open(args.model, encoding="utf-8") as fh:
        model = model_from_json(json.load(fh))
    from .quantum import behavior_of

    value = evaluate(expr, behavior_of(model))
    _emit(args, {
        "meta": _meta(args),
        "value": value,
        "bound": str(expr.bound),
        "comparator": expr.comparator,
        "violates": not expr.satisfied_by(value),
    })
    return 0


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise SystemExit(f"bad dims {text!r}; expected e.g. 2,2,2")
    if not dims:
        raise SystemExit("dims cannot be empty")
    return dims


def _cmd_seesaw(args) -> int:
    expr = _load_expression(args.ineq)
    dims = _parse_dims(args.dims)
    mode = args.mode
    state = None
    if args.state is not None:
        name, _, k_txt = args.state.partition(":")
        K = int(k_txt) if k_txt else expr.scenario.outputs
        state = state_factory(name, K)
        mode = "fixed-state"
    config = SeesawConfig(
        dimensions=dims,
        restarts=args.restarts,
        max_sweeps=args.max_sweeps,
        seed=args.seed,
        mode=mode,
        threads=args.threads,
    )
    result = seesaw(expr, config, state=state)
    payload = {
        "meta": _meta(args),
        "value": result.value,
        "visibility": result.visibility.value,
        "reduced_ranks": list(result.reduced_ranks),
        "traces": [
            {"restart": t.restart_index, "value": t.final_value, "sweeps": t.sweeps}
            for t in result.traces
        ],
    }
    if args.emit_model:
        payload["model"] = model_to_json(result.model)
    _emit(args, payload)
    return 0


def _cmd_visibility(args) -> int:
    expr = _load_expression(args.ineq)
    with open(args.model, encoding="utf-8") as fh:
        model = model_from_json(json.load(fh))
    result = visibility(expr, model, noise=args.noise)
    _emit(args, {
        "meta": _meta(args),
        "visibility": result.value,
        "violating": result.violating,
        "state_value": result.state_value,
        "noise_value": result.noise_value,
        "noise_dimension": result.noise_dimension,
    })
    return 0


def _cmd_report(args) -> int:
    k_range = None
    if args.k_range is not None:
        k_range = tuple(int(k) for k in args.k_range.split(",")) if args.k_range else ()
    spec = ReportSpec(
        table=args.table,
        output_path=args.output,
        format=args.format,
        k_range=k_range,
        restarts=args.restarts,
        time_cap=args.time_cap,
        seed=args.seed,
        threads=args.threads,
        extended=args.extended,
    )
    outcome = run_report(spec)
    summary = {
        "meta": {"version": __version__, "seed": args.seed,
                 "config_hash": spec.config_hash()},
        "output": str(outcome.path),
        "rows": len(outcome.rows),
        "incomplete": outcome.incomplete,
        "exit_code": outcome.exit_code,
    }
    print(json.dumps(summary, indent=2))
    return outcome.exit_code


def _cmd_serialize(args) -> int:
    expr = _load_expression(args.ineq)
    sys.stdout.write(serialize_expression(expr))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellkit",
        description="Tripartite Bell inequalities in modular bracket form: "
        "exact local bounds, facet checks, and quantum violations.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master RNG seed")
    common.add_argument("--threads", type=int, default=1,
                        help="concurrent see-saw restarts")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--extended", action="store_true",
                        help="unlock slow / extended-target runs")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", parents=[common],
                       help="exact local bound by enumeration")
    p.add_argument("--ineq", required=True)
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("facet", parents=[common],
                       help="tightness report for an inequality")
    p.add_argument("--ineq", required=True)
    p.set_defaults(func=_cmd_facet)

    p = sub.add_parser("value", parents=[common],
                       help="evaluate an inequality on a fixed model")
    p.add_argument("--ineq", required=True)
    p.add_argument("--model", required=True, help="model JSON file")
    p.set_defaults(func=_cmd_value)

    p = sub.add_parser("seesaw", parents=[common],
                       help="alternating optimization of the quantum value")
    p.add_argument("--ineq", required=True)
    p.add_argument("--dims", required=True, help="local dimensions, e.g. 2,2,2")
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--max-sweeps", type=int, default=500)
    p.add_argument("--mode", choices=MODES, default="free")
    p.add_argument("--state", default=None,
                   help="state name[:K] pins the state (fixed-state mode)")
    p.add_argument("--emit-model", action="store_true",
                   help="include the best model in the output")
    p.set_defaults(func=_cmd_seesaw)

    p = sub.add_parser("visibility", parents=[common],
                       help="white-noise threshold of a fixed model")
    p.add_argument("--ineq", required=True)
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--noise", choices=("support", "ambient"), default="support")
    p.set_defaults(func=_cmd_visibility)

    p = sub.add_parser("report", parents=[common],
                       help="regenerate a reference table with comparisons")
    p.add_argument("--table", required=True, choices=("I", "II", "III", "IV", "V"))
    p.add_argument("--output", required=True)
    p.add_argument("--k-range", default=None,
                   help="comma-separated K values (empty for none)")
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--time-cap", type=float, default=None,
                   help="wall-clock budget in seconds")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("serialize", parents=[common],
                       help="print an inequality in the text format")
    p.add_argument("--ineq", required=True)
    p.set_defaults(func=_cmd_serialize)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
