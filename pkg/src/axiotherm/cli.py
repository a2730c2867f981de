"""Command-line interface: ``axiotherm <command> ...``.

Every command builds a scenario document and hands it to the scenario
runner, so the CLI and scenario files share one code path. JSON arguments
may be given inline or as a path to a file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ScenarioError
from .scenario import EXIT_INPUT, ScenarioResult, execute, load_document, numerics_from_env

_NUMERIC_FLAGS = (
    ("--quad-rel-tol", "quad_rel_tol", float),
    ("--quad-abs-tol", "quad_abs_tol", float),
    ("--root-tol", "root_tol", float),
    ("--deriv-initial-step", "deriv_initial_step", float),
    ("--max-refinements", "max_refinements", int),
    ("--richardson-levels", "richardson_levels", int),
    ("--entropy-tol", "entropy_tol", float),
)


def json_arg(text: str):
    """Parse an inline JSON value, or load it from the file it names."""
    stripped = text.strip()
    if not stripped.startswith(("{", "[")):
        try:
            stripped = Path(text).read_text(encoding="utf-8")
        except OSError as exc:
            raise argparse.ArgumentTypeError(f"{text!r} is neither inline JSON nor a readable file ({exc.strerror})")
    try:
        return json.loads(stripped)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"invalid JSON in {text!r}: line {exc.lineno}, column {exc.colno}: {exc.msg}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    num = p.add_argument_group("numerics overrides")
    for flag, dest, typ in _NUMERIC_FLAGS:
        num.add_argument(flag, dest=dest, type=typ, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="axiotherm", description="Operational thermodynamics engine.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-model", help="check the structural hypotheses of a model on an energy grid")
    p.add_argument("--model", type=json_arg, required=True, help='{"model": id, "beta": {...}}')
    p.add_argument("--grid", required=True, help="comma list, lin:a:b:n, log:a:b:n or dlog:a:b:n")
    _common(p)

    p = sub.add_parser("measure-entropy", help="run a measure-entropy scenario file")
    p.add_argument("--scenario", required=True)
    _common(p)

    p = sub.add_parser("temperature", help="temperature of a state calibrated against a reference")
    p.add_argument("--state", type=json_arg, required=True)
    p.add_argument("--reference", type=json_arg, required=True)
    p.add_argument("--t-ref", type=float, default=273.16)
    _common(p)

    p = sub.add_parser("equilibrate", help="equal-temperature partition of two systems")
    p.add_argument("--a", type=json_arg, required=True)
    p.add_argument("--b", type=json_arg, required=True)
    p.add_argument("--e-total", type=float, required=True)
    p.add_argument("--scan", type=int, metavar="N", help="also scan total entropy on N points")
    p.add_argument("--half-width", type=float)
    _common(p)

    p = sub.add_parser("audit-reservoir", help="flag models with energy-independent temperature")
    p.add_argument("--model", type=json_arg, required=True)
    p.add_argument("--grid", required=True)
    _common(p)

    p = sub.add_parser("verify", help="run the full randomized check matrix")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=200)
    p.add_argument("--check", action="append", dest="checks", help="run only this check id (repeatable)")
    p.add_argument("--inject", action="append", choices=("decreasing_entropy", "constant_temperature"),
                   help="add a deliberately broken model to the model-level checks")
    _common(p)

    p = sub.add_parser("run", help="run any scenario file")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    _common(p)
    return parser


def _document(args) -> dict:
    c = args.command
    if c in ("measure-entropy", "run"):
        doc = load_document(args.scenario)
        if c == "measure-entropy" and doc["command"] != "measure-entropy":
            raise ScenarioError(f"{args.scenario}: expected a measure-entropy scenario, got {doc['command']!r}")
        if c == "run" and args.seed is not None:
            doc["seed"] = args.seed
        return doc
    if c == "validate-model" or c == "audit-reservoir":
        return {"command": c, "model": args.model, "grid": args.grid}
    if c == "temperature":
        return {"command": c, "state": args.state, "reference": args.reference, "t_ref": args.t_ref}
    if c == "equilibrate":
        doc = {"command": c, "a": args.a, "b": args.b, "e_total": args.e_total}
        if args.scan is not None:
            doc["scan"] = args.scan
        if args.half_width is not None:
            doc["half_width"] = args.half_width
        return doc
    doc = {"command": "verify", "seed": args.seed, "cases": args.cases}
    if args.checks:
        doc["checks"] = args.checks
    if args.inject:
        doc["inject"] = args.inject
    return doc


def _flag_overrides(args) -> dict:
    return {dest: getattr(args, dest) for _, dest, _ in _NUMERIC_FLAGS if getattr(args, dest) is not None}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    try:
        doc = _document(args)
        flags = _flag_overrides(args)
        if flags:
            # command-line flags take precedence over the scenario's numerics block
            doc = {**doc, "numerics": {**doc.get("numerics", {}), **flags}}
        result: ScenarioResult = execute(doc, numerics_from_env())
    except ScenarioError as exc:
        print(f"axiotherm: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = result.render(args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return result.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
