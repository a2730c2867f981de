"""JSON scenarios: schema validation, dispatch, and deterministic rendering.

A scenario is a JSON object with a ``command`` and its payload, plus the
optional keys ``seed``, ``numerics`` (overrides of :class:`NumericsConfig`)
and ``models`` (named model declarations that states may refer to)::

    {"command": "measure-entropy",
     "models": {"gas": {"model": "ideal_gas", "beta": {"N": 1, "V": 1}}},
     "A1": {"model": "gas", "E": 3.0},
     "A2": {"model": "gas", "E": 1.5},
     "meter": {"model": "gas", "E": 1.5}}

Exit codes: 0 when every check passes, 1 on a check failure, 2 on bad input.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import jsonschema

from . import catalog
from .core import StableEqState, entropy_of, validate_model
from .equilibrium import equilibrate_pair, max_entropy_scan, reservoir_impossibility_audit
from .errors import AxiothermError, ContractError, DomainError, ScenarioError, UnknownModelError
from .meter import ReferenceCalibration, build_map, calibrated_temperature, measure_entropy_difference
from .numerics import DEFAULT_CONFIG, NumericsConfig
from .processes import lemma7_bound, record_to_json, standard_process

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
NUMERICS_ENV = "AXIOTHERM_NUMERICS"
COMMANDS = ("measure-entropy", "temperature", "equilibrate", "verify", "audit-reservoir", "validate-model")

_NUMBER = {"type": "number"}
_MODEL = {
    "type": "object",
    "required": ["model"],
    "properties": {
        "model": {"type": "string", "minLength": 1},
        "beta": {"type": "object", "additionalProperties": _NUMBER},
    },
    "additionalProperties": False,
}
_STATE = {
    "type": "object",
    "required": ["model", "E"],
    "properties": {**_MODEL["properties"], "E": _NUMBER, "S": _NUMBER},
    "additionalProperties": False,
}
_GRID = {"oneOf": [{"type": "array", "items": _NUMBER, "minItems": 2}, {"type": "string"}]}


def _command(name: str, required: list[str], props: dict) -> dict:
    return {
        "if": {"properties": {"command": {"const": name}}},
        "then": {"required": required, "properties": props},
    }


SCHEMA: dict = {
    "type": "object",
    "required": ["command"],
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "seed": {"type": "integer"},
        "numerics": {"type": "object", "additionalProperties": _NUMBER},
        "models": {"type": "object", "additionalProperties": _MODEL},
        "A1": _STATE,
        "A2": _STATE,
        "meter": _STATE,
        "sigma": {"type": "number", "minimum": 0},
        "state": _STATE,
        "reference": _STATE,
        "t_ref": {"type": "number", "exclusiveMinimum": 0},
        "a": _MODEL,
        "b": _MODEL,
        "e_total": _NUMBER,
        "scan": {"type": "integer", "minimum": 3},
        "half_width": {"type": "number", "exclusiveMinimum": 0},
        "cases": {"type": "integer", "minimum": 1},
        "checks": {"type": "array", "items": {"type": "string"}},
        "inject": {"type": "array", "items": {"enum": ["decreasing_entropy", "constant_temperature"]}},
        "model": _MODEL,
        "grid": _GRID,
    },
    "additionalProperties": False,
    "allOf": [
        _command("measure-entropy", ["A1", "A2", "meter"], {}),
        _command("temperature", ["state", "reference"], {}),
        _command("equilibrate", ["a", "b", "e_total"], {}),
        _command("audit-reservoir", ["model", "grid"], {}),
        _command("validate-model", ["model", "grid"], {}),
    ],
}


@dataclass
class ScenarioResult:
    payload: dict
    exit_code: int
    csv_text: str | None = None

    def render(self, fmt: str = "json") -> str:
        if fmt == "json":
            return dumps(self.payload)
        if fmt == "csv":
            return self.csv_text if self.csv_text is not None else _flat_csv(self.payload)
        raise ValueError(f"unknown format {fmt!r}")


# ------------------------------------------------------------------ rendering


def _finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def dumps(payload: Mapping) -> str:
    return json.dumps(_finite(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _flat_csv(payload: Mapping) -> str:
    scalars = {k: v for k, v in sorted(payload.items()) if isinstance(v, (str, int, float, bool)) or v is None}
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(scalars))
    writer.writerow([repr(v) if isinstance(v, float) else v for v in scalars.values()])
    return buf.getvalue()


# -------------------------------------------------------------------- loading


def _line_of(text: str, path: list) -> int | None:
    """Best-effort line number of the JSON member addressed by ``path``."""
    pos = 0
    found = None
    for key in path:
        if isinstance(key, int):
            continue
        m = re.compile(r'"%s"\s*:' % re.escape(str(key))).search(text, pos)
        if m is None:
            break
        pos, found = m.end(), m.start()
    return None if found is None else text.count("\n", 0, found) + 1


def _field(path) -> str:
    out = "$"
    for key in path:
        out += f"[{key}]" if isinstance(key, int) else f".{key}"
    return out


def validate_document(doc: Any, text: str | None = None) -> None:
    """Raise :class:`ScenarioError` listing every schema violation with its field and line."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if not errors:
        return
    lines = []
    for err in errors:
        path = list(err.absolute_path)
        where = _field(path)
        line = _line_of(text, path) if text is not None else None
        lines.append(f"{where}{f' (line {line})' if line else ''}: {err.message}")
    raise ScenarioError("invalid scenario:\n  " + "\n  ".join(lines))


def load_document(path: str | os.PathLike) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {str(path)!r}: {exc.strerror}") from None
    return parse_document(text, str(path))


def parse_document(text: str, source: str = "<scenario>") -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    validate_document(doc, text)
    return doc


def numerics_from_env(base: NumericsConfig = DEFAULT_CONFIG) -> NumericsConfig:
    """Apply the JSON numerics file named by ``AXIOTHERM_NUMERICS``, if set."""
    path = os.environ.get(NUMERICS_ENV)
    if not path:
        return base
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"{NUMERICS_ENV}={path!r}: {exc}") from None
    if isinstance(data, dict) and isinstance(data.get("numerics"), dict):
        data = data["numerics"]
    try:
        return NumericsConfig.from_mapping(data, base)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{NUMERICS_ENV}={path!r}: {exc}") from None


def resolve_config(doc: Mapping, base: NumericsConfig | None = None) -> NumericsConfig:
    cfg = numerics_from_env() if base is None else base
    try:
        return NumericsConfig.from_mapping(doc.get("numerics", {}), cfg)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"$.numerics: {exc}") from None


class _Models:
    """Resolves model ids and scenario-local aliases."""

    def __init__(self, aliases: Mapping[str, Mapping] | None):
        self.aliases = dict(aliases or {})

    def decl(self, d: Mapping, where: str) -> dict:
        name = d["model"]
        if name in self.aliases:
            base = self.aliases[name]
            merged = {"model": base["model"], "beta": {**base.get("beta", {}), **d.get("beta", {})}}
        else:
            merged = {"model": name, "beta": dict(d.get("beta", {}))}
        for key in ("E", "S"):
            if key in d:
                merged[key] = d[key]
        return merged

    def model(self, d: Mapping, where: str):
        try:
            return catalog.model_from_json(self.decl(d, where))
        except (UnknownModelError, DomainError) as exc:
            raise ScenarioError(f"{where}: {exc}") from None

    def state(self, d: Mapping, where: str):
        try:
            return catalog.state_from_json(self.decl(d, where))
        except (UnknownModelError, DomainError) as exc:
            raise ScenarioError(f"{where}: {exc}") from None


# ---------------------------------------------------------------------- grids


def parse_grid(spec, entry=None) -> list[float]:
    """Energy grid from a list, a comma list, ``lin:a:b:n``, ``log:a:b:n`` or ``dlog:a:b:n``.

    ``dlog`` spaces the distances from the model's ground state geometrically.
    """
    if isinstance(spec, (list, tuple)):
        return [float(x) for x in spec]
    text = str(spec).strip()
    parts = text.split(":")
    try:
        if len(parts) == 4 and parts[0] in ("lin", "log", "dlog"):
            kind, a, b, n = parts[0], float(parts[1]), float(parts[2]), int(parts[3])
            if n < 2:
                raise ValueError("a grid needs at least 2 points")
            if kind == "lin":
                return [a + (b - a) * k / (n - 1) for k in range(n)]
            if not (a > 0 and b > 0):
                raise ValueError("log grids need positive end points")
            pts = [a * (b / a) ** (k / (n - 1)) for k in range(n)]
            if kind == "dlog":
                if entry is None:
                    raise ValueError("dlog grids need a model")
                g = entry.fr.ground(entry.beta)
                pts = [g + d for d in pts]
            return pts
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ScenarioError(f"bad grid {text!r}: {exc}") from None


# ------------------------------------------------------------------- commands


def _measure_entropy(doc, cfg, models):
    A1 = models.state(doc["A1"], "$.A1")
    A2 = models.state(doc["A2"], "$.A2")
    meter = models.state(doc["meter"], "$.meter")
    if not isinstance(meter, StableEqState):
        raise ScenarioError("$.meter: the meter must be in a stable equilibrium state (drop 'S')")
    sigma = float(doc.get("sigma", 0.0))
    try:
        proc = standard_process(A1, A2, meter, sigma, cfg)
    except (DomainError, ContractError) as exc:
        raise ScenarioError(f"$.meter: {exc}") from None
    out = {
        "command": "measure-entropy",
        "meter_id": proc.meter_id,
        "process": record_to_json(proc),
        "assigned_dS": entropy_of(A2) - entropy_of(A1),
    }
    if proc.reversible:
        delta = measure_entropy_difference(proc, cfg)
        out.update(value=delta.value, abs_error_estimate=delta.abs_error_estimate,
                   quadrature_panels=delta.quadrature_panels, status="pass")
    else:
        bound = lemma7_bound(proc, cfg)
        out.update(value=bound.measured, gap=bound.gap, strict_bound_holds=bound.holds,
                   status="pass" if bound.holds else "fail")
    return ScenarioResult(out, EXIT_PASS if out["status"] == "pass" else EXIT_FAIL)


def _temperature(doc, cfg, models):
    state = models.state(doc["state"], "$.state")
    ref = models.state(doc["reference"], "$.reference")
    for where, s in (("$.state", state), ("$.reference", ref)):
        if not isinstance(s, StableEqState):
            raise ScenarioError(f"{where}: temperatures are defined for stable equilibrium states only")
    t_ref = float(doc.get("t_ref", 273.16))
    try:
        fmap = build_map(ref, state, cfg)
        value = calibrated_temperature(state, ReferenceCalibration(ref, t_ref), cfg)
    except DomainError as exc:
        raise ScenarioError(str(exc)) from None
    err = 0.0 if state == ref else t_ref * fmap.derivative(ref.E).error
    out = {
        "command": "temperature",
        "value": value,
        "abs_error_estimate": err,
        "meter_id": ref.model_id,
        "t_ref": t_ref,
        "status": "pass",
    }
    return ScenarioResult(out, EXIT_PASS)


def _equilibrate(doc, cfg, models):
    A = models.model(doc["a"], "$.a")
    B = models.model(doc["b"], "$.b")
    E_total = float(doc["e_total"])
    try:
        part = equilibrate_pair(A.fr, A.beta, B.fr, B.beta, E_total, cfg)
        scan = None
        if "scan" in doc:
            scan = max_entropy_scan(A.fr, A.beta, B.fr, B.beta, E_total, int(doc["scan"]),
                                    doc.get("half_width"), cfg)
    except DomainError as exc:
        raise ScenarioError(str(exc)) from None
    out = {
        "command": "equilibrate",
        "E_A_star": part.E_A_star,
        "E_B_star": part.E_B_star,
        "T_star": part.T_star,
        "S_total_star": part.S_total_star,
        "iterations": part.iterations,
        "status": "pass",
    }
    if scan is None:
        return ScenarioResult(out, EXIT_PASS)
    out["scan"] = scan.as_dict()
    out["status"] = scan.as_dict()["status"]
    return ScenarioResult(out, EXIT_PASS if scan.passed else EXIT_FAIL, scan.to_csv())


def _report_result(command, report, extra=None):
    out = {"command": command, **report.as_dict(), **(extra or {})}
    return ScenarioResult(out, EXIT_PASS if report.passed else EXIT_FAIL, report.to_csv())


def _audit_reservoir(doc, cfg, models):
    entry = models.model(doc["model"], "$.model")
    grid = parse_grid(doc["grid"], entry)
    report = reservoir_impossibility_audit(entry.fr, entry.beta, grid, cfg)
    return _report_result("audit-reservoir", report, {"model_id": entry.model_id})


def _validate_model(doc, cfg, models):
    entry = models.model(doc["model"], "$.model")
    grid = parse_grid(doc["grid"], entry)
    report = validate_model(entry.fr, entry.beta, grid, cfg)
    return _report_result("validate-model", report, {"model_id": entry.model_id})


def _verify(doc, cfg, models):
    from .verify import CHECK_IDS, verify_all

    checks = doc.get("checks")
    if checks is not None:
        unknown = sorted(set(checks) - set(CHECK_IDS))
        if unknown:
            raise ScenarioError(f"$.checks: unknown check ids {unknown}")
    inject = {"decreasing_entropy": catalog.decreasing_entropy, "constant_temperature": catalog.constant_temperature}
    extras = [inject[name]() for name in doc.get("inject", [])]
    report = verify_all(int(doc.get("seed", 0)), int(doc.get("cases", 200)), extras, cfg, only=checks)
    return _report_result("verify", report, {"seed": int(doc.get("seed", 0)), "cases_per_check": int(doc.get("cases", 200))})


_DISPATCH = {
    "measure-entropy": _measure_entropy,
    "temperature": _temperature,
    "equilibrate": _equilibrate,
    "verify": _verify,
    "audit-reservoir": _audit_reservoir,
    "validate-model": _validate_model,
}


def execute(doc: Mapping, base_cfg: NumericsConfig | None = None) -> ScenarioResult:
    """Validate and run one scenario document; raises :class:`ScenarioError` on bad input."""
    validate_document(doc)
    cfg = resolve_config(doc, base_cfg)
    models = _Models(doc.get("models"))
    try:
        return _DISPATCH[doc["command"]](doc, cfg, models)
    except ScenarioError:
        raise
    except AxiothermError as exc:
        # numerical failures inside a well-formed run are check failures, not input errors
        out = {"command": doc["command"], "status": "fail", "error": f"{type(exc).__name__}: {exc}"}
        return ScenarioResult(out, EXIT_FAIL)


def run_scenario(
    path: str | os.PathLike,
    out: str | os.PathLike | None = None,
    fmt: str = "json",
    base_cfg: NumericsConfig | None = None,
) -> ScenarioResult:
    """Run the scenario file at ``path``; write the rendered report to ``out`` when given."""
    result = execute(load_document(path), base_cfg)
    if out is not None:
        Path(out).write_text(result.render(fmt), encoding="utf-8")
    return result
