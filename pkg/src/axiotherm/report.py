"""Check results and verification reports with deterministic serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field


def _num(value: float):
    # JSON has no NaN/Infinity; encode them as strings so output stays valid
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    passed: bool
    residual: float
    tolerance: float
    cases_run: int
    detail: str = ""
    statement: str = ""

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def as_dict(self) -> dict:
        out = {
            "check_id": self.check_id,
            "status": self.status,
            "residual": _num(float(self.residual)),
            "tolerance": _num(float(self.tolerance)),
            "cases_run": int(self.cases_run),
        }
        if self.statement:
            out["statement"] = self.statement
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class VerificationReport:
    entries: list[CheckResult]
    metrics: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(entry.passed for entry in self.entries)

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def __getitem__(self, check_id: str) -> CheckResult:
        for entry in self.entries:
            if entry.check_id == check_id:
                return entry
        raise KeyError(check_id)

    def check_ids(self) -> list[str]:
        return [entry.check_id for entry in self.entries]

    def failures(self) -> list[CheckResult]:
        return [entry for entry in self.entries if not entry.passed]

    def as_dict(self) -> dict:
        out = {
            "status": self.status,
            "checks": [e.as_dict() for e in sorted(self.entries, key=lambda e: e.check_id)],
        }
        if self.metrics:
            out["metrics"] = {k: _num(float(v)) for k, v in sorted(self.metrics.items())}
        return out

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["check_id", "status", "residual", "tolerance", "cases_run"])
        for e in sorted(self.entries, key=lambda e: e.check_id):
            writer.writerow([e.check_id, e.status, repr(float(e.residual)), repr(float(e.tolerance)), e.cases_run])
        return buf.getvalue()
