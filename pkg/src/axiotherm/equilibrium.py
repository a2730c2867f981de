"""Mutual equilibrium, maximum entropy scans, Gibbs forces, reservoir audit."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

from .core import (
    FundamentalRelation,
    ModelParams,
    StableEqState,
    invert_fundamental,
    temperature_of,
)
from .errors import BracketError, DomainError, ModelInvariantError
from .numerics import DEFAULT_CONFIG, NumericsConfig, differentiate, solve_monotone
from .report import CheckResult, VerificationReport


@dataclass(frozen=True)
class PartitionResult:
    E_A_star: float
    E_B_star: float
    T_star: float
    S_total_star: float
    iterations: int


def equilibrate_pair(
    frA: FundamentalRelation,
    betaA: ModelParams,
    frB: FundamentalRelation,
    betaB: ModelParams,
    E_total: float,
    cfg: NumericsConfig = DEFAULT_CONFIG,
) -> PartitionResult:
    """Split ``E_total`` between A and B so that their temperatures coincide.

    Solves ``T_A(E_A) = T_B(E_total - E_A)``; the left side increases and
    the right side decreases with ``E_A``, so the root is unique.
    """
    gA, gB = frA.ground(betaA), frB.ground(betaB)
    span = E_total - gA - gB
    if not span > 0:
        raise DomainError(f"E_total={E_total!r} does not exceed the summed ground-state energies {gA + gB!r}")
    calls = 0

    def mismatch(E_A: float) -> float:
        nonlocal calls
        calls += 1
        return frA.temperature(E_A, betaA, cfg) - frB.temperature(E_total - E_A, betaB, cfg)

    # move the bracket ends towards the ground states until the sign change shows up
    margin = 1e-3
    for _ in range(12):
        lo, hi = gA + margin * span, gA + (1.0 - margin) * span
        if lo > gA and E_total - hi > gB and mismatch(lo) < 0 < mismatch(hi):
            break
        margin *= 1e-2
    else:
        raise DomainError("could not bracket the equal-temperature partition")
    E_A = solve_monotone(mismatch, 0.0, (lo, hi), cfg)
    E_B = E_total - E_A
    T = frA.temperature(E_A, betaA, cfg)
    S = frA.entropy(E_A, betaA) + frB.entropy(E_B, betaB)
    return PartitionResult(E_A, E_B, T, S, calls)


@dataclass
class ScanReport:
    partition: PartitionResult
    half_width: float
    epsilon: list[float]
    S_total: list[float]
    dSdeps: list[float]
    interior_maximum: bool
    sign_conditions: bool
    sign_flips: int

    @property
    def passed(self) -> bool:
        return self.interior_maximum and self.sign_conditions and self.sign_flips == 1

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["epsilon", "S_total", "dSdeps"])
        for row in zip(self.epsilon, self.S_total, self.dSdeps):
            writer.writerow([repr(v) for v in row])
        return buf.getvalue()

    def as_dict(self) -> dict:
        return {
            "E_A_star": self.partition.E_A_star,
            "E_B_star": self.partition.E_B_star,
            "T_star": self.partition.T_star,
            "S_total_star": self.partition.S_total_star,
            "half_width": self.half_width,
            "grid_size": len(self.epsilon),
            "interior_maximum": self.interior_maximum,
            "sign_conditions": self.sign_conditions,
            "sign_flips": self.sign_flips,
            "status": "pass" if self.passed else "fail",
        }


def max_entropy_scan(
    frA: FundamentalRelation,
    betaA: ModelParams,
    frB: FundamentalRelation,
    betaB: ModelParams,
    E_total: float,
    grid_size: int = 101,
    half_width: float | None = None,
    cfg: NumericsConfig = DEFAULT_CONFIG,
) -> ScanReport:
    """Scan ``S_A(E_A* + eps) + S_B(E_B* - eps)`` on a symmetric eps-grid.

    ``half_width`` defaults to half the smaller distance of the equilibrium
    partition from either ground state; it is reported back because the
    sign conditions only hold on some interval around zero.
    """
    if grid_size < 3:
        raise ValueError("grid_size must be at least 3")
    part = equilibrate_pair(frA, betaA, frB, betaB, E_total, cfg)
    room = min(part.E_A_star - frA.ground(betaA), part.E_B_star - frB.ground(betaB))
    w = 0.5 * room if half_width is None else float(half_width)
    if not 0 < w < room:
        raise DomainError(f"half width {w!r} must lie in (0, {room!r})")

    n = grid_size
    eps = [w * (2.0 * k / (n - 1) - 1.0) for k in range(n)]

    def total(e: float) -> float:
        return frA.entropy(part.E_A_star + e, betaA) + frB.entropy(part.E_B_star - e, betaB)

    def slope(e: float) -> float:
        return 1.0 / frA.temperature(part.E_A_star + e, betaA, cfg) - 1.0 / frB.temperature(
            part.E_B_star - e, betaB, cfg
        )

    S = [total(e) for e in eps]
    dS = [slope(e) for e in eps]
    S0 = total(0.0)
    interior = all(s < S0 for e, s in zip(eps, S) if e != 0.0)
    signs_ok = all((d > 0) if e < 0 else (d < 0) for e, d in zip(eps, dS) if e != 0.0)
    nonzero = [d for e, d in zip(eps, dS) if e != 0.0]
    flips = sum(1 for a, b in zip(nonzero, nonzero[1:]) if (a > 0) != (b > 0))
    return ScanReport(part, w, eps, S, dS, interior, signs_ok, flips)


def mutual_equilibrium_predicate(
    A: StableEqState, B: StableEqState, tol: float = 1e-8, cfg: NumericsConfig = DEFAULT_CONFIG
) -> bool:
    TA, TB = temperature_of(A, cfg), temperature_of(B, cfg)
    return abs(TA - TB) <= tol * max(TA, TB)


@dataclass(frozen=True)
class GeneralizedForces:
    T: float
    names: tuple[str, ...]
    F: tuple[float, ...]
    pressure: float | None = None
    one_sided: tuple[str, ...] = field(default=())

    def force(self, name: str) -> float:
        return self.F[self.names.index(name)]


def isentropic_energy(fr: FundamentalRelation, beta: ModelParams, S: float, cfg: NumericsConfig = DEFAULT_CONFIG,
                      hint: float | None = None) -> float:
    return invert_fundamental(fr, beta, S, cfg, hint=hint)


def gibbs_forces(
    fr: FundamentalRelation, beta: ModelParams, E: float, cfg: NumericsConfig = DEFAULT_CONFIG
) -> GeneralizedForces:
    """``F_j = dE_se(S, beta)/d beta_j`` at fixed entropy, plus pressure ``-F_V``."""
    S = fr.entropy(E, beta)
    T = fr.temperature(E, beta, cfg)
    forces = []
    one_sided = []
    for name in beta.names:
        lo, hi = beta.bounds_of(name)
        x = beta[name]

        def along(value: float, name=name) -> float:
            return invert_fundamental(fr, beta.replace(**{name: value}), S, cfg, hint=E)

        d = differentiate(along, x, cfg, lower=lo, upper=hi)
        if not math.isfinite(d.value):
            raise ModelInvariantError(f"{fr.model_id}: force conjugated to {name} is not finite")
        forces.append(d.value)
        if d.one_sided:
            one_sided.append(name)
    names = tuple(beta.names)
    pressure = None
    if fr.volume_param is not None and fr.volume_param in names:
        pressure = -forces[names.index(fr.volume_param)]
    return GeneralizedForces(T, names, tuple(forces), pressure, tuple(one_sided))


def gibbs_closure_residual(
    fr: FundamentalRelation,
    beta: ModelParams,
    E: float,
    dS: float,
    dbeta: dict[str, float],
    forces: GeneralizedForces | None = None,
    cfg: NumericsConfig = DEFAULT_CONFIG,
) -> float:
    """``E_se(S + dS, beta + dbeta) - E - T dS - sum F_j dbeta_j``."""
    forces = forces or gibbs_forces(fr, beta, E, cfg)
    S = fr.entropy(E, beta)
    moved = beta.replace(**{k: beta[k] + v for k, v in dbeta.items()})
    E_new = invert_fundamental(fr, moved, S + dS, cfg, hint=E)
    first_order = forces.T * dS + math.fsum(forces.force(k) * v for k, v in dbeta.items())
    return E_new - E - first_order


def reservoir_impossibility_audit(
    fr: FundamentalRelation,
    beta: ModelParams,
    E_grid: Sequence[float],
    cfg: NumericsConfig = DEFAULT_CONFIG,
) -> VerificationReport:
    """Check that no two grid energies share a temperature.

    The ``reservoir_quality`` metric, ``(T_max - T_min) / T_min`` over the
    grid, measures how closely the model imitates a fixed-temperature
    reservoir; a strict reservoir would score exactly zero.
    """
    grid = sorted(float(e) for e in E_grid)
    entries = []
    metrics = {}
    try:
        T = [fr.temperature(e, beta, cfg) for e in grid]
    except (ModelInvariantError, DomainError) as exc:
        entries.append(CheckResult("distinct-temperatures", False, math.nan, 1e-12, len(grid), str(exc)))
        return VerificationReport(entries, metrics)
    rel_steps = [(b - a) / a for a, b in zip(T, T[1:])]
    worst = min(rel_steps) if rel_steps else math.inf
    ok = worst > 1e-12
    detail = "" if ok else "equal temperatures at different energies: an ideal thermal reservoir, which cannot exist"
    entries.append(CheckResult("distinct-temperatures", ok, worst, 1e-12, len(rel_steps), detail))
    if T:
        metrics["reservoir_quality"] = (max(T) - min(T)) / min(T)
        metrics["T_min"] = min(T)
        metrics["T_max"] = max(T)
    return VerificationReport(entries, metrics)
