"""Weight processes: construction, reversal, composition and audits.

Irreversibility is parametrized by the entropy generated, ``sigma >= 0``.
For a weight process of ``AB`` standard with respect to the meter ``B`` the
entropy balance reads ``dS_B = -dS_A + sigma`` and the energy balance
``work_done_by_AB = -(dE_A + dE_B)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import (
    NonEqState,
    StableEqState,
    ThermoState,
    entropy_of,
    invert_fundamental,
)
from .errors import (
    BracketError,
    CompositionError,
    ContractError,
    IrreversibilityError,
    MeterTooSmallError,
)
from .numerics import DEFAULT_CONFIG, T_FLOOR, NumericsConfig, integrate_inverse_T


class Direction(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(frozen=True)
class PolygonalLeg:
    """One weight process of a polygonal, traversed in either direction."""

    work: float
    direction: Direction = Direction.FORWARD

    def __post_init__(self):
        if not math.isfinite(self.work):
            raise ValueError(f"leg work {self.work!r} is not finite")
        object.__setattr__(self, "direction", Direction(self.direction))


def polygonal_work(legs: Sequence[PolygonalLeg]) -> float:
    """Work done by A along a weight polygonal: forward works minus backward works."""
    if not legs:
        raise ValueError("a weight polygonal needs at least one leg")
    return math.fsum(leg.work if leg.direction is Direction.FORWARD else -leg.work for leg in legs)


@dataclass(frozen=True)
class WeightProcessRecord:
    A_initial: ThermoState
    A_final: ThermoState
    B_initial: StableEqState
    B_final: StableEqState
    work_done_by_AB: float
    sigma: float
    reversible: bool

    def __post_init__(self):
        if self.B_initial.fr != self.B_final.fr or self.B_initial.beta != self.B_final.beta:
            raise ContractError("meter end states must belong to the same system with identical parameters")
        if not self.sigma >= 0:
            raise ContractError(f"entropy generated sigma={self.sigma!r} must be non-negative")
        if self.reversible != (self.sigma == 0):
            raise ContractError("reversible flag must equal (sigma == 0)")

    @property
    def meter_id(self) -> str:
        return self.B_initial.model_id

    def energy_residual(self) -> float:
        """``work + dE_A + dE_B``; zero up to rounding for every valid record."""
        dE_A = self.A_final.E - self.A_initial.E
        dE_B = self.B_final.E - self.B_initial.E
        return self.work_done_by_AB + dE_A + dE_B

    def entropy_residual(self) -> float:
        """``dS_B + dS_A - sigma``; zero up to the inversion tolerance."""
        dS_A = entropy_of(self.A_final) - entropy_of(self.A_initial)
        dS_B = entropy_of(self.B_final) - entropy_of(self.B_initial)
        return dS_B + dS_A - self.sigma


def standard_process(
    A1: ThermoState,
    A2: ThermoState,
    B_start: StableEqState,
    sigma: float = 0.0,
    cfg: NumericsConfig = DEFAULT_CONFIG,
) -> WeightProcessRecord:
    """Weight process for AB from A1 to A2, standard with respect to the meter B.

    The meter's final energy is fixed by the entropy balance. ``sigma = 0``
    gives the reversible process, whose final meter energy is the lowest
    attainable one.
    """
    if not (isinstance(sigma, (int, float)) and sigma >= 0 and math.isfinite(sigma)):
        raise ContractError(f"entropy generated sigma={sigma!r} must be a finite non-negative number")
    sigma = float(sigma)
    dS_A = entropy_of(A2) - entropy_of(A1)
    if dS_A == 0 and sigma == 0:
        B_final = B_start
    else:
        S_target = entropy_of(B_start) - dS_A + sigma
        try:
            E_final = invert_fundamental(B_start.fr, B_start.beta, S_target, cfg, hint=B_start.E)
        except BracketError as exc:
            raise MeterTooSmallError(
                f"meter {B_start.model_id} starting at E={B_start.E!r} cannot absorb dS={-dS_A + sigma!r}: {exc}"
            ) from exc
        B_final = B_start.with_energy(E_final)
        if not B_final.fr.temperature(E_final, B_final.beta, cfg) > T_FLOOR:
            raise MeterTooSmallError(f"meter {B_start.model_id} would end at a vanishing temperature")
    work = -((A2.E - A1.E) + (B_final.E - B_start.E))
    return WeightProcessRecord(A1, A2, B_start, B_final, work, sigma, sigma == 0)


def reverse(proc: WeightProcessRecord) -> WeightProcessRecord:
    if not proc.reversible:
        raise IrreversibilityError(
            f"process with sigma={proc.sigma!r} cannot be reversed: the reverse would destroy entropy"
        )
    return WeightProcessRecord(
        proc.A_final, proc.A_initial, proc.B_final, proc.B_initial, -proc.work_done_by_AB, 0.0, True
    )


def compose(procs: Sequence[WeightProcessRecord]) -> WeightProcessRecord:
    """Chain processes whose participant end states match exactly."""
    procs = list(procs)
    if not procs:
        raise CompositionError("nothing to compose")
    for k, (first, second) in enumerate(zip(procs, procs[1:])):
        if first.A_final != second.A_initial:
            raise CompositionError(f"leg {k} ends with A in {first.A_final!r}, leg {k + 1} starts from {second.A_initial!r}")
        if first.B_final != second.B_initial:
            raise CompositionError(f"leg {k} ends with B in {first.B_final!r}, leg {k + 1} starts from {second.B_initial!r}")
    sigma = math.fsum(p.sigma for p in procs)
    work = math.fsum(p.work_done_by_AB for p in procs)
    return WeightProcessRecord(
        procs[0].A_initial, procs[-1].A_final, procs[0].B_initial, procs[-1].B_final, work, sigma, sigma == 0
    )


def process_of_A_alone(A1: ThermoState, A2: ThermoState, meter: StableEqState) -> WeightProcessRecord:
    """Weight process for A only; the meter is a spectator and stays put.

    The entropy balance forces ``sigma = S(A2) - S(A1)``, so a decrease of
    A's entropy is rejected as impossible.
    """
    dS = entropy_of(A2) - entropy_of(A1)
    if dS < 0:
        raise ContractError(f"a weight process for A alone cannot lower its entropy (dS={dS!r})")
    return WeightProcessRecord(A1, A2, meter, meter, -(A2.E - A1.E), dS, dS == 0)


def relax(A: NonEqState, meter: StableEqState) -> WeightProcessRecord:
    """Zero-work relaxation of a non-equilibrium state to the stable state of equal energy."""
    return process_of_A_alone(A, A.relaxed(), meter)


@dataclass(frozen=True)
class Pmm2Decision:
    accepted: bool
    reason: str


def check_pmm2(A_start: StableEqState, proposed_work_extracted: float, beta_changed: bool) -> Pmm2Decision:
    """Accept or reject a proposed weight process for A starting in a stable state.

    Extracting positive work with no net change of parameters would lower
    the energy of a stable equilibrium state, and is rejected.
    """
    if not isinstance(A_start, StableEqState):
        raise ContractError("the starting state must be a stable equilibrium state")
    if proposed_work_extracted > 0 and not beta_changed:
        E_end = A_start.E - proposed_work_extracted
        if E_end > A_start.fr.ground(A_start.beta):
            s_max = A_start.fr.entropy(E_end, A_start.beta)
            why = (
                f"the highest entropy at E={E_end!r} is {s_max!r}, below the starting "
                f"{entropy_of(A_start)!r}: the entropy of A would have to decrease"
            )
        else:
            why = f"E={E_end!r} is not above the ground-state energy"
        return Pmm2Decision(False, f"rejected: extracting {proposed_work_extracted!r} from a stable state; {why}")
    if beta_changed:
        return Pmm2Decision(True, "accepted: parameters change, outside the impossibility hypothesis")
    return Pmm2Decision(True, "accepted: work is supplied to the system, not extracted")


@dataclass(frozen=True)
class IrreversibleBound:
    measured: float
    assigned_dS: float
    gap: float
    holds: bool


def lemma7_bound(proc: WeightProcessRecord, cfg: NumericsConfig = DEFAULT_CONFIG) -> IrreversibleBound:
    """Compare ``-int dE/T_B`` over an irreversible process with the assigned ``dS_A``.

    The integral over the irreversible meter interval falls strictly below
    the entropy change of A; the gap equals the entropy generated.
    """
    if proc.reversible:
        raise ContractError("process is reversible; use measure_entropy_difference instead")
    B = proc.B_initial
    measured = -integrate_inverse_T(B.fr, B.beta, proc.B_initial.E, proc.B_final.E, cfg).value
    assigned = entropy_of(proc.A_final) - entropy_of(proc.A_initial)
    return IrreversibleBound(measured, assigned, assigned - measured, measured < assigned)


def record_to_json(proc: WeightProcessRecord) -> dict:
    from .catalog import state_to_json

    return {
        "A_initial": state_to_json(proc.A_initial),
        "A_final": state_to_json(proc.A_final),
        "B_initial": state_to_json(proc.B_initial),
        "B_final": state_to_json(proc.B_final),
        "work_done_by_AB": proc.work_done_by_AB,
        "sigma": proc.sigma,
        "reversible": proc.reversible,
    }
