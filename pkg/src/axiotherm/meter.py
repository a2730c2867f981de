"""Measurement procedures: interconnection maps, temperatures, entropy.

The map ``E_C = f(E_B)`` pairs meter energies reached by reversible
standard processes driven by the same auxiliary change. Reversible weight
processes conserve total entropy, so the map is realized as the unique
``E_C`` whose entropy change from ``C_ref`` equals that of ``B`` from
``B_ref``. Its derivative is the temperature ratio ``T_C / T_B``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (
    EntropyDelta,
    StableEqState,
    ThermoState,
    entropy_of,
    invert_fundamental,
    temperature_of,
)
from .errors import BracketError, DomainError, IrreversibilityError
from .numerics import (
    DEFAULT_CONFIG,
    T_FLOOR,
    Derivative,
    NumericsConfig,
    differentiate,
    integrate_inverse_T,
)
from .processes import WeightProcessRecord, standard_process


def _require_nonvanishing(state: StableEqState, cfg: NumericsConfig) -> None:
    T = temperature_of(state, cfg)
    if not T > T_FLOOR:
        raise DomainError(f"{state.model_id}: temperature {T!r} at E={state.E!r} is vanishing")


@dataclass(frozen=True)
class InterconnectionMap:
    B_ref: StableEqState
    C_ref: StableEqState
    cfg: NumericsConfig = field(default=DEFAULT_CONFIG, repr=False)

    def _identity(self) -> bool:
        return self.B_ref == self.C_ref

    def __call__(self, E_B: float) -> float:
        return self.eval(E_B)

    def eval(self, E_B: float) -> float:
        if self._identity():
            return float(E_B)
        return self._transfer(self.B_ref, self.C_ref, E_B)

    def inverse(self, E_C: float) -> float:
        if self._identity():
            return float(E_C)
        return self._transfer(self.C_ref, self.B_ref, E_C)

    def _transfer(self, src: StableEqState, dst: StableEqState, E: float) -> float:
        dS = src.fr.entropy(E, src.beta) - entropy_of(src)
        try:
            return invert_fundamental(dst.fr, dst.beta, entropy_of(dst) + dS, self.cfg, hint=dst.E)
        except BracketError as exc:
            raise DomainError(
                f"no stable state of {dst.model_id} matches an entropy change of {dS!r} "
                f"from E={dst.E!r}: the meter would reach its ground state"
            ) from exc

    def _step_scale(self, src: StableEqState, dst: StableEqState, E_src: float, E_dst: float) -> float:
        # keep the entropy change of the step small on both sides of the map
        d_src = E_src - src.fr.ground(src.beta)
        d_dst = E_dst - dst.fr.ground(dst.beta)
        T_src = src.fr.temperature(E_src, src.beta, self.cfg)
        T_dst = dst.fr.temperature(E_dst, dst.beta, self.cfg)
        return min(d_src, T_src * d_dst / T_dst)

    def derivative(self, E_B: float) -> Derivative:
        if self._identity():
            return Derivative(1.0, 0.0)
        scale = self._step_scale(self.B_ref, self.C_ref, E_B, self.eval(E_B))
        return differentiate(self.eval, E_B, self.cfg, scale=scale, lower=self.B_ref.fr.ground(self.B_ref.beta))

    def derivative_at(self, E_B: float) -> float:
        return self.derivative(E_B).value

    def inverse_derivative_at(self, E_C: float) -> float:
        if self._identity():
            return 1.0
        scale = self._step_scale(self.C_ref, self.B_ref, E_C, self.inverse(E_C))
        return differentiate(self.inverse, E_C, self.cfg, scale=scale, lower=self.C_ref.fr.ground(self.C_ref.beta)).value


def build_map(B_ref: StableEqState, C_ref: StableEqState, cfg: NumericsConfig = DEFAULT_CONFIG) -> InterconnectionMap:
    _require_nonvanishing(B_ref, cfg)
    _require_nonvanishing(C_ref, cfg)
    return InterconnectionMap(B_ref, C_ref, cfg)


def temperature_ratio(B_ref: StableEqState, C_ref: StableEqState, cfg: NumericsConfig = DEFAULT_CONFIG) -> float:
    """``T_C / T_B`` measured as the slope of the interconnection map at ``B_ref``."""
    return build_map(B_ref, C_ref, cfg).derivative_at(B_ref.E)


@dataclass(frozen=True)
class ReferenceCalibration:
    R_ref: StableEqState
    T_ref: float = 273.16

    def __post_init__(self):
        if not self.T_ref > 0:
            raise ValueError(f"reference temperature {self.T_ref!r} must be positive")


def calibrated_temperature(
    state: StableEqState, cal: ReferenceCalibration, cfg: NumericsConfig = DEFAULT_CONFIG
) -> float:
    if state == cal.R_ref:
        return float(cal.T_ref)
    return cal.T_ref * temperature_ratio(cal.R_ref, state, cfg)


def measure_entropy_difference(proc: WeightProcessRecord, cfg: NumericsConfig = DEFAULT_CONFIG) -> EntropyDelta:
    """``S_A2 - S_A1 = -int_{E_B1}^{E_B2} dE / T_B`` over a reversible standard process."""
    if not proc.reversible:
        raise IrreversibilityError(
            f"entropy is measured on reversible processes only (sigma={proc.sigma!r}); use lemma7_bound"
        )
    B = proc.B_initial
    delta = integrate_inverse_T(B.fr, B.beta, proc.B_initial.E, proc.B_final.E, cfg)
    return EntropyDelta(-delta.value, delta.abs_error_estimate, delta.quadrature_panels)


def entropy_of_state(
    A1: ThermoState,
    A0: ThermoState,
    S0: float,
    meter: StableEqState,
    cfg: NumericsConfig = DEFAULT_CONFIG,
) -> float:
    """Entropy of ``A1`` relative to the reference ``A0`` with assigned entropy ``S0``."""
    if A1 == A0:
        return float(S0)
    proc = standard_process(A0, A1, meter, 0.0, cfg)
    return S0 + measure_entropy_difference(proc, cfg).value
