"""Model systems with closed-form fundamental relations.

Three structurally different families serve as oracles:

============== =============================================== ==============
id             S(E)                                            e_ground
============== =============================================== ==============
ideal_gas      N * (3/2 ln(E/N) + ln(V/N))                     0
quasi_reservoir C * ln(1 + (E - E0)/(C T0))                    E0 - C T0
power_law      a * V**(1-p) * E**p                             0
============== =============================================== ==============

Reduced units with Boltzmann's constant equal to one. The module also
ships two deliberately broken relations used for fault injection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Mapping

from .core import FundamentalRelation, ModelParams, NonEqState, StableEqState
from .errors import DomainError, UnknownModelError

_POS = (0.0, math.inf)


@dataclass(frozen=True)
class CatalogEntry:
    fr: FundamentalRelation
    beta: ModelParams
    doc: str
    energy_of_entropy: Callable[[float, ModelParams], float] | None = None

    @property
    def model_id(self) -> str:
        return self.fr.model_id

    def state(self, E: float, beta: ModelParams | None = None) -> StableEqState:
        return StableEqState(self.fr, float(E), self.beta if beta is None else beta)


def monoatomic_ideal_gas(N: float = 1.0, V: float = 1.0) -> CatalogEntry:
    """Monoatomic ideal gas with parameters ``beta = (N, V)``.

    ``T = 2E / (3N)``; the isentropes are ``E ~ V**(-2/3)``.
    """
    if not N >= 1:
        raise DomainError(f"ideal_gas: particle count N={N!r} must be >= 1")
    if not V > 0:
        raise DomainError(f"ideal_gas: volume V={V!r} must be positive")

    def s_se(E, beta):
        n = beta["N"]
        return n * (1.5 * math.log(E / n) + math.log(beta["V"] / n))

    def temperature(E, beta):
        return 2.0 * E / (3.0 * beta["N"])

    def energy(S, beta):
        n = beta["N"]
        return n * math.exp((S / n - math.log(beta["V"] / n)) / 1.5)

    fr = FundamentalRelation(
        model_id="ideal_gas",
        s_se=s_se,
        e_ground=lambda beta: 0.0,
        t_closed_form=temperature,
        param_bounds=(("N", *_POS), ("V", *_POS)),
        volume_param="V",
    )
    return CatalogEntry(fr, fr.params(N=N, V=V), monoatomic_ideal_gas.__doc__, energy)


def quasi_reservoir(T0: float = 273.16, C: float = 1e6, E0: float = 0.0) -> CatalogEntry:
    """Large system of heat capacity ``C`` with ``T = T0`` at ``E = E0``.

    ``T(E) = T0 + (E - E0)/C`` is strictly increasing, so this is only an
    approximation of a thermal reservoir; the approximation improves as
    ``C`` grows. No parameters (fixed region of space).
    """
    if not T0 > 0:
        raise DomainError(f"quasi_reservoir: T0={T0!r} must be positive")
    if not C > 0:
        raise DomainError(f"quasi_reservoir: C={C!r} must be positive")
    if not math.isfinite(E0):
        raise DomainError(f"quasi_reservoir: E0={E0!r} must be finite")
    T0, C, E0 = float(T0), float(C), float(E0)

    fr = FundamentalRelation(
        model_id="quasi_reservoir",
        s_se=lambda E, beta: C * math.log1p((E - E0) / (C * T0)),
        e_ground=lambda beta: E0 - C * T0,
        t_closed_form=lambda E, beta: T0 + (E - E0) / C,
        constants=(("T0", T0), ("C", C), ("E0", E0)),
    )
    return CatalogEntry(fr, fr.params(), quasi_reservoir.__doc__, lambda S, beta: E0 + C * T0 * math.expm1(S / C))


def power_law_system(a: float = 1.0, p: float = 0.75, V: float = 1.0) -> CatalogEntry:
    """``S = a V**(1-p) E**p`` with ``0 < p < 1`` and parameter ``beta = (V,)``.

    ``T = E**(1-p) / (a p V**(1-p))``. Entropy is bounded below by zero at
    the ground state, so entropy targets ``<= 0`` are unreachable.
    """
    if not a > 0:
        raise DomainError(f"power_law: a={a!r} must be positive")
    if not 0 < p < 1:
        raise DomainError(f"power_law: exponent p={p!r} must lie in (0, 1)")
    if not V > 0:
        raise DomainError(f"power_law: volume V={V!r} must be positive")
    a, p = float(a), float(p)

    def energy(S, beta):
        if not S > 0:
            raise DomainError(f"power_law: entropy {S!r} is not reachable")
        return (S / (a * beta["V"] ** (1 - p))) ** (1 / p)

    fr = FundamentalRelation(
        model_id="power_law",
        s_se=lambda E, beta: a * beta["V"] ** (1 - p) * E**p,
        e_ground=lambda beta: 0.0,
        t_closed_form=lambda E, beta: E ** (1 - p) / (a * p * beta["V"] ** (1 - p)),
        constants=(("a", a), ("p", p)),
        param_bounds=(("V", *_POS),),
        volume_param="V",
    )
    return CatalogEntry(fr, fr.params(V=V), power_law_system.__doc__, energy)


def decreasing_entropy() -> CatalogEntry:
    """Broken model ``S = -E``: entropy decreases with energy."""
    fr = FundamentalRelation(
        model_id="broken_decreasing_S",
        s_se=lambda E, beta: -E,
        e_ground=lambda beta: 0.0,
    )
    return CatalogEntry(fr, fr.params(), decreasing_entropy.__doc__)


def constant_temperature(T: float = 1.0) -> CatalogEntry:
    """Broken model ``S = E/T``: an ideal thermal reservoir with constant T."""
    T = float(T)
    fr = FundamentalRelation(
        model_id="broken_constant_T",
        s_se=lambda E, beta: E / T,
        e_ground=lambda beta: 0.0,
        t_closed_form=lambda E, beta: T,
        constants=(("T", T),),
    )
    return CatalogEntry(fr, fr.params(), constant_temperature.__doc__, lambda S, beta: S * T)


_REGISTRY: dict[str, Callable[..., CatalogEntry]] = {
    "ideal_gas": monoatomic_ideal_gas,
    "quasi_reservoir": quasi_reservoir,
    "power_law": power_law_system,
}

CATALOG_IDS = ("ideal_gas", "quasi_reservoir", "power_law")


def register_model(model_id: str, factory: Callable[..., CatalogEntry]) -> None:
    """Make a custom model loadable by id from JSON declarations."""
    if model_id in _REGISTRY:
        raise ValueError(f"model id {model_id!r} is already registered")
    _REGISTRY[model_id] = factory


def unregister_model(model_id: str) -> None:
    if model_id in CATALOG_IDS:
        raise ValueError(f"cannot unregister built-in model {model_id!r}")
    _REGISTRY.pop(model_id, None)


def registered_models() -> list[str]:
    return sorted(_REGISTRY)


def make_model(model_id: str, **params: float) -> CatalogEntry:
    try:
        factory = _REGISTRY[model_id]
    except KeyError:
        raise UnknownModelError(f"unknown model id {model_id!r}; known: {', '.join(registered_models())}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise DomainError(f"{model_id}: bad parameters {sorted(params)}: {exc}") from None


def model_from_json(decl: Mapping[str, Any]) -> CatalogEntry:
    """Load ``{"model": <id>, "beta": {...}}`` into a catalog entry."""
    if "model" not in decl:
        raise DomainError("model declaration needs a 'model' key")
    params = decl.get("beta", {}) or {}
    return make_model(str(decl["model"]), **{k: float(v) for k, v in params.items()})


def state_from_json(decl: Mapping[str, Any]):
    """Load a state declaration.

    ``{"model": .., "beta": {..}, "E": x}`` gives a stable equilibrium
    state; an extra ``"S"`` key gives a non-equilibrium state with that
    assigned entropy.
    """
    entry = model_from_json(decl)
    if "E" not in decl:
        raise DomainError("state declaration needs an 'E' key")
    E = float(decl["E"])
    if "S" in decl and decl["S"] is not None:
        return NonEqState(entry.fr, E, entry.beta, float(decl["S"]))
    return StableEqState(entry.fr, E, entry.beta)


def state_to_json(state) -> dict:
    from .core import CompositeState

    if isinstance(state, CompositeState):
        return {"parts": [state_to_json(p) for p in state.parts]}
    # constants are factory arguments, so merging them keeps the output loadable
    out = {
        "model": state.model_id,
        "beta": {**dict(state.fr.constants), **state.beta.as_dict()},
        "E": state.E,
    }
    if isinstance(state, NonEqState):
        out["S"] = state.S_assigned
    return out
