"""Systems, states and fundamental relations.

A closed system is described by its fundamental relation ``S_se(E, beta)``
together with the ground-state energy ``e_ground(beta)``. A stable
equilibrium state is fully identified by ``(model, E, beta)``; a
non-equilibrium state additionally carries an assigned entropy that must be
strictly below ``S_se(E, beta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence, Union

from .errors import (
    ConvergenceError,
    BracketError,
    DomainError,
    ModelInvariantError,
)
from .numerics import (
    DEFAULT_CONFIG,
    T_FLOOR,
    NumericsConfig,
    differentiate,
    solve_monotone,
)
from .report import CheckResult, VerificationReport


@dataclass(frozen=True)
class ModelParams:
    """Ordered parameters ``beta`` with their admissible open intervals."""

    names: tuple[str, ...] = ()
    values: tuple[float, ...] = ()
    bounds: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if not (len(self.names) == len(self.values) == len(self.bounds)):
            raise ValueError("names, values and bounds must have the same length")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate parameter names in {self.names}")
        for name, value, (lo, hi) in zip(self.names, self.values, self.bounds):
            if not math.isfinite(value):
                raise DomainError(f"parameter {name}={value!r} is not finite")
            if not (lo < value < hi):
                raise DomainError(f"parameter {name}={value!r} outside its admissible interval ({lo}, {hi})")

    def __getitem__(self, name: str) -> float:
        try:
            return self.values[self.names.index(name)]
        except ValueError:
            raise KeyError(name) from None

    def __len__(self):
        return len(self.names)

    def bounds_of(self, name: str) -> tuple[float, float]:
        return self.bounds[self.names.index(name)]

    def replace(self, **changes: float) -> "ModelParams":
        unknown = set(changes) - set(self.names)
        if unknown:
            raise KeyError(", ".join(sorted(unknown)))
        values = tuple(float(changes.get(n, v)) for n, v in zip(self.names, self.values))
        return ModelParams(self.names, values, self.bounds)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values))


@dataclass(frozen=True)
class FundamentalRelation:
    """The map ``S_se(E, beta)`` of a closed nonreactive system.

    Equality and hashing use ``model_id``, ``constants`` and the parameter
    layout only, so two relations built from the same factory arguments
    compare equal even though their callables are distinct objects.
    """

    model_id: str
    s_se: Callable[[float, ModelParams], float] = field(compare=False, repr=False)
    e_ground: Callable[[ModelParams], float] = field(compare=False, repr=False)
    t_closed_form: Callable[[float, ModelParams], float] | None = field(default=None, compare=False, repr=False)
    constants: tuple[tuple[str, float], ...] = ()
    param_bounds: tuple[tuple[str, float, float], ...] = ()
    volume_param: str | None = None

    def params(self, **values: float) -> ModelParams:
        """Build a :class:`ModelParams` for this relation's parameter layout."""
        names = tuple(name for name, _, _ in self.param_bounds)
        missing = set(names) - set(values)
        extra = set(values) - set(names)
        if missing or extra:
            raise DomainError(
                f"{self.model_id}: expected parameters {sorted(names)}, got {sorted(values)}"
            )
        return ModelParams(
            names,
            tuple(float(values[n]) for n in names),
            tuple((lo, hi) for _, lo, hi in self.param_bounds),
        )

    def check_params(self, beta: ModelParams) -> None:
        expected = tuple(name for name, _, _ in self.param_bounds)
        if beta.names != expected:
            raise DomainError(f"{self.model_id}: parameters {beta.names} do not match layout {expected}")

    def ground(self, beta: ModelParams) -> float:
        return float(self.e_ground(beta))

    def entropy(self, E: float, beta: ModelParams) -> float:
        if not E > self.ground(beta):
            raise DomainError(f"{self.model_id}: E={E!r} is not above the ground-state energy {self.ground(beta)!r}")
        S = float(self.s_se(E, beta))
        if math.isnan(S):
            raise ModelInvariantError(f"{self.model_id}: entropy is NaN at E={E!r}")
        return S

    def temperature(self, E: float, beta: ModelParams, cfg: NumericsConfig = DEFAULT_CONFIG) -> float:
        """Closed-form temperature if available, else ``1 / (dS/dE)``."""
        e_ground = self.ground(beta)
        if not E > e_ground:
            raise DomainError(f"{self.model_id}: E={E!r} is not above the ground-state energy {e_ground!r}")
        if self.t_closed_form is not None:
            T = float(self.t_closed_form(E, beta))
        else:
            T = 1.0 / ds_de(self, beta, E, cfg)
        if not (T > 0 and math.isfinite(T)):
            raise ModelInvariantError(f"{self.model_id}: temperature {T!r} at E={E!r} is not positive and finite")
        return T


def ds_de(fr: FundamentalRelation, beta: ModelParams, E: float, cfg: NumericsConfig = DEFAULT_CONFIG) -> float:
    """Numerical ``dS_se/dE`` at fixed ``beta`` (never uses a closed-form T)."""
    e_ground = fr.ground(beta)
    d = differentiate(lambda e: fr.entropy(e, beta), E, cfg, scale=E - e_ground, lower=e_ground)
    if not d.value > 0:
        raise ModelInvariantError(f"{fr.model_id}: dS/dE = {d.value!r} <= 0 at E={E!r}")
    return d.value


def shift_energy_origin(fr: FundamentalRelation, offset: float) -> FundamentalRelation:
    """The same system with every energy shifted by ``offset``."""
    t = fr.t_closed_form
    return FundamentalRelation(
        model_id=fr.model_id,
        s_se=lambda E, beta: fr.s_se(E - offset, beta),
        e_ground=lambda beta: fr.e_ground(beta) + offset,
        t_closed_form=None if t is None else (lambda E, beta: t(E - offset, beta)),
        constants=fr.constants + (("energy_offset", float(offset)),),
        param_bounds=fr.param_bounds,
        volume_param=fr.volume_param,
    )


@dataclass(frozen=True)
class StableEqState:
    fr: FundamentalRelation
    E: float
    beta: ModelParams

    def __post_init__(self):
        self.fr.check_params(self.beta)
        if not math.isfinite(self.E):
            raise DomainError(f"{self.fr.model_id}: energy {self.E!r} is not finite")
        if not self.E > self.fr.ground(self.beta):
            raise DomainError(
                f"{self.fr.model_id}: E={self.E!r} is not above the ground-state energy {self.fr.ground(self.beta)!r}"
            )

    @property
    def model_id(self) -> str:
        return self.fr.model_id

    def with_energy(self, E: float) -> "StableEqState":
        return StableEqState(self.fr, float(E), self.beta)


@dataclass(frozen=True)
class NonEqState:
    """A non-equilibrium state with an assigned entropy below ``S_se(E, beta)``."""

    fr: FundamentalRelation
    E: float
    beta: ModelParams
    S_assigned: float

    def __post_init__(self):
        StableEqState(self.fr, self.E, self.beta)
        s_max = self.fr.entropy(self.E, self.beta)
        if not self.S_assigned < s_max:
            raise DomainError(
                f"{self.fr.model_id}: assigned entropy {self.S_assigned!r} is not below the "
                f"stable-equilibrium value {s_max!r} at E={self.E!r}"
            )

    @property
    def model_id(self) -> str:
        return self.fr.model_id

    def relaxed(self) -> StableEqState:
        """The stable equilibrium state with the same energy and parameters."""
        return StableEqState(self.fr, self.E, self.beta)


@dataclass(frozen=True)
class CompositeState:
    """A state of a composite system whose parts are separable and uncorrelated."""

    parts: tuple

    def __post_init__(self):
        if not self.parts:
            raise ValueError("a composite state needs at least one part")
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def E(self) -> float:
        return math.fsum(part.E for part in self.parts)

    @property
    def model_id(self) -> str:
        return "(" + ",".join(part.model_id for part in self.parts) + ")"

    def replace_part(self, index: int, state) -> "CompositeState":
        parts = list(self.parts)
        parts[index] = state
        return CompositeState(tuple(parts))


ThermoState = Union[StableEqState, NonEqState, CompositeState]


@dataclass(frozen=True)
class EntropyDelta:
    value: float
    abs_error_estimate: float
    quadrature_panels: int

    def __post_init__(self):
        if not self.abs_error_estimate >= 0:
            raise ValueError("abs_error_estimate must be non-negative")


def entropy_of(state: ThermoState) -> float:
    if isinstance(state, StableEqState):
        return state.fr.entropy(state.E, state.beta)
    if isinstance(state, NonEqState):
        return state.S_assigned
    if isinstance(state, CompositeState):
        return math.fsum(entropy_of(part) for part in state.parts)
    raise TypeError(f"not a thermodynamic state: {state!r}")


def temperature_of(state: StableEqState, cfg: NumericsConfig = DEFAULT_CONFIG) -> float:
    if not isinstance(state, StableEqState):
        raise TypeError("temperature is defined for stable equilibrium states only")
    return state.fr.temperature(state.E, state.beta, cfg)


def invert_fundamental(
    fr: FundamentalRelation,
    beta: ModelParams,
    S_target: float,
    cfg: NumericsConfig = DEFAULT_CONFIG,
    hint: float | None = None,
) -> float:
    """Energy of the stable equilibrium state with entropy ``S_target``.

    A bracket is grown geometrically in the distance from the ground state,
    starting at ``hint`` when given. The Brent solution is then polished
    by Newton steps ``E += (S_target - S(E)) * T(E)`` down to rounding.

    Raises :class:`BracketError` when ``S_target`` is outside the range of
    ``S_se(., beta)`` and :class:`ConvergenceError` when the final entropy
    residual exceeds ``cfg.entropy_tol`` (or rounding, for large S).
    """
    if not math.isfinite(S_target):
        raise BracketError(f"entropy target {S_target!r} is not finite")
    e_ground = fr.ground(beta)

    def s(E: float) -> float:
        return fr.entropy(E, beta)

    if hint is not None and hint > e_ground:
        d0 = hint - e_ground
    else:
        d0 = max(1.0, abs(e_ground))
    lo_d = hi_d = d0
    s0 = s(e_ground + d0)
    if s0 < S_target:
        for _ in range(400):
            lo_d = hi_d
            hi_d *= 2.0
            E_hi = e_ground + hi_d
            if not math.isfinite(E_hi):
                break
            if s(E_hi) >= S_target:
                break
        else:
            raise BracketError(f"{fr.model_id}: entropy {S_target!r} is above the reachable range")
        if not math.isfinite(e_ground + hi_d) or s(e_ground + hi_d) < S_target:
            raise BracketError(f"{fr.model_id}: entropy {S_target!r} is above the reachable range")
    elif s0 > S_target:
        for _ in range(400):
            hi_d = lo_d
            lo_d *= 0.5
            E_lo = e_ground + lo_d
            if not E_lo > e_ground:
                raise BracketError(f"{fr.model_id}: entropy {S_target!r} is below the reachable range")
            if s(E_lo) <= S_target:
                break
        else:
            raise BracketError(f"{fr.model_id}: entropy {S_target!r} is below the reachable range")
    else:
        return e_ground + d0

    E = solve_monotone(s, S_target, (e_ground + lo_d, e_ground + hi_d), cfg)

    rounding = 4 * 2.220446049250313e-16 * max(1.0, abs(S_target))
    residual = S_target - s(E)
    for _ in range(4):
        if abs(residual) <= rounding:
            break
        step = residual * fr.temperature(E, beta, cfg)
        candidate = E + step
        if not candidate > e_ground:
            break
        new_residual = S_target - s(candidate)
        if abs(new_residual) >= abs(residual):
            break
        E, residual = candidate, new_residual
    if abs(residual) > max(cfg.entropy_tol, rounding):
        raise ConvergenceError(f"{fr.model_id}: entropy residual {residual!r} at E={E!r} exceeds the tolerance")
    return E


def validate_model(
    fr: FundamentalRelation,
    beta: ModelParams,
    E_grid: Sequence[float],
    cfg: NumericsConfig = DEFAULT_CONFIG,
) -> VerificationReport:
    """Audit a model's structural requirements on a sorted energy grid.

    Entries (failures are entries, never exceptions):

    ``grid-domain``       grid sorted and strictly above the ground state
    ``S-monotone``        smallest increment of S along the grid (must be > 0)
    ``T-positive``        smallest temperature on the grid (must exceed the floor)
    ``T-monotone``        smallest increment of T along the grid (must be > 0)
    ``T-ground-limit``    log-log slope of T against distance from the ground
                          state over the last probed decade (must be > 0, so T -> 0)

    Metrics ``min_dT_dE`` / ``max_dT_dE`` summarize the slope of T(E).
    """
    grid = [float(e) for e in E_grid]
    e_ground = fr.ground(beta)
    entries: list[CheckResult] = []
    metrics: dict[str, float] = {}

    in_domain = all(e > e_ground for e in grid) and all(b > a for a, b in zip(grid, grid[1:]))
    entries.append(CheckResult("grid-domain", in_domain, 0.0 if in_domain else 1.0, 0.0, len(grid)))
    if not in_domain or len(grid) < 2:
        detail = "grid must hold at least two sorted energies above the ground state"
        for check_id in ("S-monotone", "T-positive", "T-monotone", "T-ground-limit"):
            entries.append(CheckResult(check_id, False, math.nan, 0.0, 0, detail))
        return VerificationReport(entries, metrics)

    S = [fr.entropy(e, beta) for e in grid]
    dS = [b - a for a, b in zip(S, S[1:])]
    worst_dS = min(dS)
    entries.append(CheckResult("S-monotone", worst_dS > 0, worst_dS, 0.0, len(dS)))

    T: list[float] = []
    t_error = ""
    try:
        T = [fr.temperature(e, beta, cfg) for e in grid]
    except ModelInvariantError as exc:
        t_error = str(exc)
    if t_error:
        for check_id in ("T-positive", "T-monotone", "T-ground-limit"):
            entries.append(CheckResult(check_id, False, math.nan, T_FLOOR, 0, t_error))
        return VerificationReport(entries, metrics)

    min_T = min(T)
    entries.append(CheckResult("T-positive", min_T > T_FLOOR, min_T, T_FLOOR, len(T)))
    dT = [b - a for a, b in zip(T, T[1:])]
    worst_dT = min(dT)
    entries.append(CheckResult("T-monotone", worst_dT > 0, worst_dT, 0.0, len(dT)))
    slopes = [t / (b - a) for t, a, b in zip(dT, grid, grid[1:])]
    metrics["min_dT_dE"] = min(slopes)
    metrics["max_dT_dE"] = max(slopes)

    # probe the approach to the ground state one decade at a time
    d0 = grid[0] - e_ground
    probes = [d0 * 10.0**-k for k in range(0, 7)]
    try:
        T_probe = [fr.temperature(e_ground + d, beta, cfg) for d in probes]
        decreasing = all(b < a for a, b in zip(T_probe, T_probe[1:]))
        slope = math.log(T_probe[-2] / T_probe[-1]) / math.log(10.0)
        ok = decreasing and slope > 1e-6
        entries.append(CheckResult("T-ground-limit", ok, slope, 1e-6, len(probes)))
    except (ModelInvariantError, DomainError, ValueError, ZeroDivisionError) as exc:
        entries.append(CheckResult("T-ground-limit", False, math.nan, 1e-6, len(probes), str(exc)))
    return VerificationReport(entries, metrics)
