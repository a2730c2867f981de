"""Numerical kernels shared by the measurement procedures.

* :func:`integrate_inverse_T` -- adaptive Gauss-Kronrod (7/15) quadrature of 1/T
* :func:`solve_monotone` -- bracketed root finding for strictly monotone maps
* :func:`differentiate` -- central differences with Richardson extrapolation
"""

from __future__ import annotations

import dataclasses
import heapq
import math
from dataclasses import dataclass
from typing import Any, Callable, Mapping

from scipy.optimize import brentq

from .errors import (
    BracketError,
    ConvergenceError,
    ModelInvariantError,
    NonIntegrableEndpointError,
)

#: temperatures at or below this value (model units) count as vanishing
T_FLOOR = 1e-12
#: endpoints closer than this (relative to the interval scale) to the ground state are rejected
GROUND_MARGIN = 1e-6
#: smallest finite-difference step ever used
MIN_STEP = 1e-9

_EPS = 2.220446049250313e-16


@dataclass(frozen=True)
class NumericsConfig:
    quad_rel_tol: float = 1e-10
    quad_abs_tol: float = 1e-12
    root_tol: float = 1e-12
    deriv_initial_step: float = 1e-3
    max_refinements: int = 30
    richardson_levels: int = 4
    entropy_tol: float = 1e-10

    def __post_init__(self):
        for name in ("quad_rel_tol", "quad_abs_tol", "root_tol", "deriv_initial_step", "entropy_tol"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if int(self.max_refinements) != self.max_refinements or self.max_refinements < 1:
            raise ValueError(f"max_refinements must be a positive integer, got {self.max_refinements!r}")
        if int(self.richardson_levels) != self.richardson_levels or self.richardson_levels < 2:
            raise ValueError(f"richardson_levels must be an integer >= 2, got {self.richardson_levels!r}")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any] | None, base: "NumericsConfig | None" = None) -> "NumericsConfig":
        """Build a config from ``base`` overridden by the keys of ``data``.

        Unknown keys raise ``ValueError`` so that typos in scenario files
        do not pass silently.
        """
        base = base or cls()
        if not data:
            return base
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown numerics keys: {', '.join(unknown)}")
        return dataclasses.replace(base, **dict(data))

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


DEFAULT_CONFIG = NumericsConfig()


# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (non-negative half).
_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
# Gauss weights for the odd-indexed Kronrod nodes _XGK[1], _XGK[3], _XGK[5], _XGK[7].
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


def gauss_kronrod_15(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    """Apply the 15-point Kronrod rule on ``[a, b]``.

    Returns the Kronrod estimate and ``|K15 - G7|`` as its error estimate.
    """
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fc = f(center)
    kronrod = _WGK[7] * fc
    gauss = _WG[3] * fc
    for j in range(7):
        dx = half * _XGK[j]
        fsum = f(center - dx) + f(center + dx)
        kronrod += _WGK[j] * fsum
        if j % 2 == 1:
            gauss += _WG[j // 2] * fsum
    kronrod *= half
    gauss *= half
    return kronrod, abs(kronrod - gauss)


def adaptive_gk15(
    f: Callable[[float], float],
    a: float,
    b: float,
    cfg: NumericsConfig = DEFAULT_CONFIG,
) -> tuple[float, float, int]:
    """Globally adaptive quadrature of ``f`` over ``[a, b]`` with ``a < b``.

    The panel with the largest error estimate is bisected until the summed
    estimate meets ``max(quad_abs_tol, quad_rel_tol * |value|)``. Ties are
    broken by panel creation order, so the refinement sequence is fully
    deterministic. A panel may be bisected at most ``max_refinements``
    times; hitting that depth raises :class:`ConvergenceError`.

    Returns ``(value, error_estimate, panel_count)``.
    """
    value, err = gauss_kronrod_15(f, a, b)
    # heap entries: (-err, creation index, a, b, value, err, depth)
    heap = [(-err, 0, a, b, value, err, 0)]
    counter = 1
    total_value = value
    total_err = err
    while total_err > max(cfg.quad_abs_tol, cfg.quad_rel_tol * abs(total_value)):
        _, _, pa, pb, pval, perr, depth = heapq.heappop(heap)
        if depth >= cfg.max_refinements:
            raise ConvergenceError(
                f"quadrature did not converge on [{a!r}, {b!r}]: "
                f"error estimate {total_err:.3e} after {len(heap) + 1} panels"
            )
        mid = 0.5 * (pa + pb)
        lval, lerr = gauss_kronrod_15(f, pa, mid)
        rval, rerr = gauss_kronrod_15(f, mid, pb)
        heapq.heappush(heap, (-lerr, counter, pa, mid, lval, lerr, depth + 1))
        heapq.heappush(heap, (-rerr, counter + 1, mid, pb, rval, rerr, depth + 1))
        counter += 2
        # re-sum instead of updating incrementally to avoid drift
        total_value = math.fsum(item[4] for item in heap)
        total_err = math.fsum(item[5] for item in heap)
    return total_value, total_err, len(heap)


def integrate_inverse_T(fr, beta, E1: float, E2: float, cfg: NumericsConfig = DEFAULT_CONFIG):
    """Signed integral of ``1/T(E, beta)`` from ``E1`` to ``E2``.

    ``fr`` is a :class:`~axiotherm.core.FundamentalRelation`. Endpoints
    within ``GROUND_MARGIN`` (relative to the interval scale) of the ground
    state are rejected rather than regularized.
    """
    from .core import EntropyDelta

    if not (math.isfinite(E1) and math.isfinite(E2)):
        raise ValueError(f"non-finite integration limits {E1!r}, {E2!r}")
    if E1 == E2:
        return EntropyDelta(0.0, 0.0, 0)
    lo, hi = (E1, E2) if E1 < E2 else (E2, E1)
    e_ground = fr.ground(beta)
    scale = max(abs(lo), abs(hi), abs(e_ground))
    if lo - e_ground <= GROUND_MARGIN * scale:
        raise NonIntegrableEndpointError(
            f"{fr.model_id}: endpoint {lo!r} is at or too close to the ground-state energy {e_ground!r}"
        )

    def integrand(E: float) -> float:
        T = fr.temperature(E, beta, cfg)
        if not (T > T_FLOOR) or not math.isfinite(T):
            raise ModelInvariantError(f"{fr.model_id}: temperature {T!r} is not positive at E={E!r}")
        return 1.0 / T

    value, err, panels = adaptive_gk15(integrand, lo, hi, cfg)
    if E2 < E1:
        value = -value
    return EntropyDelta(value, err, panels)


def solve_monotone(
    f: Callable[[float], float],
    target: float,
    bracket: tuple[float, float],
    cfg: NumericsConfig = DEFAULT_CONFIG,
) -> float:
    """Solve ``f(x) = target`` for a strictly monotone ``f`` on ``bracket``.

    Brent's method (bisection / secant / inverse quadratic interpolation)
    with relative tolerance ``cfg.root_tol``. The midpoint is evaluated
    first: an exact hit is returned as-is, and a midpoint value outside the
    range spanned by the endpoints is reported as a monotonicity violation.
    """
    a, b = float(bracket[0]), float(bracket[1])
    if a > b:
        a, b = b, a

    def g(x: float) -> float:
        value = f(x) - target
        if math.isnan(value):
            raise ModelInvariantError(f"function is not finite at x={x!r}")
        return value

    ga, gb = g(a), g(b)
    if ga == 0.0:
        return a
    if gb == 0.0:
        return b
    if (ga > 0) == (gb > 0):
        raise BracketError(f"bracket [{a!r}, {b!r}] does not straddle target {target!r} (residuals {ga!r}, {gb!r})")
    mid = 0.5 * (a + b)
    gm = g(mid)
    if gm == 0.0:
        return mid
    if not (min(ga, gb) < gm < max(ga, gb)):
        raise ModelInvariantError(
            f"function is not monotone on [{a!r}, {b!r}]: midpoint residual {gm!r} outside ({ga!r}, {gb!r})"
        )
    lo, hi = (a, mid) if (ga > 0) != (gm > 0) else (mid, b)
    try:
        return brentq(g, lo, hi, xtol=1e-300, rtol=max(cfg.root_tol, 4 * _EPS), maxiter=400)
    except RuntimeError as exc:
        raise ConvergenceError(str(exc)) from exc


@dataclass(frozen=True)
class Derivative:
    """A numerical derivative with its Richardson error estimate."""

    value: float
    error: float
    one_sided: bool = False


def differentiate(
    f: Callable[[float], float],
    x: float,
    cfg: NumericsConfig = DEFAULT_CONFIG,
    *,
    scale: float | None = None,
    lower: float | None = None,
    upper: float | None = None,
) -> Derivative:
    """Richardson-extrapolated finite-difference derivative of ``f`` at ``x``.

    The initial step is ``deriv_initial_step * scale`` (``scale`` defaults
    to ``|x|``), floored at ``MIN_STEP``. If the symmetric neighborhood
    leaves the open domain ``(lower, upper)`` a one-sided scheme is used
    and the result is flagged ``one_sided``.
    """
    base = abs(x) if scale is None else abs(scale)
    h = max(cfg.deriv_initial_step * base, MIN_STEP)
    lo_ok = lower is None or x - h > lower
    hi_ok = upper is None or x + h < upper

    if lo_ok and hi_ok:
        def estimate(step):
            return (f(x + step) - f(x - step)) / (2.0 * step)
        order_step = 2
        one_sided = False
    else:
        room_hi = math.inf if upper is None else upper - x
        room_lo = math.inf if lower is None else x - lower
        direction = 1.0 if room_hi >= room_lo else -1.0
        room = max(room_hi, room_lo)
        if not room > 0:
            raise ValueError(f"no room to differentiate at x={x!r}")
        h = min(h, 0.5 * room)
        # close to a bound the function varies on the scale of the distance to it,
        # so the relative step is taken of that distance (the absolute floor is dropped)
        blocked = min(room_hi, room_lo)
        if blocked > 0:
            h = min(h, cfg.deriv_initial_step * blocked)
        fx = f(x)

        def estimate(step):
            return (f(x + direction * step) - fx) / (direction * step)
        order_step = 1
        one_sided = True

    levels = int(cfg.richardson_levels)
    # Neville tableau, halving the step at each level
    prev_row = [estimate(h)]
    best, error = prev_row[0], math.inf
    for i in range(1, levels):
        row = [estimate(h / 2**i)]
        for k in range(1, i + 1):
            factor = 2.0 ** (order_step * k) - 1.0
            row.append(row[k - 1] + (row[k - 1] - prev_row[k - 1]) / factor)
        error = abs(row[i] - prev_row[i - 1])
        best = row[i]
        prev_row = row
    return Derivative(best, error, one_sided)
