"""Routing state machine of the power management stage.

Panel voltages inside the boost window are lifted to the controller's
working voltage through the converter; everything else passes straight
through the relay. A hysteresis band around both window edges keeps the
relay from chattering.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

from .boost import LossModel, AnalyticLoss, regulate, solve_steady_state
from .errors import Unreachable

log = logging.getLogger(__name__)

OPEN_LOAD_OHM = 1e6


class Route(str, enum.Enum):
    DIRECT = "DIRECT"
    BOOST = "BOOST"


@dataclass(frozen=True)
class PmsConfig:
    v_low: float = 10.0
    v_high: float = 35.0
    v_target: float = 35.0
    hysteresis: float = 0.5

    def __post_init__(self):
        if not 0 < self.v_low < self.v_high:
            raise ValueError("need 0 < v_low < v_high")
        if self.hysteresis < 0:
            raise ValueError("hysteresis must be non-negative")
        if self.v_target < self.v_high - self.hysteresis:
            raise ValueError("v_target must be at least v_high - hysteresis")


@dataclass(frozen=True)
class PmsState:
    route: Route = Route.DIRECT
    duty: float = 0.0
    level: int = 0

    def __post_init__(self):
        if self.route is Route.DIRECT and (self.duty != 0.0 or self.level != 0):
            raise ValueError("DIRECT route carries zero duty")


@dataclass(frozen=True)
class PmsOutput:
    v_to_mppt: float
    p_to_mppt: float
    state: PmsState
    fault: str | None = None


def route_decision(v_pv: float, prev: Route | None, cfg: PmsConfig = PmsConfig()) -> Route:
    """Pick the relay route for panel voltage ``v_pv``.

    ``prev=None`` is a fresh power-up with no history: the plain half-open
    window ``[v_low, v_high)`` decides. Otherwise a route flips only once
    the voltage has crossed into the other route's band by more than the
    hysteresis.
    """
    if v_pv < 0:
        raise ValueError("v_pv must be non-negative")
    h = cfg.hysteresis
    if prev is None:
        inside = cfg.v_low <= v_pv < cfg.v_high
    elif prev is Route.DIRECT:
        inside = cfg.v_low + h <= v_pv < cfg.v_high - h
    else:
        inside = cfg.v_low - h <= v_pv < cfg.v_high + h
    return Route.BOOST if inside else Route.DIRECT


def pms_step(
    v_pv: float,
    available_p: float,
    prev: PmsState | None,
    cfg: PmsConfig,
    model: LossModel,
    r_equiv: float,
) -> PmsOutput:
    """Advance the state machine by one sample.

    The DIRECT path is lossless. On the BOOST path the converter is
    regulated toward ``cfg.v_target`` and power is scaled by its
    efficiency at the panel voltage. If regulation cannot reach the
    target the relay falls back to DIRECT and ``fault`` says why.
    """
    if available_p < 0:
        raise ValueError("available_p must be non-negative")
    route = route_decision(v_pv, prev.route if prev is not None else None, cfg)
    if route is Route.DIRECT:
        return PmsOutput(v_pv, available_p, PmsState())

    r_load = r_equiv if r_equiv > 0 else OPEN_LOAD_OHM
    if v_pv >= cfg.v_target:
        # Hysteresis overlap above the target: converter idles at zero duty.
        sol = solve_steady_state(v_pv, 0.0, r_load, model)
        return PmsOutput(sol.vout, available_p * _efficiency(model, v_pv, 0.0, r_load), PmsState(Route.BOOST))

    start = prev.level if prev is not None and prev.route is Route.BOOST else 0
    try:
        reg = regulate(v_pv, cfg.v_target, r_load, model, start_level=start)
    except Unreachable as exc:
        log.warning("boost regulation failed at v_pv=%.3f V, routing DIRECT: %s", v_pv, exc)
        return PmsOutput(v_pv, available_p, PmsState(), fault=str(exc))
    eta = _efficiency(model, v_pv, reg.duty, r_load)
    return PmsOutput(reg.vout, available_p * eta, PmsState(Route.BOOST, reg.duty, reg.level))


def _efficiency(model: LossModel, v_pv: float, duty: float, r_load: float) -> float:
    if isinstance(model, AnalyticLoss):
        return min(solve_steady_state(v_pv, duty, r_load, model).eta, 1.0)
    return model.efficiency(v_pv)
