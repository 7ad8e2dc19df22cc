"""Quasi-static daily simulation of the PV chain with and without the PMS.

Each sample is an independent steady state: the panel sits at its
maximum power point, the PMS (when fitted) routes or boosts its output,
the charge controller harvests what lies inside its input window, and
the load takes priority over the battery.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .boost import LossModel, default_empirical
from .errors import GridMismatch, PvPmsError, SampleError, Unreachable
from .pms import OPEN_LOAD_OHM, PmsConfig, PmsState, Route, pms_step
from .pv_model import DAYTIME_CELL_TEMP, PVModuleParams, default_panel, mpp

log = logging.getLogger(__name__)

DAY_START_MIN = 480
DAY_END_MIN = 1080
STEP_MIN = 5
G_MAX = 1400.0


@dataclass(frozen=True)
class IrradianceProfile:
    """Irradiance samples on a uniform time-of-day grid (minutes after midnight)."""

    samples: tuple[float, ...]
    start: int = DAY_START_MIN
    step: int = STEP_MIN

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(float(g) for g in self.samples))
        if not self.samples:
            raise ValueError("profile needs at least one sample")
        if self.step <= 0:
            raise ValueError("profile step must be positive")
        if any(g < 0 or not math.isfinite(g) for g in self.samples):
            raise ValueError("irradiance samples must be finite and non-negative")

    @property
    def end(self) -> int:
        return self.start + self.step * (len(self.samples) - 1)

    @property
    def times(self) -> tuple[int, ...]:
        return tuple(self.start + k * self.step for k in range(len(self.samples)))

    @classmethod
    def constant(cls, g: float, start: int = DAY_START_MIN, end: int = DAY_END_MIN, step: int = STEP_MIN):
        return cls(tuple([g] * (1 + (end - start) // step)), start, step)


@dataclass(frozen=True)
class MpptControllerModel:
    v_in_min: float = 31.0
    v_in_max: float = 50.0
    eta: float = 0.97
    battery_v: float = 24.0
    battery_capacity_wh: float = 2400.0
    initial_soc_wh: float = 1200.0
    load_p: float = 60.0

    def __post_init__(self):
        if not self.v_in_min < self.v_in_max:
            raise ValueError("need v_in_min < v_in_max")
        if not 0 < self.eta <= 1:
            raise ValueError("controller eta must lie in (0, 1]")
        if self.load_p < 0 or self.battery_capacity_wh < 0:
            raise ValueError("load_p and battery capacity must be non-negative")
        if not 0 <= self.initial_soc_wh <= self.battery_capacity_wh:
            raise ValueError("initial_soc_wh must lie within the battery capacity")


class Scenario(str, enum.Enum):
    MPPT_ONLY = "MPPT_ONLY"
    WITH_PMS = "WITH_PMS"


@dataclass(frozen=True)
class PowerSample:
    t: int
    g: float
    v_mpp: float
    p_mpp: float
    route: Route
    v_to_mppt: float
    p_delivered: float
    p_load: float
    p_battery: float
    p_curtailed: float = 0.0


@dataclass(frozen=True)
class Dispatch:
    p_load: float
    p_battery: float
    p_curtailed: float


@dataclass(frozen=True)
class DayResult:
    scenario: Scenario
    samples: tuple[PowerSample, ...]
    hourly_avg: tuple[tuple[str, float], ...]
    avg_power: float
    energy_wh: float

    @property
    def times(self) -> tuple[int, ...]:
        return tuple(s.t for s in self.samples)

    def delivered(self) -> np.ndarray:
        return np.array([s.p_delivered for s in self.samples])


@dataclass(frozen=True)
class Comparison:
    avg_a: float
    avg_b: float
    gain_pct: float


def hour_label(hour: int) -> str:
    """Clock label in the style ``8 AM``, ``12 NN``, ``5 PM``."""
    if hour == 12:
        return "12 NN"
    if hour in (0, 24):
        return "12 MN"
    return f"{hour % 12} {'AM' if hour < 12 else 'PM'}"


def parse_hour(label: str | int) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label)
    text = str(label).strip().upper()
    if text.isdigit():
        return int(text)
    num, _, suffix = text.partition(" ")
    h = int(num)
    if suffix == "NN":
        return 12
    if suffix == "MN":
        return 0
    if suffix == "AM":
        return 0 if h == 12 else h
    if suffix == "PM":
        return h if h == 12 else h + 12
    raise ValueError(f"unrecognised hour label {label!r}")


def hour_buckets(times: Sequence[int]) -> list[int]:
    """Clock hour of each sample; a terminal sample exactly on the hour joins the previous hour."""
    hours = [t // 60 for t in times]
    if len(times) > 1 and times[-1] % 60 == 0:
        hours[-1] -= 1
    return hours


def mppt_harvest(v_avail: float, p_avail: float, ctrl: MpptControllerModel = MpptControllerModel()) -> float:
    """Power the charge controller delivers from an input at ``v_avail``.

    Outside the controller's input window it stays idle.
    """
    if v_avail < 0 or p_avail < 0:
        raise ValueError("v_avail and p_avail must be non-negative")
    if ctrl.v_in_min <= v_avail <= ctrl.v_in_max:
        return p_avail * ctrl.eta
    return 0.0


def dispatch(
    p_delivered: float,
    ctrl: MpptControllerModel,
    battery_soc_wh: float,
    dt_h: float = 0.0,
) -> Dispatch:
    """Split delivered power between the load (first) and the battery.

    With ``dt_h > 0`` battery charging is also limited to the remaining
    headroom over the step; excess is curtailed.
    """
    if p_delivered < 0:
        raise ValueError("p_delivered must be non-negative")
    if not 0 <= battery_soc_wh <= ctrl.battery_capacity_wh:
        raise ValueError("battery state of charge outside [0, capacity]")
    p_load = min(p_delivered, ctrl.load_p)
    excess = p_delivered - p_load
    headroom = ctrl.battery_capacity_wh - battery_soc_wh
    if headroom <= 0:
        p_battery = 0.0
    elif dt_h > 0:
        p_battery = min(excess, headroom / dt_h)
    else:
        p_battery = excess
    return Dispatch(p_load, p_battery, excess - p_battery)


def _hourly(samples: Sequence[PowerSample]) -> tuple[tuple[str, float], ...]:
    hours = hour_buckets([s.t for s in samples])
    sums: dict[int, list[float]] = {}
    for h, s in zip(hours, samples):
        sums.setdefault(h, []).append(s.p_delivered)
    return tuple((hour_label(h), float(np.mean(v))) for h, v in sums.items())


def simulate_day(
    profile: IrradianceProfile,
    scenario: Scenario | str,
    panel: PVModuleParams | None = None,
    pms: PmsConfig | None = None,
    loss: LossModel | None = None,
    ctrl: MpptControllerModel | None = None,
    temperature: float = DAYTIME_CELL_TEMP,
) -> DayResult:
    """Run one scenario over the profile; deterministic for fixed inputs."""
    scenario = Scenario(scenario)
    panel = panel if panel is not None else default_panel()
    pms = pms if pms is not None else PmsConfig()
    loss = loss if loss is not None else default_empirical()
    ctrl = ctrl if ctrl is not None else MpptControllerModel()
    dt_h = profile.step / 60.0

    state: PmsState | None = None
    soc = ctrl.initial_soc_wh
    out = []
    for k, (t, g) in enumerate(zip(profile.times, profile.samples)):
        try:
            op = mpp(g, temperature, panel)
            v_mpp, p_mpp = op.v, op.p
            if scenario is Scenario.MPPT_ONLY:
                route, v_in, p_in = Route.DIRECT, v_mpp, p_mpp
            else:
                r_equiv = pms.v_target**2 / p_mpp if p_mpp > 0 else OPEN_LOAD_OHM
                step = pms_step(v_mpp, p_mpp, state, pms, loss, r_equiv)
                state = step.state
                route, v_in, p_in = step.state.route, step.v_to_mppt, step.p_to_mppt
            p_del = mppt_harvest(v_in, p_in, ctrl)
            split = dispatch(p_del, ctrl, soc, dt_h)
        except PvPmsError as exc:
            raise SampleError(k, t, exc) from exc
        soc = min(soc + split.p_battery * dt_h, ctrl.battery_capacity_wh)
        out.append(
            PowerSample(t, g, v_mpp, p_mpp, route, v_in, p_del, split.p_load, split.p_battery, split.p_curtailed)
        )

    delivered = np.array([s.p_delivered for s in out])
    hours = np.array(profile.times, dtype=float) / 60.0
    energy = float(np.trapezoid(delivered, hours)) if len(out) > 1 else 0.0
    return DayResult(scenario, tuple(out), _hourly(out), float(delivered.mean()), energy)


def compare(a: DayResult, b: DayResult) -> Comparison:
    """Average power of both runs and the relative gain of ``b`` over ``a`` in percent."""
    if a.times != b.times:
        raise GridMismatch("day results are on different time grids")
    return Comparison(a.avg_power, b.avg_power, gain_pct(a.avg_power, b.avg_power))


def gain_pct(avg_a: float, avg_b: float) -> float:
    if avg_a == 0:
        return 0.0 if avg_b == 0 else math.inf
    return 100.0 * (avg_b - avg_a) / avg_a


def _irradiance_for_power(target_w, panel, ctrl, temperature, g_max):
    """Irradiance whose maximum power, after controller efficiency, equals ``target_w``."""
    if target_w <= 0:
        return 0.0
    cap = mpp(g_max, temperature, panel).p * ctrl.eta
    if target_w > cap:
        raise Unreachable(f"{target_w:.2f} W exceeds panel capability {cap:.2f} W", target=target_w)
    return brentq(
        lambda g: mpp(g, temperature, panel).p * ctrl.eta - target_w,
        0.0,
        g_max,
        xtol=1e-6,
    )


def derive_profile(
    hourly_powers: Sequence[tuple[int | str, float]],
    panel: PVModuleParams | None = None,
    ctrl: MpptControllerModel | None = None,
    temperature: float = DAYTIME_CELL_TEMP,
    start: int = DAY_START_MIN,
    end: int = DAY_END_MIN,
    step: int = STEP_MIN,
    g_max: float = G_MAX,
    max_sweeps: int = 20,
    rtol: float = 1e-4,
) -> IrradianceProfile:
    """Reconstruct an irradiance day from hourly average controller output.

    Each hour's irradiance is placed at the mid-time of its samples and
    linearly interpolated onto the grid; beyond the first and last hour
    the end slopes continue (floored at zero), giving morning and sunset
    ramps. Interpolation between unequal hours biases the hourly
    means, so each hour's irradiance is then re-solved, hour by hour,
    until the simulated hourly means of the controller-only chain match
    the input.

    Raises
    ------
    Unreachable
        If an hour asks for more than the panel gives at ``g_max``.
    """
    panel = panel if panel is not None else default_panel()
    ctrl = ctrl if ctrl is not None else MpptControllerModel()
    key = tuple((parse_hour(h), float(p)) for h, p in hourly_powers)
    if any(p < 0 for _, p in key):
        raise ValueError("hourly powers must be non-negative")
    samples = _derive(key, panel, ctrl, float(temperature), start, end, step, float(g_max), max_sweeps, rtol)
    return IrradianceProfile(samples, start, step)


def _ramp_interp(x, xp, fp):
    """Linear interpolation that keeps the end slopes beyond the outer nodes, floored at zero."""
    y = np.interp(x, xp, fp)
    if len(xp) > 1:
        lo, hi = x < xp[0], x > xp[-1]
        y[lo] = fp[0] + (x[lo] - xp[0]) * (fp[1] - fp[0]) / (xp[1] - xp[0])
        y[hi] = fp[-1] + (x[hi] - xp[-1]) * (fp[-1] - fp[-2]) / (xp[-1] - xp[-2])
    return np.maximum(y, 0.0)


@lru_cache(maxsize=32)
def _derive(key, panel, ctrl, temperature, start, end, step, g_max, max_sweeps, rtol):
    times = np.arange(start, end + 1, step)
    buckets = np.array(hour_buckets(list(times)))
    hours = [h for h, _ in key]
    targets = [p for _, p in key]
    missing = set(buckets.tolist()) - set(hours)
    if missing:
        raise ValueError(f"no hourly power given for hours {sorted(missing)}")
    centers = np.array([times[buckets == h].mean() if np.any(buckets == h) else h * 60 + 30 for h in hours])
    order = np.argsort(centers)
    members = [np.flatnonzero(buckets == h) for h in hours]

    harvest_cache: dict[float, float] = {}

    def harvest(g):
        if g not in harvest_cache:
            op = mpp(g, temperature, panel)
            harvest_cache[g] = mppt_harvest(op.v, op.p, ctrl)
        return harvest_cache[g]

    nodes = np.empty(len(key))
    for j, (h, p) in enumerate(key):
        try:
            nodes[j] = _irradiance_for_power(p, panel, ctrl, temperature, g_max)
        except Unreachable as exc:
            raise Unreachable(f"hour {hour_label(h)}: {exc}", target=p, hour=h) from exc

    def profile_for(nodes):
        return _ramp_interp(times, centers[order], nodes[order])

    def bucket_mean(j, nodes):
        if members[j].size == 0:
            return 0.0
        profile = profile_for(nodes)
        return float(np.mean([harvest(float(g)) for g in profile[members[j]]]))

    def worst_error(nodes):
        errs = [abs(bucket_mean(j, nodes) / t - 1.0) for j, t in enumerate(targets) if t > 0]
        return max(errs, default=0.0)

    # Gauss-Seidel sweeps: each hour's mean is monotone in its own node, so
    # bracket that node against the hour's target with the neighbours held.
    for _ in range(max_sweeps):
        if worst_error(nodes) < rtol:
            break
        for j, target in enumerate(targets):
            if target <= 0 or members[j].size == 0:
                continue
            trial = nodes.copy()

            def miss(g):
                trial[j] = g
                return bucket_mean(j, trial) - target

            if miss(0.0) >= 0:
                nodes[j] = 0.0
            elif miss(g_max) <= 0:
                nodes[j] = g_max
            else:
                nodes[j] = brentq(miss, 0.0, g_max, xtol=1e-7, rtol=1e-12)
    else:
        log.warning("profile refinement stopped after %d sweeps (max rel err %.2e)", max_sweeps, worst_error(nodes))
    return tuple(float(g) for g in np.maximum(profile_for(nodes), 0.0))
