"""Steady-state lossy boost converter and its PWM regulation loop.

Two loss descriptions are supported. ``EmpiricalLoss`` interpolates a
measured (input voltage, efficiency) table and is the reference for
system simulation. ``AnalyticLoss`` solves the averaged circuit with
parasitic resistances, a diode drop and a fixed overhead; it is fitted
to the bench table with :func:`fit_analytic_params`.
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import DutyOutOfRange, NonConvergence, SingularFit, Unreachable

MAX_DUTY = 0.95
PWM_FREQ_HZ = 32_500.0
STOCK_PWM_FREQ_HZ = 500.0
DUTY_STEPS = 255
BENCH_LOAD_OHM = 100.0
TARGET_VOUT = 35.0
MAX_FIXED_POINT_STEPS = 10_000
UNREACHABLE_BAND_V = 2.0


@dataclass(frozen=True)
class BoostParams:
    v_diode: float = 0.0
    r_switch: float = 0.0
    r_inductor: float = 0.0
    p_fixed: float = 0.0
    f_sw: float = PWM_FREQ_HZ
    duty_steps: int = DUTY_STEPS

    def __post_init__(self):
        if min(self.r_switch, self.r_inductor, self.p_fixed) < 0:
            raise ValueError("resistances and fixed loss must be non-negative")
        if not 0.0 <= self.v_diode <= 1.2:
            raise ValueError("v_diode must lie in [0, 1.2] V")
        if self.f_sw <= 0 or self.duty_steps < 2:
            raise ValueError("need f_sw > 0 and duty_steps >= 2")


@dataclass(frozen=True)
class ConverterSolution:
    vout: float
    p_in: float
    p_out: float
    eta: float


def ideal_vout(vin: float, duty: float) -> float:
    """Lossless continuous-conduction boost gain ``vin / (1 - duty)``."""
    _check_duty(duty)
    return vin / (1.0 - duty)


def _check_duty(duty):
    if not 0.0 <= duty <= MAX_DUTY:
        raise DutyOutOfRange(f"duty {duty} outside [0, {MAX_DUTY}]")


@dataclass(frozen=True)
class EmpiricalLoss:
    """Efficiency interpolated linearly in input voltage, clamped at the table ends."""

    vin: tuple[float, ...]
    eta: tuple[float, ...]
    duty_steps: int = DUTY_STEPS

    def __post_init__(self):
        if len(self.vin) != len(self.eta) or not self.vin:
            raise ValueError("efficiency table needs matching, non-empty columns")
        if any(b <= a for a, b in zip(self.vin, self.vin[1:])):
            raise ValueError("efficiency table vin must be strictly increasing")
        if any(not 0.0 < e <= 1.0 for e in self.eta):
            raise ValueError("efficiencies must lie in (0, 1]")

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[float, float]], **kwargs) -> "EmpiricalLoss":
        pairs = sorted((float(v), float(e)) for v, e in rows)
        return cls(tuple(v for v, _ in pairs), tuple(e for _, e in pairs), **kwargs)

    def efficiency(self, vin: float) -> float:
        xs, ys = self.vin, self.eta
        if vin <= xs[0]:
            return ys[0]
        if vin >= xs[-1]:
            return ys[-1]
        k = bisect.bisect_right(xs, vin)
        x0, x1 = xs[k - 1], xs[k]
        if vin == x0:
            return ys[k - 1]
        w = (vin - x0) / (x1 - x0)
        return ys[k - 1] + w * (ys[k] - ys[k - 1])

    def solve(self, vin: float, duty: float, r_load: float) -> ConverterSolution:
        vout = ideal_vout(vin, duty)
        eta = self.efficiency(vin)
        p_out = vout * vout / r_load
        return ConverterSolution(vout, p_out / eta, p_out, eta)


@dataclass(frozen=True)
class AnalyticLoss:
    """Averaged boost circuit with conduction, diode and fixed losses."""

    params: BoostParams = field(default_factory=BoostParams)

    @property
    def duty_steps(self) -> int:
        return self.params.duty_steps

    def solve(self, vin: float, duty: float, r_load: float, tol: float = 1e-7) -> ConverterSolution:
        p = self.params
        off = 1.0 - duty
        r_path = p.r_inductor + duty * p.r_switch
        # Loop gain of the plain iteration; under-relax so the map contracts past the knee.
        gain = r_path / (off * off * r_load)
        relax = 1.0 / (1.0 + gain)
        vout = vin / off
        for _ in range(MAX_FIXED_POINT_STEPS):
            i_l = vout / (off * r_load)
            update = max((vin - i_l * r_path) / off - p.v_diode, 0.0)
            new = vout + relax * (update - vout)
            if not math.isfinite(new):
                break
            if abs(new - vout) < tol:
                vout = new
                break
            vout = new
        else:
            raise NonConvergence(
                f"boost fixed point did not settle in {MAX_FIXED_POINT_STEPS} steps "
                f"(vin={vin}, duty={duty}, r_load={r_load})"
            )
        if not math.isfinite(vout):
            raise NonConvergence(f"boost fixed point diverged (vin={vin}, duty={duty})")
        i_l = vout / (off * r_load)
        p_out = vout * vout / r_load
        p_in = vin * i_l + p.p_fixed
        eta = p_out / p_in if p_in > 0 else 0.0
        return ConverterSolution(vout, p_in, p_out, eta)


LossModel = EmpiricalLoss | AnalyticLoss


def solve_steady_state(vin: float, duty: float, r_load: float, model: LossModel) -> ConverterSolution:
    """Converter operating point for a fixed duty and resistive load."""
    if vin <= 0 or r_load <= 0:
        raise ValueError("need vin > 0 and r_load > 0")
    _check_duty(duty)
    return model.solve(vin, duty, r_load)


@dataclass(frozen=True)
class Regulation:
    level: int
    duty: float
    vout: float
    steps: int


def regulate(
    vin: float,
    target: float,
    r_load: float,
    model: LossModel,
    start_level: int = 0,
) -> Regulation:
    """Step the quantised duty one level at a time until vout is closest to target.

    Mirrors a firmware loop that raises or lowers the PWM compare value by
    one count per pass. The duty is always ``level / duty_steps``.
    """
    if not 0 < vin <= target:
        raise ValueError(f"regulate needs 0 < vin <= target (vin={vin}, target={target})")
    steps_total = model.duty_steps
    max_level = math.floor(MAX_DUTY * steps_total)
    if vin == target:
        sol = solve_steady_state(vin, 0.0, r_load, model)
        return Regulation(0, 0.0, sol.vout, 0)

    def err(level):
        return solve_steady_state(vin, level / steps_total, r_load, model).vout - target

    level = min(max(int(start_level), 0), max_level)
    e = err(level)
    direction = 1 if e < 0 else -1
    steps = 0
    while steps < steps_total:
        nxt = level + direction
        if not 0 <= nxt <= max_level:
            break
        e_next = err(nxt)
        if abs(e_next) >= abs(e):
            break
        level, e = nxt, e_next
        steps += 1
    if abs(e) > UNREACHABLE_BAND_V:
        raise Unreachable(
            f"no quantised duty brings vout within {UNREACHABLE_BAND_V} V of {target} V "
            f"(vin={vin}, best vout={e + target:.3f})",
            target=target,
        )
    return Regulation(level, level / steps_total, e + target, steps)


@dataclass(frozen=True)
class BenchRow:
    vin: float
    p_in: float
    p_out: float
    eta_pct: float | None = None

    @property
    def eta(self) -> float:
        if self.eta_pct is not None:
            return self.eta_pct / 100.0
        return self.p_out / self.p_in


def read_bench_table(path: str | Path | None = None) -> list[BenchRow]:
    """Read a ``vin,p_in,p_out[,eta_pct]`` CSV; the bundled bench table by default."""
    if path is None:
        text = resources.files("pvpms.data").joinpath("table2.csv").read_text()
    else:
        text = Path(path).read_text()
    reader = csv.DictReader(text.splitlines())
    missing = {"vin", "p_in", "p_out"} - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"bench table missing columns: {sorted(missing)}")
    rows = []
    for rec in reader:
        eta_pct = rec.get("eta_pct")
        rows.append(
            BenchRow(
                float(rec["vin"]),
                float(rec["p_in"]),
                float(rec["p_out"]),
                float(eta_pct) if eta_pct not in (None, "") else None,
            )
        )
    return rows


def empirical_from_bench(rows: Sequence[BenchRow]) -> EmpiricalLoss:
    return EmpiricalLoss.from_rows((r.vin, r.eta) for r in rows)


def default_empirical() -> EmpiricalLoss:
    return empirical_from_bench(read_bench_table())


@dataclass(frozen=True)
class AnalyticFit:
    params: BoostParams
    vin: tuple[float, ...]
    eta_measured: tuple[float, ...]
    eta_model: tuple[float, ...]

    @property
    def residuals(self) -> tuple[float, ...]:
        return tuple(m - e for m, e in zip(self.eta_model, self.eta_measured))

    @property
    def mean_abs_error_pp(self) -> float:
        return 100.0 * float(np.mean(np.abs(self.residuals)))

    @property
    def max_abs_error_pp(self) -> float:
        return 100.0 * float(np.max(np.abs(self.residuals)))

    def report(self) -> str:
        lines = [
            f"v_diode={self.params.v_diode:.4f} V  r_switch={self.params.r_switch:.4f} ohm  "
            f"r_inductor={self.params.r_inductor:.4f} ohm  p_fixed={self.params.p_fixed:.4f} W",
            "vin_V  eta_meas_%  eta_model_%  err_pp",
        ]
        for v, m, e in zip(self.vin, self.eta_measured, self.eta_model):
            lines.append(f"{v:5.1f}  {100 * m:10.2f}  {100 * e:11.2f}  {100 * (e - m):+6.2f}")
        lines.append(f"mean |err| = {self.mean_abs_error_pp:.2f} pp")
        return "\n".join(lines)


def regulated_efficiency(
    vin: float, target: float, r_load: float, params: BoostParams
) -> float:
    """Efficiency of the analytic converter with duty tuned continuously to hit ``target``.

    Below the gain knee the output rises with duty, so the duty is found by
    bisection. When ``target`` is out of reach the duty saturates at the
    nearer end.
    """
    model = AnalyticLoss(params)

    def vout(d):
        return model.solve(vin, d, r_load).vout

    lo, hi = 0.0, MAX_DUTY
    if vout(lo) >= target:
        return model.solve(vin, lo, r_load).eta
    if vout(hi) <= target:
        # Past the knee the curve folds; fall back to the duty giving the most output.
        grid = np.linspace(0.0, MAX_DUTY, 96)
        best = max(grid, key=vout)
        if vout(best) <= target:
            return model.solve(vin, float(best), r_load).eta
        hi = float(best)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if vout(mid) < target:
            lo = mid
        else:
            hi = mid
    return model.solve(vin, 0.5 * (lo + hi), r_load).eta


_FIT_BOUNDS = ([0.0, 0.0, 0.0, 0.0], [1.2, 10.0, 10.0, 20.0])
_FIT_STARTS = (
    (0.3, 0.1, 0.1, 0.3),
    (0.7, 0.02, 0.02, 1.0),
    (0.1, 1.0, 1.0, 0.1),
    (0.5, 0.5, 0.2, 0.8),
)


def fit_analytic_params(
    rows: Sequence[BenchRow] | Sequence[tuple[float, float, float]],
    target: float = TARGET_VOUT,
    r_load: float = BENCH_LOAD_OHM,
) -> AnalyticFit:
    """Least-squares fit of the four parasitics to measured efficiencies.

    Each row is replayed by regulating the analytic converter to ``target``
    into ``r_load``; the objective is the squared efficiency error summed
    over rows.
    """
    bench = [r if isinstance(r, BenchRow) else BenchRow(*map(float, r)) for r in rows]
    if len(bench) < 3 or len({r.vin for r in bench}) < 3:
        raise SingularFit("need at least three rows with distinct input voltages")
    vin = np.array([r.vin for r in bench])
    eta_meas = np.array([r.eta for r in bench])
    if np.any(vin <= 0) or np.any(vin > target):
        raise ValueError("bench rows must have 0 < vin <= target")

    def model_eta(x):
        params = BoostParams(*x)
        return np.array([regulated_efficiency(v, target, r_load, params) for v in vin])

    best = None
    for x0 in _FIT_STARTS:
        sol = least_squares(lambda x: model_eta(x) - eta_meas, x0, bounds=_FIT_BOUNDS, xtol=1e-12, ftol=1e-12)
        if best is None or sol.cost < best.cost:
            best = sol
    params = BoostParams(*(float(x) for x in best.x))
    return AnalyticFit(
        params=params,
        vin=tuple(float(v) for v in vin),
        eta_measured=tuple(float(e) for e in eta_meas),
        eta_model=tuple(float(e) for e in model_eta(best.x)),
    )
