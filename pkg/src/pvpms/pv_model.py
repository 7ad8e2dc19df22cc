"""Single-diode PV module model and maximum power point search.

The panel is described by the five-parameter single-diode equation::

    i = i_ph - i_0 * (exp((v + i*r_s) / a) - 1) - (v + i*r_s) / r_sh

with modified ideality ``a = n * n_cells * k * T / q``. Parameters are
extracted from the three datasheet points (short circuit, open circuit,
maximum power) plus the zero-slope condition of the P-V curve at the
maximum power point, for a chosen ideality factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from functools import cached_property, lru_cache
from typing import Callable, Mapping

import numpy as np
from scipy.optimize import brentq

from .errors import NonConvergence

BOLTZMANN = 1.380649e-23  # J/K
ELEMENTARY_CHARGE = 1.602176634e-19  # C

T_REF = 298.15
G_REF = 1000.0
DAYTIME_CELL_TEMP = 318.15  # 45 degC
DEFAULT_IDEALITY = 1.0
# Typical crystalline-silicon short-circuit current coefficient, fraction of isc per K.
ALPHA_ISC_REL = 0.0005

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_EXP_CAP = 700.0


@dataclass(frozen=True)
class Datasheet:
    isc: float
    voc: float
    vmp: float
    imp: float
    n_cells: int

    @classmethod
    def from_mapping(cls, data: Mapping) -> "Datasheet":
        return cls(
            isc=float(data["isc"]),
            voc=float(data["voc"]),
            vmp=float(data["vmp"]),
            imp=float(data["imp"]),
            n_cells=int(data["n_cells"]),
        )


DEFAULT_DATASHEET = Datasheet(isc=4.5, voc=44.0, vmp=36.0, imp=4.17, n_cells=72)


@dataclass(frozen=True)
class PVModuleParams:
    """Calibrated single-diode parameters of one module.

    Photocurrent and saturation current at reference conditions are not
    stored; they follow from the other fields (see ``i_ph_ref`` and
    ``i_0_ref``) so the record stays minimal and self-consistent.
    """

    isc_ref: float
    voc_ref: float
    vmp_ref: float
    imp_ref: float
    n_ideality: float
    r_s: float
    r_sh: float
    n_cells: int
    alpha_isc: float = 0.0
    g_ref: float = G_REF
    t_ref: float = T_REF

    def __post_init__(self):
        if not self.voc_ref > self.vmp_ref > 0:
            raise ValueError("need voc_ref > vmp_ref > 0")
        if not self.isc_ref > self.imp_ref > 0:
            raise ValueError("need isc_ref > imp_ref > 0")
        if self.r_s < 0 or not self.r_sh > self.r_s:
            raise ValueError("need r_s >= 0 and r_sh > r_s")
        if not 1.0 <= self.n_ideality <= 2.0:
            raise ValueError("n_ideality must lie in [1, 2]")
        if self.n_cells < 1 or self.g_ref <= 0 or self.t_ref <= 0:
            raise ValueError("n_cells, g_ref and t_ref must be positive")

    def modified_ideality(self, t: float) -> float:
        return self.n_ideality * self.n_cells * BOLTZMANN * t / ELEMENTARY_CHARGE

    @cached_property
    def _ref_currents(self) -> tuple[float, float]:
        return _source_currents(self, self.modified_ideality(self.t_ref))

    @property
    def i_ph_ref(self) -> float:
        return self._ref_currents[0]

    @property
    def i_0_ref(self) -> float:
        return self._ref_currents[1]

    def photocurrent(self, g: float, t: float) -> float:
        i_ph = self.i_ph_ref + self.alpha_isc * (t - self.t_ref)
        return max(i_ph, 0.0) * g / self.g_ref

    def saturation_current(self, t: float) -> float:
        """Diode saturation current at cell temperature ``t``.

        The datasheet block carries no voltage temperature coefficient, so
        the saturation current is re-anchored at each temperature to keep
        the full-sun open-circuit voltage at ``voc_ref``. Temperature then
        acts through the photocurrent coefficient and the thermal voltage.
        """
        a = self.modified_ideality(t)
        i_ph = self.photocurrent(self.g_ref, t)
        return (i_ph - self.voc_ref / self.r_sh) / math.expm1(self.voc_ref / a)

    def datasheet(self) -> Datasheet:
        return Datasheet(self.isc_ref, self.voc_ref, self.vmp_ref, self.imp_ref, self.n_cells)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class OperatingPoint:
    v: float
    i: float
    p: float


def _source_currents(params: PVModuleParams, a: float) -> tuple[float, float]:
    """Photocurrent and saturation current hitting (0, isc) and (voc, 0) exactly."""
    return _solve_source_currents(
        params.isc_ref, params.voc_ref, params.r_s, params.r_sh, a
    )


def _solve_source_currents(isc, voc, r_s, r_sh, a):
    # Two linear equations in (i_ph, i_0): the short-circuit and open-circuit points.
    e_sc = math.expm1(isc * r_s / a)
    e_oc = math.expm1(min(voc / a, _EXP_CAP))
    rhs_sc = isc + isc * r_s / r_sh
    rhs_oc = voc / r_sh
    i_0 = (rhs_sc - rhs_oc) / (e_oc - e_sc)
    i_ph = rhs_oc + i_0 * e_oc
    return i_ph, i_0


def _current_at(v, i_ph, i_0, r_s, r_sh, a, tol):
    """Bracketed root of the single-diode residual in current.

    The residual is strictly decreasing in ``i``, so the root stays inside
    a shrinking bracket. Newton steps are taken when they land inside the
    bracket, bisection otherwise.
    """

    def residual(i):
        x = min((v + i * r_s) / a, _EXP_CAP)
        return i_ph - i_0 * math.expm1(x) - (v + i * r_s) / r_sh - i, x

    hi = i_ph
    f_hi, _ = residual(hi)
    if f_hi >= 0.0:
        return hi
    lo = 0.0
    f_lo, _ = residual(lo)
    step = 1.0
    while f_lo < 0.0:
        lo = -step
        f_lo, _ = residual(lo)
        step *= 2.0
        if step > 1e12:
            raise NonConvergence(f"no current bracket at v={v}")

    i = 0.5 * (lo + hi)
    for _ in range(200):
        f, x = residual(i)
        if abs(f) < tol:
            return i
        if f > 0.0:
            lo = i
        else:
            hi = i
        slope = -i_0 * math.exp(x) * r_s / a - r_s / r_sh - 1.0
        candidate = i - f / slope
        if lo < candidate < hi:
            i = candidate
        else:
            i = 0.5 * (lo + hi)
        if hi - lo < 1e-15:
            return i
    raise NonConvergence(f"current solve did not converge at v={v}")


def _diode_terms(g, t, params):
    return (
        params.photocurrent(g, t),
        params.saturation_current(t),
        params.modified_ideality(t),
    )


def pv_current(v: float, g: float, t: float, params: PVModuleParams, tol: float = 1e-10) -> float:
    """Module current at terminal voltage ``v`` (V), irradiance ``g`` (W/m^2), cell temperature ``t`` (K).

    Beyond the open-circuit voltage the returned current is negative;
    callers working in the generating quadrant clamp it.
    """
    if v < 0 or g < 0:
        raise ValueError("pv_current needs v >= 0 and g >= 0")
    i_ph, i_0, a = _diode_terms(g, t, params)
    return _current_at(v, i_ph, i_0, params.r_s, params.r_sh, a, tol)


def _open_circuit(i_ph, i_0, r_sh, a):
    # At zero current the series resistance drops out: solve i_ph = i_0*(e^(v/a)-1) + v/r_sh.
    if i_ph <= 0:
        return 0.0
    v = min(a * math.log1p(i_ph / i_0), i_ph * r_sh)
    for _ in range(100):
        e = math.exp(min(v / a, _EXP_CAP))
        f = i_ph - i_0 * (e - 1.0) - v / r_sh
        dv = f / (i_0 * e / a + 1.0 / r_sh)
        v += dv
        if abs(dv) < 1e-12 * max(1.0, v):
            return max(v, 0.0)
    raise NonConvergence("open-circuit voltage did not converge")


def open_circuit_voltage(g: float, t: float, params: PVModuleParams) -> float:
    if g <= 0:
        return 0.0
    i_ph, i_0, a = _diode_terms(g, t, params)
    return _open_circuit(i_ph, i_0, params.r_sh, a)


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-4):
    """Maximise a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))`` with bracket width below ``tol``."""
    a, b = min(lo, hi), max(lo, hi)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def mpp(g: float, t: float, params: PVModuleParams, tol: float = 1e-4) -> OperatingPoint:
    """Maximum power point at irradiance ``g`` and cell temperature ``t``."""
    if g <= 0:
        return OperatingPoint(0.0, 0.0, 0.0)
    i_ph, i_0, a = _diode_terms(g, t, params)
    r_s, r_sh = params.r_s, params.r_sh
    voc = _open_circuit(i_ph, i_0, r_sh, a)
    v, p = golden_section_max(lambda v: v * _current_at(v, i_ph, i_0, r_s, r_sh, a, 1e-10), 0.0, voc, tol)
    i = p / v if v > 0 else 0.0
    return OperatingPoint(v, i, p)


def calibrate_params(
    datasheet: Datasheet | Mapping,
    n_ideality: float = DEFAULT_IDEALITY,
    alpha_isc: float | None = None,
    g_ref: float = G_REF,
    t_ref: float = T_REF,
) -> PVModuleParams:
    """Extract ``r_s`` and ``r_sh`` for a given ideality from datasheet points.

    For each trial ``r_s`` the shunt resistance is chosen so the curve hits
    (vmp, imp); ``r_s`` is then tuned until dP/dV vanishes at vmp.

    Raises
    ------
    ValueError
        If the datasheet violates voc > vmp > 0 or isc > imp > 0.
    NonConvergence
        If no resistances reproduce the three points.
    """
    ds = datasheet if isinstance(datasheet, Datasheet) else Datasheet.from_mapping(datasheet)
    if not ds.voc > ds.vmp > 0 or not ds.isc > ds.imp > 0:
        raise ValueError("datasheet needs voc > vmp > 0 and isc > imp > 0")
    if not 1.0 <= n_ideality <= 2.0:
        raise ValueError("n_ideality must lie in [1, 2]")
    if alpha_isc is None:
        alpha_isc = ALPHA_ISC_REL * ds.isc
    return _calibrate(ds, float(n_ideality), float(alpha_isc), float(g_ref), float(t_ref))


@lru_cache(maxsize=64)
def _calibrate(ds: Datasheet, n: float, alpha_isc: float, g_ref: float, t_ref: float) -> PVModuleParams:
    a = n * ds.n_cells * BOLTZMANN * t_ref / ELEMENTARY_CHARGE
    vmp, imp = ds.vmp, ds.imp

    def mpp_residual(r_s, r_sh):
        i_ph, i_0 = _solve_source_currents(ds.isc, ds.voc, r_s, r_sh, a)
        return i_ph - i_0 * math.expm1((vmp + imp * r_s) / a) - (vmp + imp * r_s) / r_sh - imp

    shunt_grid = np.geomspace(1.0, 1e8, 161)

    def shunt_for(r_s):
        grid = shunt_grid[shunt_grid > r_s * 1.001]
        values = [mpp_residual(r_s, r) for r in grid]
        # Prefer the largest shunt that works: scan from the top.
        for k in range(len(grid) - 1, 0, -1):
            if np.sign(values[k]) != np.sign(values[k - 1]):
                return brentq(lambda r: mpp_residual(r_s, r), grid[k - 1], grid[k], xtol=1e-10)
        return None

    def slope_residual(r_s):
        r_sh = shunt_for(r_s)
        if r_sh is None:
            return math.nan
        _, i_0 = _solve_source_currents(ds.isc, ds.voc, r_s, r_sh, a)
        cond = i_0 / a * math.exp((vmp + imp * r_s) / a) + 1.0 / r_sh
        return imp - vmp * cond / (1.0 + r_s * cond)

    r_s_max = (ds.voc - ds.vmp) / ds.imp
    grid = np.linspace(0.0, r_s_max, 121)[:-1]
    values = [slope_residual(r) for r in grid]
    root = None
    for k in range(len(grid) - 1):
        f0, f1 = values[k], values[k + 1]
        if math.isfinite(f0) and math.isfinite(f1) and f0 * f1 <= 0:
            root = brentq(slope_residual, grid[k], grid[k + 1], xtol=1e-12)
            break
    if root is None:
        raise NonConvergence(
            f"no (r_s, r_sh) reproduces the datasheet points at n_ideality={n}"
        )
    r_sh = shunt_for(root)
    params = PVModuleParams(
        isc_ref=ds.isc,
        voc_ref=ds.voc,
        vmp_ref=ds.vmp,
        imp_ref=ds.imp,
        n_ideality=n,
        r_s=float(root),
        r_sh=float(r_sh),
        n_cells=ds.n_cells,
        alpha_isc=alpha_isc,
        g_ref=g_ref,
        t_ref=t_ref,
    )
    for v, i_expected in ((0.0, ds.isc), (ds.vmp, ds.imp)):
        i = pv_current(v, g_ref, t_ref, params)
        if abs(i - i_expected) > 0.005 * i_expected:
            raise NonConvergence(f"calibrated curve misses ({v}, {i_expected}): got {i}")
    if abs(pv_current(ds.voc, g_ref, t_ref, params)) > 0.005 * ds.isc:
        raise NonConvergence("calibrated curve misses the open-circuit point")
    return params


def default_panel() -> PVModuleParams:
    """The 150 W, 72-cell panel used throughout the simulator."""
    return calibrate_params(DEFAULT_DATASHEET)
