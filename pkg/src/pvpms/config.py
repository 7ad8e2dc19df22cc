"""Flat ``section.key = value`` run configuration.

Blank lines and lines starting with ``#`` are ignored. Every key has a
default, so an empty file (or no file) describes the stock setup. Relative
paths are resolved against the directory of the config file.

Example::

    panel.temperature = 318.15
    pms.hysteresis = 0.5
    loss.model = analytic
    controller.load_p = 0
    profile.source = file
    profile.path = my_profile.csv
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .boost import BenchRow, EmpiricalLoss, AnalyticLoss, empirical_from_bench, fit_analytic_params, read_bench_table
from .errors import ConfigError, PvPmsError
from .pms import PmsConfig
from .pv_model import DAYTIME_CELL_TEMP, DEFAULT_DATASHEET, DEFAULT_IDEALITY, Datasheet, PVModuleParams, calibrate_params
from .system import MpptControllerModel

MODEL_CHOICES = ("empirical", "analytic")
PROFILE_SOURCES = ("table3", "file")

_FLOAT_KEYS = {
    "panel.isc", "panel.voc", "panel.vmp", "panel.imp", "panel.temperature",
    "panel.n_ideality", "panel.alpha_isc",
    "pms.v_low", "pms.v_high", "pms.v_target", "pms.hysteresis",
    "controller.v_in_min", "controller.v_in_max", "controller.eta", "controller.battery_v",
    "controller.capacity", "controller.initial_soc", "controller.load_p",
    "stats.alpha",
}
_INT_KEYS = {"panel.n_cells"}
_CHOICE_KEYS = {"loss.model": MODEL_CHOICES, "profile.source": PROFILE_SOURCES}
_PATH_KEYS = {"loss.fixture", "profile.path", "profile.table3", "output.dir"}
KNOWN_KEYS = _FLOAT_KEYS | _INT_KEYS | set(_CHOICE_KEYS) | _PATH_KEYS


@dataclass(frozen=True)
class RunConfig:
    datasheet: Datasheet = DEFAULT_DATASHEET
    n_ideality: float = DEFAULT_IDEALITY
    alpha_isc: float | None = None
    temperature: float = DAYTIME_CELL_TEMP
    pms: PmsConfig = field(default_factory=PmsConfig)
    controller: MpptControllerModel = field(default_factory=MpptControllerModel)
    loss_model: str = "empirical"
    loss_fixture: Path | None = None
    profile_source: str = "table3"
    profile_path: Path | None = None
    table3_path: Path | None = None
    out_dir: Path = Path("out")
    alpha: float = 0.05

    def panel(self) -> PVModuleParams:
        return calibrate_params(self.datasheet, self.n_ideality, self.alpha_isc)

    def bench_rows(self) -> list[BenchRow]:
        return read_bench_table(self.loss_fixture)

    def loss(self) -> EmpiricalLoss | AnalyticLoss:
        rows = self.bench_rows()
        if self.loss_model == "analytic":
            return AnalyticLoss(fit_analytic_params(rows).params)
        return empirical_from_bench(rows)


def parse_text(text: str, base_dir: Path | None = None) -> dict[str, object]:
    """Parse config text into typed values keyed by dotted name."""
    base_dir = base_dir or Path(".")
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError("expected 'section.key = value'", line=lineno)
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in KNOWN_KEYS:
            raise ConfigError("unknown key", line=lineno, key=key)
        if key in values:
            raise ConfigError("duplicate key", line=lineno, key=key)
        if not value:
            raise ConfigError("missing value", line=lineno, key=key)
        values[key] = _convert(key, value, lineno, base_dir)
    return values


def _convert(key, value, lineno, base_dir):
    if key in _FLOAT_KEYS:
        try:
            x = float(value)
        except ValueError:
            raise ConfigError(f"not a number: {value!r}", line=lineno, key=key) from None
        if not math.isfinite(x):
            raise ConfigError("value must be finite", line=lineno, key=key)
        return x
    if key in _INT_KEYS:
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"not an integer: {value!r}", line=lineno, key=key) from None
    if key in _CHOICE_KEYS:
        choice = value.lower()
        if choice not in _CHOICE_KEYS[key]:
            raise ConfigError(f"expected one of {list(_CHOICE_KEYS[key])}, got {value!r}", line=lineno, key=key)
        return choice
    path = Path(value)
    return path if path.is_absolute() else base_dir / path


def _line_of(text: str, key: str) -> int | None:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if raw.strip().partition("=")[0].strip() == key:
            return lineno
    return None


def build(values: dict[str, object], text: str = "") -> RunConfig:
    """Assemble a :class:`RunConfig`, checking each block's invariants."""

    def get(key, default):
        return values.get(key, default)

    def block(keys, make):
        try:
            return make()
        except (ValueError, TypeError) as exc:
            present = [k for k in keys if k in values]
            key = present[0] if present else None
            raise ConfigError(str(exc), line=_line_of(text, key) if key else None, key=key) from None

    ds = DEFAULT_DATASHEET
    panel_keys = ["panel.isc", "panel.voc", "panel.vmp", "panel.imp", "panel.n_cells"]
    datasheet = block(panel_keys, lambda: Datasheet(
        get("panel.isc", ds.isc), get("panel.voc", ds.voc), get("panel.vmp", ds.vmp),
        get("panel.imp", ds.imp), get("panel.n_cells", ds.n_cells),
    ))
    pms_keys = ["pms.v_low", "pms.v_high", "pms.v_target", "pms.hysteresis"]
    d = PmsConfig()
    pms = block(pms_keys, lambda: PmsConfig(
        get("pms.v_low", d.v_low), get("pms.v_high", d.v_high),
        get("pms.v_target", d.v_target), get("pms.hysteresis", d.hysteresis),
    ))
    c = MpptControllerModel()
    ctrl_keys = [
        "controller.v_in_min", "controller.v_in_max", "controller.eta", "controller.battery_v",
        "controller.capacity", "controller.initial_soc", "controller.load_p",
    ]
    capacity = get("controller.capacity", c.battery_capacity_wh)
    ctrl = block(ctrl_keys, lambda: MpptControllerModel(
        get("controller.v_in_min", c.v_in_min), get("controller.v_in_max", c.v_in_max),
        get("controller.eta", c.eta), get("controller.battery_v", c.battery_v), capacity,
        get("controller.initial_soc", min(c.initial_soc_wh, capacity)), get("controller.load_p", c.load_p),
    ))

    def check(key, ok, message):
        if key in values and not ok(values[key]):
            raise ConfigError(message, line=_line_of(text, key), key=key)

    check("panel.temperature", lambda t: t > 0, "temperature must be positive kelvin")
    check("panel.n_ideality", lambda n: 1.0 <= n <= 2.0, "n_ideality must lie in [1, 2]")
    check("stats.alpha", lambda a: 0 < a < 1, "alpha must lie in (0, 1)")
    for key in ("loss.fixture", "profile.path", "profile.table3"):
        check(key, lambda p: Path(p).is_file(), "file does not exist")
    if get("profile.source", "table3") == "file" and "profile.path" not in values:
        raise ConfigError("profile.source = file needs profile.path", line=_line_of(text, "profile.source"),
                          key="profile.source")

    return RunConfig(
        datasheet=datasheet,
        n_ideality=get("panel.n_ideality", DEFAULT_IDEALITY),
        alpha_isc=get("panel.alpha_isc", None),
        temperature=get("panel.temperature", DAYTIME_CELL_TEMP),
        pms=pms,
        controller=ctrl,
        loss_model=get("loss.model", "empirical"),
        loss_fixture=get("loss.fixture", None),
        profile_source=get("profile.source", "table3"),
        profile_path=get("profile.path", None),
        table3_path=get("profile.table3", None),
        out_dir=get("output.dir", Path("out")),
        alpha=get("stats.alpha", 0.05),
    )


def load_config(path: str | Path | None = None) -> RunConfig:
    """Read and validate a config file; ``None`` gives the defaults."""
    if path is None:
        return RunConfig()
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    text = p.read_text()
    return build(parse_text(text, p.parent), text)


def check_panel(cfg: RunConfig) -> PVModuleParams:
    """Calibrate the configured panel, reporting datasheet problems as config errors."""
    try:
        return cfg.panel()
    except ValueError as exc:
        raise ConfigError(str(exc), key="panel") from None
    except PvPmsError as exc:
        raise ConfigError(f"panel calibration failed: {exc}", key="panel") from None
