"""CSV readers and writers for fixtures, profiles and simulation output."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .pms import Route
from .system import DayResult, IrradianceProfile, PowerSample, gain_pct

SAMPLE_COLUMNS = (
    "t_min", "g", "v_mpp", "p_mpp", "route", "v_to_mppt", "p_delivered", "p_load", "p_battery",
)
HOURLY_COLUMNS = ("hour", "avg_w_mppt_only", "avg_w_with_pms", "gain_pct")
SERIES_COLUMNS = ("t_min", "p_delivered")
PROFILE_COLUMNS = ("t_min", "g")


class CsvFormatError(ValueError):
    """A CSV file is missing columns or holds unparsable values."""


@dataclass(frozen=True)
class Table1Row:
    vin: float
    vout_expected: float


@dataclass(frozen=True)
class HourlyRow:
    hour: str
    mppt_only_w: float
    with_pms_w: float


def fixture_text(name: str) -> str:
    return resources.files("pvpms.data").joinpath(name).read_text()


def _read_text(path: str | Path | None, default_name: str) -> str:
    if path is None:
        return fixture_text(default_name)
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such file: {p}")
    return p.read_text()


def _records(text: str, required: Sequence[str], source: str) -> list[dict[str, str]]:
    reader = csv.DictReader(io.StringIO(text))
    fields = [f.strip() for f in (reader.fieldnames or ())]
    missing = [c for c in required if c not in fields]
    if missing:
        raise CsvFormatError(f"{source}: missing columns {missing}")
    reader.fieldnames = fields
    return list(reader)


def _num(rec: dict[str, str], key: str, lineno: int, source: str) -> float:
    raw = rec.get(key)
    try:
        value = float(raw)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        raise CsvFormatError(f"{source}, row {lineno}: bad value {raw!r} for '{key}'") from None
    if not math.isfinite(value):
        raise CsvFormatError(f"{source}, row {lineno}: non-finite value for '{key}'")
    return value


def _fmt(x: float) -> str:
    return repr(float(x))


def read_table1(path: str | Path | None = None) -> list[Table1Row]:
    src = str(path or "table1.csv")
    recs = _records(_read_text(path, "table1.csv"), ("vin", "vout_expected"), src)
    return [
        Table1Row(_num(r, "vin", k, src), _num(r, "vout_expected", k, src))
        for k, r in enumerate(recs, start=2)
    ]


def read_table3(path: str | Path | None = None) -> list[HourlyRow]:
    src = str(path or "table3.csv")
    recs = _records(_read_text(path, "table3.csv"), ("hour", "mppt_only_w", "with_pms_w"), src)
    return [
        HourlyRow(r["hour"].strip(), _num(r, "mppt_only_w", k, src), _num(r, "with_pms_w", k, src))
        for k, r in enumerate(recs, start=2)
    ]


def write_samples(path: str | Path, result: DayResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SAMPLE_COLUMNS)
        for s in result.samples:
            w.writerow([
                s.t, _fmt(s.g), _fmt(s.v_mpp), _fmt(s.p_mpp), s.route.value,
                _fmt(s.v_to_mppt), _fmt(s.p_delivered), _fmt(s.p_load), _fmt(s.p_battery),
            ])


def read_samples(path: str | Path) -> list[PowerSample]:
    src = str(path)
    recs = _records(_read_text(path, ""), SAMPLE_COLUMNS, src)
    out = []
    for k, r in enumerate(recs, start=2):
        try:
            route = Route(r["route"].strip())
        except ValueError:
            raise CsvFormatError(f"{src}, row {k}: unknown route {r['route']!r}") from None
        out.append(PowerSample(
            int(_num(r, "t_min", k, src)), _num(r, "g", k, src), _num(r, "v_mpp", k, src),
            _num(r, "p_mpp", k, src), route, _num(r, "v_to_mppt", k, src),
            _num(r, "p_delivered", k, src), _num(r, "p_load", k, src), _num(r, "p_battery", k, src),
        ))
    return out


def write_hourly(path: str | Path, mppt_only: DayResult, with_pms: DayResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HOURLY_COLUMNS)
        for (label, a), (label_b, b) in zip(mppt_only.hourly_avg, with_pms.hourly_avg):
            if label != label_b:
                raise ValueError(f"hour buckets differ: {label} vs {label_b}")
            w.writerow([label, _fmt(a), _fmt(b), _fmt(gain_pct(a, b))])


def read_hourly(path: str | Path) -> list[tuple[str, float, float, float]]:
    src = str(path)
    recs = _records(_read_text(path, ""), HOURLY_COLUMNS, src)
    return [
        (r["hour"].strip(), _num(r, "avg_w_mppt_only", k, src),
         _num(r, "avg_w_with_pms", k, src), _num(r, "gain_pct", k, src))
        for k, r in enumerate(recs, start=2)
    ]


def write_series(path: str | Path, times: Iterable[int], values: Iterable[float]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SERIES_COLUMNS)
        for t, v in zip(times, values):
            w.writerow([int(t), _fmt(v)])


def read_series(path: str | Path) -> tuple[list[int], list[float]]:
    """Read a ``t_min,p_delivered`` power series.

    Extra columns are ignored, so per-sample output files are accepted too.
    """
    src = str(path)
    recs = _records(_read_text(path, ""), SERIES_COLUMNS, src)
    if not recs:
        raise CsvFormatError(f"{src}: no data rows")
    times, values = [], []
    for k, r in enumerate(recs, start=2):
        t = _num(r, "t_min", k, src)
        if t != int(t):
            raise CsvFormatError(f"{src}, row {k}: t_min must be whole minutes")
        times.append(int(t))
        values.append(_num(r, "p_delivered", k, src))
    if len(set(times)) != len(times):
        raise CsvFormatError(f"{src}: duplicate t_min values")
    return times, values


def write_profile(path: str | Path, profile: IrradianceProfile) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PROFILE_COLUMNS)
        for t, g in zip(profile.times, profile.samples):
            w.writerow([t, _fmt(g)])


def read_profile(path: str | Path) -> IrradianceProfile:
    src = str(path)
    recs = _records(_read_text(path, ""), PROFILE_COLUMNS, src)
    if not recs:
        raise CsvFormatError(f"{src}: no data rows")
    times = [int(_num(r, "t_min", k, src)) for k, r in enumerate(recs, start=2)]
    g = [_num(r, "g", k, src) for k, r in enumerate(recs, start=2)]
    if len(times) > 1:
        step = times[1] - times[0]
        if step <= 0 or any(b - a != step for a, b in zip(times, times[1:])):
            raise CsvFormatError(f"{src}: t_min must be a uniform increasing grid")
    else:
        step = 5
    try:
        return IrradianceProfile(tuple(g), times[0], step)
    except ValueError as exc:
        raise CsvFormatError(f"{src}: {exc}") from None
