"""Command-line entry point: ``pvpms <command> [options]``.

Exit codes: 0 ok, 1 model or tolerance failure, 2 input error,
3 statistical test not significant.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import io as pio
from .boost import (
    BENCH_LOAD_OHM, TARGET_VOUT, AnalyticLoss, empirical_from_bench, fit_analytic_params,
    read_bench_table, regulate,
)
from .config import MODEL_CHOICES, RunConfig, check_panel, load_config
from .errors import ConfigError, PvPmsError
from .pms import pms_step
from .stats import paired_t_test, welch_t_test
from .svg import write_chart
from .system import Scenario, compare, derive_profile, simulate_day

EXIT_OK = 0
EXIT_MODEL = 1
EXIT_INPUT = 2
EXIT_NOT_SIGNIFICANT = 3

TABLE1_TOL_V = 0.6
BENCH_AVG_TOL_PP = 0.05
FIT_MAE_LIMIT_PP = 3.0
BOOST_WINDOW = (10.0, 35.0)

log = logging.getLogger("pvpms")


class InputError(Exception):
    """Bad command-line input; maps to exit code 2."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pvpms", description="PV power management simulator")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver warnings")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, out=False, model=False):
        p.add_argument("--config", default=None, help="flat 'section.key = value' config file")
        if out:
            p.add_argument("--out", default=None, help="output directory (overrides output.dir)")
        if model:
            p.add_argument("--model", choices=MODEL_CHOICES, default=None, help="boost loss model")

    p = sub.add_parser("simulate", help="run both scenarios and write CSV, report and SVG")
    common(p, out=True, model=True)

    p = sub.add_parser("verify-pms", help="replay the routing bench table")
    p.add_argument("fixture", nargs="?", default=None, help="CSV with vin,vout_expected (bundled by default)")
    common(p, model=True)

    p = sub.add_parser("bench-boost", help="regulate each bench row to 35 V into 100 ohm")
    p.add_argument("fixture", nargs="?", default=None, help="CSV with vin,p_in,p_out[,eta_pct]")
    common(p, model=True)

    p = sub.add_parser("derive-profile", help="reconstruct irradiance from hourly averages")
    p.add_argument("table", nargs="?", default=None, help="CSV with hour,mppt_only_w[,with_pms_w]")
    common(p, out=True)

    p = sub.add_parser("stats", help="paired t-test on two power series")
    p.add_argument("csv_a", help="series A (t_min,p_delivered)")
    p.add_argument("csv_b", help="series B (t_min,p_delivered)")
    p.add_argument("--alpha", type=float, default=None, help="significance level (default 0.05)")
    p.add_argument("--welch", action="store_true", help="unequal-variance test instead of paired")
    p.add_argument("--format", choices=("table", "csv"), default="table")
    common(p)
    return parser


def _config(args) -> RunConfig:
    cfg = load_config(args.config)
    if getattr(args, "model", None):
        cfg = dataclasses.replace(cfg, loss_model=args.model)
    if getattr(args, "out", None):
        cfg = dataclasses.replace(cfg, out_dir=Path(args.out))
    return cfg


def _hourly_targets(cfg: RunConfig, table: str | None = None):
    rows = pio.read_table3(table if table is not None else cfg.table3_path)
    if not rows:
        raise InputError("hourly table has no rows")
    return rows


def _profile(cfg: RunConfig, panel):
    if cfg.profile_source == "file":
        return pio.read_profile(cfg.profile_path)
    rows = _hourly_targets(cfg)
    return derive_profile(
        [(r.hour, r.mppt_only_w) for r in rows], panel, cfg.controller, cfg.temperature,
    )


def cmd_simulate(args) -> int:
    cfg = _config(args)
    panel = check_panel(cfg)
    loss = cfg.loss()
    profile = _profile(cfg, panel)

    def run(scenario):
        return simulate_day(profile, scenario, panel, cfg.pms, loss, cfg.controller, cfg.temperature)

    with ThreadPoolExecutor(max_workers=2) as pool:
        base, pms = pool.map(run, (Scenario.MPPT_ONLY, Scenario.WITH_PMS))
    cmp = compare(base, pms)
    test = paired_t_test(pms.delivered(), base.delivered(), cfg.alpha)

    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    pio.write_profile(out / "profile.csv", profile)
    pio.write_samples(out / "samples_mppt_only.csv", base)
    pio.write_samples(out / "samples_with_pms.csv", pms)
    pio.write_hourly(out / "hourly_summary.csv", base, pms)
    labels = [h for h, _ in base.hourly_avg]
    write_chart(
        out / "hourly_power.svg",
        labels,
        [("MPPT only", [v for _, v in base.hourly_avg]), ("With PMS", [v for _, v in pms.hourly_avg])],
    )
    report = _simulate_report(cfg, base, pms, cmp, test)
    (out / "report.txt").write_text(report)
    print(report, end="")
    print(f"outputs written to {out}")
    return EXIT_OK


def _simulate_report(cfg, base, pms, cmp, test) -> str:
    lines = [
        f"loss model: {cfg.loss_model}",
        f"cell temperature: {cfg.temperature:.2f} K",
        f"samples: {len(base.samples)} from t={base.times[0]} to t={base.times[-1]} min",
        "",
        f"{'hour':>6}  {'mppt_only_W':>11}  {'with_pms_W':>10}  {'gain_%':>7}",
    ]
    for (h, a), (_, b) in zip(base.hourly_avg, pms.hourly_avg):
        g = 100.0 * (b - a) / a if a else 0.0
        lines.append(f"{h:>6}  {a:11.2f}  {b:10.2f}  {g:+7.2f}")
    boosted = sum(1 for s in pms.samples if s.route.value == "BOOST")
    lines += [
        "",
        f"average power, MPPT only: {cmp.avg_a:.2f} W",
        f"average power, with PMS:  {cmp.avg_b:.2f} W",
        f"gain: {cmp.gain_pct:+.2f} %",
        f"energy, MPPT only: {base.energy_wh:.1f} Wh; with PMS: {pms.energy_wh:.1f} Wh",
        f"samples routed through boost: {boosted}",
        "",
        f"paired t-test (with PMS minus MPPT only), alpha={test.alpha:g}:",
        f"  t = {test.t_stat:.4f}, df = {test.df:g}, p two-tail = {test.p_two_tail:.4g}, "
        f"{'significant' if test.significant else 'not significant'}",
    ]
    return "\n".join(lines) + "\n"


def cmd_verify_pms(args) -> int:
    cfg = _config(args)
    rows = pio.read_table1(args.fixture)
    if not rows:
        raise InputError("fixture has no rows")
    loss = cfg.loss()
    failures = 0
    print(f"{'vin_V':>6}  {'expected_V':>10}  {'simulated_V':>11}  {'route':>6}  result")
    for r in rows:
        # Each bench reading was a separate power-up, so there is no route history.
        step = pms_step(r.vin, r.vin * r.vin / BENCH_LOAD_OHM, None, cfg.pms, loss, BENCH_LOAD_OHM)
        ok = abs(step.v_to_mppt - r.vout_expected) <= TABLE1_TOL_V
        failures += not ok
        print(f"{r.vin:6.1f}  {r.vout_expected:10.2f}  {step.v_to_mppt:11.2f}  "
              f"{step.state.route.value:>6}  {'pass' if ok else 'FAIL'}")
    print(f"{len(rows) - failures}/{len(rows)} rows within {TABLE1_TOL_V} V")
    return EXIT_OK if failures == 0 else EXIT_MODEL


def cmd_bench_boost(args) -> int:
    cfg = _config(args)
    rows = read_bench_table(args.fixture if args.fixture is not None else cfg.loss_fixture)
    if not rows:
        raise InputError("bench table has no rows")
    lo, hi = BOOST_WINDOW
    outside = [r.vin for r in rows if not lo <= r.vin <= hi]
    if outside:
        raise InputError(f"vin outside the boost window [{lo:g}, {hi:g}] V: {outside}")

    print(f"{'vin_V':>6}  {'p_in_W':>7}  {'p_out_W':>7}  {'eta_exp_%':>9}  {'eta_model_%':>11}")
    if cfg.loss_model == "analytic":
        fit = fit_analytic_params(rows, TARGET_VOUT, BENCH_LOAD_OHM)
        model = AnalyticLoss(fit.params)
        etas = list(fit.eta_model)
    else:
        model = empirical_from_bench(rows)
        etas = [model.efficiency(r.vin) for r in rows]
    for r, eta in zip(rows, etas):
        reg = regulate(r.vin, TARGET_VOUT, BENCH_LOAD_OHM, model) if r.vin < TARGET_VOUT else None
        p_out = (reg.vout if reg else r.vin) ** 2 / BENCH_LOAD_OHM
        print(f"{r.vin:6.1f}  {p_out / eta:7.2f}  {p_out:7.2f}  {100 * r.eta:9.2f}  {100 * eta:11.2f}")

    expected_avg = 100.0 * float(np.mean([r.eta for r in rows]))
    model_avg = 100.0 * float(np.mean(etas))
    print(f"average efficiency: {model_avg:.2f} % (bench {expected_avg:.2f} %)")
    if cfg.loss_model == "analytic":
        print(fit.report())
        ok = fit.mean_abs_error_pp <= FIT_MAE_LIMIT_PP
        print(f"fit mean |err| {fit.mean_abs_error_pp:.2f} pp, limit {FIT_MAE_LIMIT_PP} pp: {'pass' if ok else 'FAIL'}")
    else:
        ok = abs(model_avg - expected_avg) <= BENCH_AVG_TOL_PP
        print(f"average within {BENCH_AVG_TOL_PP} pp: {'pass' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_MODEL


def cmd_derive_profile(args) -> int:
    cfg = _config(args)
    panel = check_panel(cfg)
    rows = _hourly_targets(cfg, args.table)
    profile = derive_profile([(r.hour, r.mppt_only_w) for r in rows], panel, cfg.controller, cfg.temperature)
    check = simulate_day(profile, Scenario.MPPT_ONLY, panel, cfg.pms, cfg.loss(), cfg.controller, cfg.temperature)
    print(f"{'hour':>6}  {'target_W':>8}  {'simulated_W':>11}")
    for r, (h, v) in zip(rows, check.hourly_avg):
        print(f"{h:>6}  {r.mppt_only_w:8.2f}  {v:11.2f}")
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    path = cfg.out_dir / "profile.csv"
    pio.write_profile(path, profile)
    print(f"profile written to {path}")
    return EXIT_OK


def cmd_stats(args) -> int:
    cfg = _config(args)
    alpha = args.alpha if args.alpha is not None else cfg.alpha
    if not 0 < alpha < 1:
        raise InputError("--alpha must lie in (0, 1)")
    ta, a = pio.read_series(args.csv_a)
    tb, b = pio.read_series(args.csv_b)
    if ta != tb:
        raise InputError("series do not share the same t_min grid")
    test = (welch_t_test if args.welch else paired_t_test)(a, b, alpha)
    if args.format == "csv":
        print("key,value")
        for k, v in test.rows():
            print(f"{k},{v!r}" if isinstance(v, float) else f"{k},{v}")
        print(f"significant,{test.significant}")
    else:
        print(f"t-test ({test.variant}), alpha = {alpha:g}")
        print(f"{'':<30}{'A':>12}{'B':>12}")
        print(f"{'Mean':<30}{test.mean_a:12.4f}{test.mean_b:12.4f}")
        print(f"{'Observations':<30}{test.n:12d}{test.n:12d}")
        print(f"{'Pearson correlation':<30}{test.pearson_r:12.4f}")
        print(f"{'df':<30}{test.df:12.4g}")
        print(f"{'t Stat':<30}{test.t_stat:12.4f}")
        print(f"{'P(T<=t) one-tail':<30}{test.p_one_tail:12.4g}")
        print(f"{'t Critical one-tail':<30}{test.t_crit_one:12.4f}")
        print(f"{'P(T<=t) two-tail':<30}{test.p_two_tail:12.4g}")
        print(f"{'t Critical two-tail':<30}{test.t_crit_two:12.4f}")
        print("null hypothesis rejected" if test.significant else "null hypothesis not rejected")
    return EXIT_OK if test.significant else EXIT_NOT_SIGNIFICANT


COMMANDS = {
    "simulate": cmd_simulate,
    "verify-pms": cmd_verify_pms,
    "bench-boost": cmd_bench_boost,
    "derive-profile": cmd_derive_profile,
    "stats": cmd_stats,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, InputError, pio.CsvFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (PvPmsError, ValueError) as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
