import xml.etree.ElementTree as ET

import pytest

from pvpms import io as pio
from pvpms.cli import build_parser, main

OUTPUTS = [
    "samples_mppt_only.csv", "samples_with_pms.csv", "hourly_summary.csv",
    "report.txt", "hourly_power.svg", "profile.csv",
]


@pytest.fixture(scope="module")
def sim_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim")
    assert main(["simulate", "--out", str(out)]) == 0
    return out


def test_parser_defaults():
    args = build_parser().parse_args(["stats", "a.csv", "b.csv"])
    assert args.command == "stats"
    assert args.alpha is None and args.format == "table" and not args.welch
    args = build_parser().parse_args(["simulate", "--model", "analytic", "--out", "x"])
    assert args.model == "analytic" and args.out == "x" and args.config is None


def test_simulate_writes_all_outputs(sim_dir):
    for name in OUTPUTS:
        assert (sim_dir / name).is_file(), name
    assert len(pio.read_samples(sim_dir / "samples_with_pms.csv")) == 121
    root = ET.parse(sim_dir / "hourly_power.svg").getroot()
    assert len(root.findall("{http://www.w3.org/2000/svg}polyline")) == 2
    assert "gain:" in (sim_dir / "report.txt").read_text()


def test_simulate_is_idempotent(sim_dir, tmp_path):
    assert main(["simulate", "--out", str(tmp_path)]) == 0
    for name in OUTPUTS:
        assert (tmp_path / name).read_bytes() == (sim_dir / name).read_bytes(), name


def test_zero_load_routes_everything_to_battery(sim_dir, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"controller.load_p = 0\nprofile.source = file\nprofile.path = {sim_dir / 'profile.csv'}\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    for s in pio.read_samples(tmp_path / "o" / "samples_with_pms.csv"):
        assert s.p_load == 0
        assert s.p_battery == pytest.approx(s.p_delivered)


def test_simulate_missing_fixture_is_input_error(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("loss.fixture = nowhere.csv\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "loss.fixture" in capsys.readouterr().err


def test_simulate_bad_config_value(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# panel\npanel.vmp = 50\n")
    assert main(["simulate", "--config", str(cfg)]) == 2
    assert "panel" in capsys.readouterr().err


def test_verify_pms_bundled(capsys):
    assert main(["verify-pms"]) == 0
    assert "13/13" in capsys.readouterr().out


def test_verify_pms_forced_failure(tmp_path):
    rows = pio.fixture_text("table1.csv").replace("14,35", "14,99")
    path = tmp_path / "t1.csv"
    path.write_text(rows)
    assert main(["verify-pms", str(path)]) == 1


def test_verify_pms_empty_fixture(tmp_path):
    path = tmp_path / "t1.csv"
    path.write_text("vin,vout_expected\n")
    assert main(["verify-pms", str(path)]) == 2


def test_bench_boost_empirical(capsys):
    assert main(["bench-boost"]) == 0
    assert "average efficiency: 89.37 %" in capsys.readouterr().out


def test_bench_boost_rejects_row_outside_window(tmp_path):
    path = tmp_path / "t2.csv"
    path.write_text(pio.fixture_text("table2.csv") + "40,13,12,92.3\n")
    assert main(["bench-boost", str(path)]) == 2


def test_stats_on_simulated_series(sim_dir, capsys):
    code = main(["stats", str(sim_dir / "samples_with_pms.csv"), str(sim_dir / "samples_mppt_only.csv")])
    out = capsys.readouterr().out
    assert "t Critical two-tail" in out and "1.9799" in out
    assert code in (0, 3)


def test_stats_identical_files_not_significant(sim_dir, capsys):
    f = str(sim_dir / "samples_with_pms.csv")
    assert main(["stats", f, f, "--format", "csv"]) == 3
    rows = dict(line.split(",", 1) for line in capsys.readouterr().out.strip().splitlines())
    assert float(rows["t_stat"]) == 0.0
    assert rows["significant"] == "False"


def test_stats_mismatched_grid(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    pio.write_series(a, [480, 485, 490], [1, 2, 3])
    pio.write_series(b, [480, 485, 495], [1, 2, 4])
    assert main(["stats", str(a), str(b)]) == 2


def test_stats_malformed_csv(tmp_path):
    a = tmp_path / "a.csv"
    a.write_text("time,power\n1,2\n")
    assert main(["stats", str(a), str(a)]) == 2


def test_stats_bad_alpha(tmp_path):
    a = tmp_path / "a.csv"
    pio.write_series(a, [480, 485, 490], [1, 2, 3])
    assert main(["stats", str(a), str(a), "--alpha", "1.5"]) == 2


def test_derive_profile_command(tmp_path, capsys):
    assert main(["derive-profile", "--out", str(tmp_path)]) == 0
    prof = pio.read_profile(tmp_path / "profile.csv")
    assert len(prof.samples) == 121
    assert "12 NN" in capsys.readouterr().out


def test_unknown_command_is_input_error():
    assert main(["launch"]) == 2
