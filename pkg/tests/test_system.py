import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pvpms.errors import GridMismatch, Unreachable
from pvpms.pms import Route
from pvpms.system import (
    IrradianceProfile,
    MpptControllerModel,
    Scenario,
    compare,
    derive_profile,
    dispatch,
    gain_pct,
    hour_buckets,
    hour_label,
    mppt_harvest,
    parse_hour,
    simulate_day,
)

CTRL = MpptControllerModel()


def test_default_grid_has_121_samples():
    prof = IrradianceProfile.constant(500)
    assert len(prof.samples) == 121
    assert prof.times[0] == 480 and prof.end == 1080


@pytest.mark.parametrize("h, label", [(8, "8 AM"), (11, "11 AM"), (12, "12 NN"), (13, "1 PM"), (17, "5 PM")])
def test_hour_labels_round_trip(h, label):
    assert hour_label(h) == label
    assert parse_hour(label) == h


def test_closing_sample_joins_last_hour():
    buckets = hour_buckets(IrradianceProfile.constant(1).times)
    assert buckets.count(17) == 13
    assert buckets.count(8) == 12


def test_controller_window():
    assert mppt_harvest(30.9, 100, CTRL) == 0.0
    assert mppt_harvest(31.0, 100, CTRL) == pytest.approx(97.0)
    assert mppt_harvest(50.1, 100, CTRL) == 0.0


@settings(max_examples=100, deadline=None)
@given(
    p=st.floats(0, 300),
    soc_frac=st.floats(0, 1),
    load=st.floats(0, 200),
    dt=st.sampled_from([0.0, 5 / 60, 1.0]),
)
def test_dispatch_conserves_power(p, soc_frac, load, dt):
    ctrl = MpptControllerModel(load_p=load)
    d = dispatch(p, ctrl, soc_frac * ctrl.battery_capacity_wh, dt)
    assert d.p_load + d.p_battery + d.p_curtailed == pytest.approx(p, abs=1e-9)
    assert d.p_load <= load + 1e-12
    assert min(d.p_load, d.p_battery, d.p_curtailed) >= 0


def test_zero_load_sends_everything_to_battery():
    d = dispatch(80, MpptControllerModel(load_p=0), 0.0, 5 / 60)
    assert d.p_battery == 80 and d.p_load == 0


def test_full_battery_curtails_excess():
    d = dispatch(100, CTRL, CTRL.battery_capacity_wh, 5 / 60)
    assert d.p_load == 60 and d.p_battery == 0 and d.p_curtailed == 40


def test_derived_profile_reproduces_hourly_column(day_results, table3):
    base, _ = day_results
    for row, (label, avg) in zip(table3, base.hourly_avg):
        assert label == row.hour
        assert avg == pytest.approx(row.mppt_only_w, rel=1e-3)


def test_derived_profile_is_non_negative_and_bounded(profile):
    g = np.array(profile.samples)
    assert np.all(g >= 0) and np.all(g <= 1400)
    assert len(g) == 121


def test_energy_balance_over_day(day_results):
    for res in day_results:
        for s in res.samples:
            assert s.p_load + s.p_battery + s.p_curtailed == pytest.approx(s.p_delivered, abs=1e-9)
        assert res.avg_power == pytest.approx(np.mean(res.delivered()))
        assert 0 < res.energy_wh < 10 * 160


def test_pms_never_loses_in_cutoff_region(day_results):
    base, pms = day_results
    for a, b in zip(base.samples, pms.samples):
        if a.v_mpp < CTRL.v_in_min:
            assert b.p_delivered >= a.p_delivered
        if b.route is Route.DIRECT:
            assert b.p_delivered == a.p_delivered


def test_simulation_is_deterministic(profile, panel, empirical, day_results):
    again = simulate_day(profile, Scenario.WITH_PMS, panel, loss=empirical)
    assert again == day_results[1]


def test_low_sun_profile_gains_from_boost(panel, empirical):
    # At 30 W/m^2 the MPP sits below the controller window; only the PMS harvests it.
    prof = IrradianceProfile.constant(30, 480, 540)
    base = simulate_day(prof, Scenario.MPPT_ONLY, panel, loss=empirical)
    pms = simulate_day(prof, Scenario.WITH_PMS, panel, loss=empirical)
    assert base.avg_power == 0
    assert pms.avg_power > 0
    assert compare(base, pms).gain_pct == np.inf


def test_compare_rejects_different_grids(panel, empirical):
    a = simulate_day(IrradianceProfile.constant(500, 480, 540), Scenario.MPPT_ONLY, panel, loss=empirical)
    b = simulate_day(IrradianceProfile.constant(500, 480, 600), Scenario.MPPT_ONLY, panel, loss=empirical)
    with pytest.raises(GridMismatch):
        compare(a, b)


def test_gain_pct():
    assert gain_pct(85.8, 93.33) == pytest.approx(8.776, abs=1e-3)
    assert gain_pct(0, 0) == 0


def test_derive_rejects_impossible_hour(panel, table3):
    hours = [(r.hour, 500.0 if r.hour == "12 NN" else r.mppt_only_w) for r in table3]
    with pytest.raises(Unreachable) as err:
        derive_profile(hours, panel)
    assert err.value.hour is not None


def test_derive_needs_every_hour(panel):
    with pytest.raises(ValueError):
        derive_profile([("8 AM", 10.0), ("9 AM", 50.0)], panel)


def test_profile_validation():
    with pytest.raises(ValueError):
        IrradianceProfile((1.0, -2.0))
    with pytest.raises(ValueError):
        IrradianceProfile(())
