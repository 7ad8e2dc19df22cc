import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pvpms.boost import (
    DUTY_STEPS,
    MAX_DUTY,
    AnalyticLoss,
    BenchRow,
    BoostParams,
    EmpiricalLoss,
    fit_analytic_params,
    ideal_vout,
    read_bench_table,
    regulate,
    regulated_efficiency,
    solve_steady_state,
)
from pvpms.errors import DutyOutOfRange, SingularFit, Unreachable

BENCH_ETA_PCT = [95.23, 88.13, 83.55, 85.00, 85.54, 92.23, 95.94]


def closed_form_vout(vin, d, r, p):
    # Averaged circuit: vout*(1 + r_path/((1-d)^2 R)) = vin/(1-d) - v_d
    off = 1 - d
    r_path = p.r_inductor + d * p.r_switch
    return max((vin / off - p.v_diode) / (1 + r_path / (off * off * r)), 0.0)


def test_bench_table_fixture():
    rows = read_bench_table()
    assert [r.vin for r in rows] == [10, 14, 18, 22, 26, 33, 35]
    assert [round(100 * r.eta, 2) for r in rows] == BENCH_ETA_PCT
    assert np.mean([r.eta for r in rows]) == pytest.approx(0.8937, abs=5e-5)


def test_ideal_gain():
    assert ideal_vout(10, 0.5) == 20
    assert ideal_vout(12, 0.0) == 12
    with pytest.raises(DutyOutOfRange):
        ideal_vout(10, 0.96)


def test_empirical_exact_at_nodes_and_clamped(empirical):
    for v, e in zip([10, 14, 18, 22, 26, 33, 35], BENCH_ETA_PCT):
        assert abs(empirical.efficiency(v) - e / 100) < 1e-9
    assert empirical.efficiency(5) == pytest.approx(0.9523)
    assert empirical.efficiency(40) == pytest.approx(0.9594)
    assert empirical.efficiency(12) == pytest.approx((0.9523 + 0.8813) / 2)


def test_empirical_solve_uses_ideal_gain(empirical):
    sol = empirical.solve(20, 0.4, 100)
    assert sol.vout == pytest.approx(20 / 0.6)
    assert sol.p_out / sol.p_in == pytest.approx(sol.eta)


@settings(max_examples=80, deadline=None)
@given(
    vin=st.floats(5, 35),
    d=st.floats(0, MAX_DUTY),
    vd=st.floats(0, 1.2),
    rsw=st.floats(0, 2),
    rl=st.floats(0, 2),
    r=st.floats(20, 500),
)
def test_analytic_matches_closed_form(vin, d, vd, rsw, rl, r):
    params = BoostParams(vd, rsw, rl)
    sol = AnalyticLoss(params).solve(vin, d, r)
    assert sol.vout == pytest.approx(closed_form_vout(vin, d, r, params), abs=1e-5)
    assert sol.eta <= 1.0 + 1e-9


def test_lossless_analytic_equals_ideal():
    sol = AnalyticLoss().solve(14, 0.6, 100)
    assert sol.vout == pytest.approx(35, abs=1e-6)
    assert sol.eta == pytest.approx(1.0, abs=1e-6)


def test_fixed_loss_lowers_efficiency():
    a = AnalyticLoss(BoostParams(p_fixed=0.0)).solve(20, 0.4, 100)
    b = AnalyticLoss(BoostParams(p_fixed=1.0)).solve(20, 0.4, 100)
    assert b.eta < a.eta
    assert b.p_in == pytest.approx(a.p_in + 1.0)


@pytest.mark.parametrize("vin", [10, 14, 18, 22, 26, 33])
def test_regulate_reaches_target(empirical, vin):
    reg = regulate(vin, 35, 100, empirical)
    # Within half a duty count of the target.
    half_count = 0.5 * vin / (1 - reg.duty - 1 / DUTY_STEPS) ** 2 / DUTY_STEPS
    assert abs(reg.vout - 35) <= half_count
    assert reg.duty == reg.level / DUTY_STEPS
    assert reg.steps <= DUTY_STEPS


def test_regulate_start_level_gives_same_answer(empirical):
    a = regulate(18, 35, 100, empirical)
    b = regulate(18, 35, 100, empirical, start_level=200)
    assert a.level == b.level


def test_regulate_at_target_idles(empirical):
    reg = regulate(35, 35, 100, empirical)
    assert reg.duty == 0 and reg.vout == 35


def test_regulate_rejects_vin_above_target(empirical):
    with pytest.raises(ValueError):
        regulate(36, 35, 100, empirical)


def test_regulate_unreachable_with_heavy_losses():
    lossy = AnalyticLoss(BoostParams(v_diode=1.0, r_inductor=8.0))
    with pytest.raises(Unreachable):
        regulate(3, 35, 10, lossy)


def test_fit_recovers_synthetic_parameters():
    truth = BoostParams(v_diode=0.5, r_switch=0.3, r_inductor=0.4, p_fixed=0.6)
    vins = [10, 16, 22, 28, 33]
    rows = []
    for v in vins:
        eta = regulated_efficiency(v, 35, 100, truth)
        rows.append(BenchRow(v, 1.0, eta))
    fit = fit_analytic_params(rows)
    assert fit.mean_abs_error_pp < 0.1


def test_fit_needs_three_distinct_voltages():
    with pytest.raises(SingularFit):
        fit_analytic_params([(10, 12, 11), (10, 12, 11), (20, 13, 12)])


def test_empirical_rejects_unsorted_nodes():
    with pytest.raises(ValueError):
        EmpiricalLoss((20.0, 10.0), (0.9, 0.9))


def test_invalid_params_rejected():
    with pytest.raises(ValueError):
        BoostParams(v_diode=2.0)
    with pytest.raises(ValueError):
        BoostParams(r_switch=-1)
