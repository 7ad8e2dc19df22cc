import pytest
from hypothesis import given, settings, strategies as st

from pvpms.boost import AnalyticLoss, BoostParams
from pvpms.io import read_table1
from pvpms.pms import PmsConfig, PmsState, Route, pms_step, route_decision

CFG = PmsConfig()


@pytest.mark.parametrize(
    "v, route",
    [(0, Route.DIRECT), (9.99, Route.DIRECT), (10, Route.BOOST), (20, Route.BOOST),
     (34.99, Route.BOOST), (35, Route.DIRECT), (40, Route.DIRECT)],
)
def test_power_up_uses_plain_window(v, route):
    assert route_decision(v, None, CFG) is route


def test_hysteresis_bands():
    assert route_decision(10.2, Route.DIRECT, CFG) is Route.DIRECT
    assert route_decision(10.5, Route.DIRECT, CFG) is Route.BOOST
    assert route_decision(9.6, Route.BOOST, CFG) is Route.BOOST
    assert route_decision(9.4, Route.BOOST, CFG) is Route.DIRECT
    assert route_decision(34.7, Route.DIRECT, CFG) is Route.DIRECT
    assert route_decision(35.3, Route.BOOST, CFG) is Route.BOOST
    assert route_decision(35.6, Route.BOOST, CFG) is Route.DIRECT


def test_zero_hysteresis_is_stateless():
    cfg = PmsConfig(hysteresis=0.0)
    for v in (5, 10, 20, 34.9, 35, 50):
        assert route_decision(v, Route.DIRECT, cfg) is route_decision(v, Route.BOOST, cfg) is route_decision(v, None, cfg)


@settings(max_examples=100, deadline=None)
@given(v=st.floats(0, 60), prev=st.sampled_from([None, Route.DIRECT, Route.BOOST]))
def test_decision_is_deterministic(v, prev):
    assert route_decision(v, prev, CFG) is route_decision(v, prev, CFG)


@settings(max_examples=100, deadline=None)
@given(
    edge=st.sampled_from([CFG.v_low, CFG.v_high]),
    offset=st.floats(-1.0, 1.0),
    steps=st.lists(st.floats(0.0, 1.0), min_size=2, max_size=60),
)
def test_no_chatter_inside_hysteresis_band(edge, offset, steps):
    # Any walk confined to a window narrower than 2h flips the route at most once.
    width = 2 * CFG.hysteresis * 0.999
    lo = edge + offset * CFG.hysteresis - width / 2
    route = route_decision(lo + steps[0] * width, None, CFG)
    flips = 0
    for s in steps[1:]:
        nxt = route_decision(lo + s * width, route, CFG)
        flips += nxt is not route
        route = nxt
    assert flips <= 1


def test_table1_rows_within_tolerance(empirical):
    for row in read_table1():
        out = pms_step(row.vin, 10.0, None, CFG, empirical, 100.0)
        assert abs(out.v_to_mppt - row.vout_expected) <= 0.6, row


def test_direct_path_is_lossless(empirical):
    out = pms_step(40, 120, PmsState(), CFG, empirical, 10.0)
    assert out.state.route is Route.DIRECT
    assert out.v_to_mppt == 40 and out.p_to_mppt == 120


def test_boost_path_scales_power_by_efficiency(empirical):
    out = pms_step(18, 50, None, CFG, empirical, 35**2 / 50)
    assert out.state.route is Route.BOOST
    assert out.p_to_mppt == pytest.approx(50 * 0.8355)
    assert out.v_to_mppt == pytest.approx(35, abs=0.5)


def test_boost_overlap_above_target_idles(empirical):
    out = pms_step(35.2, 100, PmsState(Route.BOOST, 0.1, 25), CFG, empirical, 12.0)
    assert out.state.route is Route.BOOST
    assert out.state.duty == 0.0
    assert out.v_to_mppt == 35.2


def test_unreachable_falls_back_to_direct():
    lossy = AnalyticLoss(BoostParams(v_diode=1.0, r_inductor=9.0))
    out = pms_step(10.5, 30, None, CFG, lossy, 5.0)
    assert out.state.route is Route.DIRECT
    assert out.fault is not None
    assert out.p_to_mppt == 30


def test_direct_state_carries_no_duty():
    with pytest.raises(ValueError):
        PmsState(Route.DIRECT, 0.3, 70)


@pytest.mark.parametrize("kw", [dict(v_low=40), dict(hysteresis=-1), dict(v_target=20)])
def test_config_invariants(kw):
    with pytest.raises(ValueError):
        PmsConfig(**kw)
