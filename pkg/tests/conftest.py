import numpy as np
import pytest
from scipy.special import wrightomega

from pvpms.boost import default_empirical
from pvpms.io import read_table3
from pvpms.pv_model import default_panel
from pvpms.system import Scenario, derive_profile, simulate_day


def lambert_current(v, g, t, params):
    """Explicit single-diode current through the Wright omega function (vectorised)."""
    i_ph = params.photocurrent(g, t)
    i_0 = params.saturation_current(t)
    a = params.modified_ideality(t)
    rs, rsh = params.r_s, params.r_sh
    v = np.asarray(v, dtype=float)
    z = np.log(rs * rsh * i_0 / (a * (rs + rsh))) + rsh * (rs * i_ph + rs * i_0 + v) / (a * (rs + rsh))
    return (rsh * (i_ph + i_0) - v) / (rs + rsh) - a / rs * np.real(wrightomega(z))


@pytest.fixture(scope="session")
def panel():
    return default_panel()


@pytest.fixture(scope="session")
def empirical():
    return default_empirical()


@pytest.fixture(scope="session")
def table3():
    return read_table3()


@pytest.fixture(scope="session")
def profile(panel, table3):
    return derive_profile([(r.hour, r.mppt_only_w) for r in table3], panel)


@pytest.fixture(scope="session")
def day_results(profile, panel, empirical):
    base = simulate_day(profile, Scenario.MPPT_ONLY, panel, loss=empirical)
    pms = simulate_day(profile, Scenario.WITH_PMS, panel, loss=empirical)
    return base, pms
