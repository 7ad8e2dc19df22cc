"""Simulation of a PV array with and without a boost-based power management stage."""

from .boost import (
    AnalyticLoss,
    BoostParams,
    EmpiricalLoss,
    default_empirical,
    fit_analytic_params,
    read_bench_table,
    regulate,
    solve_steady_state,
)
from .errors import (
    ConfigError,
    DegenerateSeries,
    DutyOutOfRange,
    GridMismatch,
    NonConvergence,
    PvPmsError,
    SampleError,
    SingularFit,
    Unreachable,
)
from .pms import PmsConfig, PmsState, Route, pms_step, route_decision
from .pv_model import Datasheet, PVModuleParams, calibrate_params, default_panel, mpp, pv_current
from .stats import inv_t_cdf, paired_t_test, pearson, t_cdf, welch_t_test
from .system import (
    IrradianceProfile,
    MpptControllerModel,
    Scenario,
    compare,
    derive_profile,
    simulate_day,
)

__all__ = [
    "AnalyticLoss", "BoostParams", "EmpiricalLoss", "default_empirical", "fit_analytic_params",
    "read_bench_table", "regulate", "solve_steady_state",
    "ConfigError", "DegenerateSeries", "DutyOutOfRange", "GridMismatch", "NonConvergence",
    "PvPmsError", "SampleError", "SingularFit", "Unreachable",
    "PmsConfig", "PmsState", "Route", "pms_step", "route_decision",
    "Datasheet", "PVModuleParams", "calibrate_params", "default_panel", "mpp", "pv_current",
    "inv_t_cdf", "paired_t_test", "pearson", "t_cdf", "welch_t_test",
    "IrradianceProfile", "MpptControllerModel", "Scenario", "compare", "derive_profile", "simulate_day",
]
