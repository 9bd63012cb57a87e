"""Seasonal rolling studies and their tabular/figure outputs."""

from .runs import (EXPERIMENTS, SEASON_STARTS, ArmResult, CostSplitReport,
                   EfrSweepReport, ExperimentSpec, InertiaHistReport,
                   ReliabilityReport, WeekProfileReport, run_arm,
                   run_cost_split, run_efr_sweep, run_inertia_hist,
                   run_reliability_compare, run_week_profile)
from .reports import (write_cost_split, write_efr_sweep, write_inertia_hist,
                      write_reliability, write_week_profile)

__all__ = [
    "EXPERIMENTS", "SEASON_STARTS", "ArmResult", "ExperimentSpec",
    "CostSplitReport", "EfrSweepReport", "InertiaHistReport",
    "ReliabilityReport", "WeekProfileReport",
    "run_arm", "run_cost_split", "run_efr_sweep", "run_inertia_hist",
    "run_reliability_compare", "run_week_profile",
    "write_cost_split", "write_efr_sweep", "write_inertia_hist",
    "write_reliability", "write_week_profile",
]
