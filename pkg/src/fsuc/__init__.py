"""Frequency-secured stochastic unit commitment for a GB-scale power system.

The package schedules energy, inertia, enhanced frequency response (EFR) and
primary frequency response (PFR) together, and prices ancillary services as the
cost gap between a frequency-secured schedule and an energy-only schedule.

Modules
-------
coretypes    fleet, storage and frequency-security parameter types
freqsec      rate-of-change-of-frequency and nadir algebra, cuts, ODE oracle
ucmodel      unit-commitment linear program assembly
solver       bundled simplex / branch-and-bound plus scipy backend
scenario     forecast-error scenario trees and the rolling planner
ingest       case files, synthetic profiles, result round-trip
experiments  seasonal cost and dispatch studies, table and figure output
"""

__version__ = "0.1.0"

from . import (coretypes, experiments, freqsec, ingest, scenario,  # noqa: F401
               solver, ucmodel)
from .coretypes import (FreqSecurityParams, ScheduleResult,  # noqa: F401
                        StorageUnit, SystemCase, ThermalUnit)
from .ingest import load_case, load_case_file  # noqa: F401
from .scenario import ForecastErrorModel, build_tree, rolling_run  # noqa: F401
from .ucmodel import UcOptions, assemble  # noqa: F401
