"""Unit-commitment model assembly: variables, constraints, objective.

The module turns a SystemCase plus a scenario tree into a LinearProgram with
full variable/constraint metadata, and extracts ScheduleResults from solver
outcomes.  Frequency security enters as linear rows: an inertia floor for
RoCoF, conservative nadir cuts, a quasi-steady-state response requirement and
the inertia accounting equality.
"""

from .lp import (  # noqa: F401
    LinearProgram,
    SENSE_EQ,
    SENSE_GE,
    SENSE_LE,
)
from .build import (  # noqa: F401
    AssembledUc,
    InitialState,
    UcOptions,
    add_frequency_constraints,
    add_load_balance,
    add_storage_constraints,
    add_thermal_constraints,
    assemble,
    build_objective,
    default_initial_state,
    extract_schedule,
    set_frequency_slack,
    update_for_step,
)
