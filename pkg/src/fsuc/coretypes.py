"""Core data types for the scheduling engine.

All quantities are kept in base units internally: MW, MWh, MVA.s for inertia,
Hz, hours for times on the scheduling axis, seconds for times on the frequency
axis, and GBP for money. Reports convert where stated (inertia to GVA.s).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

# Frequency-security standards: which infeed loss the schedule is secured
# against and whether that loss is a fixed magnitude or an optimized variable.
N1_FIXED = "N1_fixed"
N2_FIXED = "N2_fixed"
N1_OPTIMIZED = "N1_optimized"
STANDARDS = (N1_FIXED, N2_FIXED, N1_OPTIMIZED)

# Default value of lost load used when a case does not specify one.  GBP/MWh.
DEFAULT_VOLL = 30_000.0


@dataclass(frozen=True)
class ThermalUnit:
    """One thermal generator class; `count` identical clones share the data."""

    name: str
    count: int = 1
    p_max: float = 0.0          # MW, rated output
    p_msg: float = 0.0          # MW, minimum stable generation while committed
    ramp_rate: float = 0.0      # MW/h, symmetric up/down
    cost_noload: float = 0.0    # GBP/h while committed
    cost_marginal: float = 0.0  # GBP/MWh on energy produced
    cost_startup: float = 0.0   # GBP per start
    t_startup: int = 0          # h between the start decision and synchronism
    t_min_up: int = 0           # h minimum time online after a start
    t_min_down: int = 0         # h minimum time offline after a shutdown
    inertia_const: float = 0.0  # s, inertia constant on the unit's MVA rating
    pfr_max: float = 0.0        # MW, primary frequency response ceiling
    must_run: bool = False      # committed in every hour when True


@dataclass(frozen=True)
class StorageUnit:
    """Grid storage; charge/discharge efficiencies are one-way values."""

    name: str
    p_charge_max: float = 0.0     # MW
    p_discharge_max: float = 0.0  # MW
    e_min: float = 0.0            # MWh
    e_max: float = 0.0            # MWh
    eta_charge: float = 1.0       # (0, 1]
    eta_discharge: float = 1.0    # (0, 1]
    efr_max: float = 0.0          # MW of enhanced frequency response
    e_initial: Optional[float] = None  # MWh; defaults to e_max / 2


@dataclass(frozen=True)
class FreqSecurityParams:
    """Parameters of the post-fault frequency-security requirements."""

    f0: float = 50.0            # Hz, nominal frequency
    rocof_max: float = 1.0      # Hz/s, admissible rate of change of frequency
    delta_f_max: float = 0.8    # Hz, admissible quasi-instantaneous deviation
    t_efr: float = 1.0          # s, full-delivery time of EFR
    t_pfr: float = 10.0         # s, full-delivery time of PFR
    h_loss: float = 5.0         # s, inertia constant of the outaged unit
    standard: str = N1_FIXED
    p_loss_fixed: float = 0.0   # MW, loss magnitude for the fixed standards


@dataclass(frozen=True)
class SystemCase:
    """A complete scheduling case: fleet, profiles and security settings."""

    name: str
    thermal: tuple[ThermalUnit, ...]
    storage: tuple[StorageUnit, ...]
    demand: np.ndarray            # MW per hour
    res_forecast: np.ndarray      # MW per hour, total renewable infeed
    freq: FreqSecurityParams
    efr_procured_cap: float = 0.0  # MW, system-wide EFR procurement ceiling
    voll: float = DEFAULT_VOLL     # GBP/MWh on shed demand
    secured: bool = True           # frequency constraints active when True


@dataclass(frozen=True)
class CostBreakdown:
    """Schedule cost split by source; components sum to `total`."""

    no_load: float = 0.0
    marginal: float = 0.0
    startup: float = 0.0
    shed_penalty: float = 0.0
    penalty: float = 0.0  # security-slack penalty from fallback hours

    @property
    def total(self) -> float:
        return (self.no_load + self.marginal + self.startup
                + self.shed_penalty + self.penalty)


@dataclass
class ScheduleResult:
    """Dispatch and security quantities, one row per (node, time) pair.

    One-shot solves carry every tree node; rolling runs carry the realized
    path with one node per hour and probability 1.  Inertia is in MVA.s.
    """

    times: np.ndarray             # hour index per row
    node_ids: np.ndarray          # scenario node id per row
    probability: np.ndarray       # reach probability per row
    unit_names: list[str]         # expanded clone names
    storage_names: list[str]
    commitment: np.ndarray        # [rows, units]
    dispatch: np.ndarray          # [rows, units] MW
    pfr: np.ndarray               # [rows, units] MW
    start_events: np.ndarray      # [rows, units] start-generating indicator
    charge: np.ndarray            # [rows, storage] MW
    discharge: np.ndarray         # [rows, storage] MW
    soc: np.ndarray               # [rows, storage] MWh
    efr: np.ndarray               # [rows, storage] MW
    demand: np.ndarray            # [rows] MW
    res_available: np.ndarray     # [rows] MW
    curtailment: np.ndarray       # [rows] MW
    shed: np.ndarray              # [rows] MW
    inertia: np.ndarray           # [rows] MVA.s
    p_loss: np.ndarray            # [rows] MW secured-against loss
    efr_total: np.ndarray         # [rows] MW
    pfr_total: np.ndarray         # [rows] MW
    costs: CostBreakdown = field(default_factory=CostBreakdown)
    secured: bool = True
    fallback_hours: list[int] = field(default_factory=list)

    @property
    def total_cost(self) -> float:
        return self.costs.total


@dataclass(frozen=True)
class Violation:
    """One case-validation failure, naming the offending field and the rule."""

    field: str
    rule: str

    def __str__(self) -> str:
        return f"{self.field}: {self.rule}"


# ---------------------------------------------------------------------------
# Fleet helpers
# ---------------------------------------------------------------------------

def expand_thermal(units: Sequence[ThermalUnit]) -> list[tuple[str, ThermalUnit]]:
    """Expand `count` clones into individually named units.

    Clone names append a 1-based suffix; a count of one keeps the bare name.
    """
    out: list[tuple[str, ThermalUnit]] = []
    for unit in units:
        if unit.count == 1:
            out.append((unit.name, unit))
        else:
            for i in range(unit.count):
                out.append((f"{unit.name}_{i + 1:02d}", unit))
    return out


def largest_unit(case: SystemCase) -> Optional[ThermalUnit]:
    """The thermal unit class with the highest rated output, if any."""
    if not case.thermal:
        return None
    return max(case.thermal, key=lambda u: u.p_max)


def total_rotating_capacity(case: SystemCase) -> float:
    """MW of synchronous capacity if every thermal unit were committed."""
    return float(sum(u.p_max * u.count for u in case.thermal))


def total_pfr_capability(case: SystemCase) -> float:
    """MW of PFR if every thermal unit were committed at zero output."""
    return float(sum(min(u.pfr_max, u.p_max) * u.count for u in case.thermal))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _check(violations: list[Violation], ok: bool, field_name: str, rule: str) -> None:
    if not ok:
        violations.append(Violation(field_name, rule))


def validate_thermal(unit: ThermalUnit, prefix: str = "") -> list[Violation]:
    """Violations for one thermal unit class; empty list when well formed."""
    v: list[Violation] = []
    p = f"{prefix}{unit.name}."
    _check(v, bool(unit.name), p + "name", "name must be non-empty")
    _check(v, unit.count >= 1 and int(unit.count) == unit.count,
           p + "count", "count must be a positive integer")
    _check(v, unit.p_max > 0, p + "p_max", "p_max must be positive")
    _check(v, 0 <= unit.p_msg <= unit.p_max,
           p + "p_msg", "p_msg must lie in [0, p_max]")
    _check(v, unit.ramp_rate >= 0, p + "ramp_rate", "ramp_rate must be >= 0")
    _check(v, unit.cost_noload >= 0, p + "cost_noload", "cost must be >= 0")
    _check(v, unit.cost_marginal >= 0, p + "cost_marginal", "cost must be >= 0")
    _check(v, unit.cost_startup >= 0, p + "cost_startup", "cost must be >= 0")
    _check(v, unit.t_startup >= 0 and int(unit.t_startup) == unit.t_startup,
           p + "t_startup", "t_startup must be a non-negative integer of hours")
    _check(v, unit.t_min_up >= 0 and int(unit.t_min_up) == unit.t_min_up,
           p + "t_min_up", "t_min_up must be a non-negative integer of hours")
    _check(v, unit.t_min_down >= 0 and int(unit.t_min_down) == unit.t_min_down,
           p + "t_min_down", "t_min_down must be a non-negative integer of hours")
    _check(v, unit.inertia_const >= 0,
           p + "inertia_const", "inertia_const must be >= 0")
    _check(v, 0 <= unit.pfr_max <= unit.p_max,
           p + "pfr_max", "pfr_max must lie in [0, p_max]")
    return v


def validate_storage(unit: StorageUnit, prefix: str = "") -> list[Violation]:
    """Violations for one storage unit; empty list when well formed."""
    v: list[Violation] = []
    p = f"{prefix}{unit.name}."
    _check(v, bool(unit.name), p + "name", "name must be non-empty")
    _check(v, unit.p_charge_max >= 0,
           p + "p_charge_max", "p_charge_max must be >= 0")
    _check(v, unit.p_discharge_max >= 0,
           p + "p_discharge_max", "p_discharge_max must be >= 0")
    _check(v, 0 <= unit.e_min <= unit.e_max,
           p + "e_min", "energy bounds must satisfy 0 <= e_min <= e_max")
    _check(v, 0 < unit.eta_charge <= 1,
           p + "eta_charge", "efficiency must lie in (0, 1]")
    _check(v, 0 < unit.eta_discharge <= 1,
           p + "eta_discharge", "efficiency must lie in (0, 1]")
    _check(v, 0 <= unit.efr_max <= unit.p_charge_max + unit.p_discharge_max,
           p + "efr_max", "efr_max must lie in [0, p_charge_max + p_discharge_max]")
    if unit.e_initial is not None:
        _check(v, unit.e_min <= unit.e_initial <= unit.e_max,
               p + "e_initial", "e_initial must lie in [e_min, e_max]")
    return v


def validate_freq(params: FreqSecurityParams, prefix: str = "freq.",
                  require_loss: bool = True) -> list[Violation]:
    """Violations for the frequency-security parameters.

    `require_loss` applies the fixed-loss magnitude rule; unsecured cases
    never constrain against the loss and may leave it unset.
    """
    v: list[Violation] = []
    _check(v, params.f0 > 0, prefix + "f0", "f0 must be positive")
    _check(v, params.rocof_max > 0, prefix + "rocof_max", "rocof_max must be positive")
    _check(v, params.delta_f_max > 0,
           prefix + "delta_f_max", "delta_f_max must be positive")
    _check(v, 0 < params.t_efr < params.t_pfr,
           prefix + "t_efr", "delivery times must satisfy 0 < t_efr < t_pfr")
    _check(v, params.h_loss >= 0, prefix + "h_loss", "h_loss must be >= 0")
    _check(v, params.standard in STANDARDS,
           prefix + "standard", f"standard must be one of {STANDARDS}")
    if require_loss and params.standard in (N1_FIXED, N2_FIXED):
        _check(v, params.p_loss_fixed > 0,
               prefix + "p_loss_fixed", "fixed standards need p_loss_fixed > 0")
    return v


def validate_case(case: SystemCase) -> list[Violation]:
    """Full case validation. Pure and idempotent; returns [] when valid."""
    v: list[Violation] = []
    _check(v, bool(case.name), "name", "case name must be non-empty")

    names = [u.name for u in case.thermal] + [s.name for s in case.storage]
    _check(v, len(names) == len(set(names)), "thermal", "unit names must be unique")

    for unit in case.thermal:
        v.extend(validate_thermal(unit, "thermal."))
    for unit in case.storage:
        v.extend(validate_storage(unit, "storage."))
    v.extend(validate_freq(case.freq, require_loss=case.secured))

    demand = np.asarray(case.demand, dtype=float)
    res = np.asarray(case.res_forecast, dtype=float)
    _check(v, demand.ndim == 1 and res.ndim == 1,
           "demand", "demand and res_forecast must be one-dimensional")
    _check(v, demand.shape == res.shape,
           "res_forecast", "demand and res_forecast must have equal length")
    if demand.ndim == 1:
        _check(v, demand.size > 0, "demand", "demand must be non-empty")
        _check(v, bool(np.all(demand >= 0)), "demand", "demand must be >= 0")
    if res.ndim == 1:
        _check(v, bool(np.all(res >= 0)), "res_forecast", "res must be >= 0")

    _check(v, case.voll > 0, "voll", "voll must be positive")
    _check(v, case.efr_procured_cap >= 0,
           "efr_procured_cap", "efr_procured_cap must be >= 0")

    if case.freq.standard == N1_OPTIMIZED:
        big = largest_unit(case)
        _check(v, big is not None and big.must_run,
               "freq.standard",
               "optimized loss requires the largest thermal unit to be must-run")
    return v
