"""Experiment drivers: seasonal rolling studies over a bundled case.

Every study reduces to rolling runs ("arms") of the same case under
different security settings.  Arms are cached by their full parameter key
so studies sharing an arm (the energy-only baseline, the default secured
run) never recompute it; on a single core that sharing is what keeps the
full study set inside its runtime budget.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..coretypes import (N1_FIXED, N1_OPTIMIZED, N2_FIXED, STANDARDS,
                         SystemCase, expand_thermal)
from ..ingest import CaseFile, build_case, case_profiles, load_case_file, res_capacity
from ..scenario import ForecastErrorModel, rolling_run
from ..solver import SolveOptions
from ..ucmodel import UcOptions

EXPERIMENTS = ("cost_split", "inertia_hist", "week_profile", "efr_sweep",
               "reliability_compare")

# Day-of-year starts of the four representative weeks (winter, spring,
# summer, autumn on the synthetic seasonal cycle).
SEASON_STARTS = {"winter": 0, "spring": 91, "summer": 182, "autumn": 274}

# Year length used to synthesize the profile pool the weeks are cut from.
_YEAR_DAYS = 366


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment invocation."""

    case_path: str
    experiment: str
    out_dir: str
    steps: int = 168                 # h per seasonal segment
    seed: Optional[int] = None       # profile seed override
    efr_caps: tuple[float, ...] = (500.0, 1000.0, 1500.0)
    standards: tuple[str, ...] = (N1_FIXED, N2_FIXED, N1_OPTIMIZED)
    rocof: Optional[float] = None    # Hz/s override on secured arms
    unsecured: bool = False          # run the energy-only variant instead
    full_year: bool = False          # one contiguous year instead of 4 weeks
    n2_p_loss: float = 2800.0        # MW, largest unit plus inertia-free infeed
    horizon: Optional[int] = None    # h, rolling window override
    backend: str = "auto"
    time_limit: Optional[float] = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment '{self.experiment}'; "
                             f"choose from {EXPERIMENTS}")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.experiment == "efr_sweep" and not self.efr_caps:
            raise ValueError("efr_sweep needs at least one cap")
        if self.experiment == "reliability_compare" and not self.standards:
            raise ValueError("reliability_compare needs at least one standard")
        for s in self.standards:
            if s not in STANDARDS:
                raise ValueError(f"unknown standard '{s}'")


@dataclass
class ArmResult:
    """One rolling run, summed over its seasonal segments."""

    key: tuple
    segments: dict                    # season -> ScheduleResult
    cost: float                       # GBP, committed-hour total
    fallback_hours: int               # count across segments
    inertia: np.ndarray               # MVA.s, hourly, concatenated
    p_loss: np.ndarray                # MW, hourly, concatenated

    @property
    def mean_p_loss(self) -> float:
        return float(self.p_loss.mean())


def _segment_starts(spec: ExperimentSpec) -> dict[str, int]:
    if spec.full_year:
        return {"year": 0}
    return {k: d * 24 for k, d in SEASON_STARTS.items()}


def _segment_steps(spec: ExperimentSpec) -> int:
    if spec.full_year:
        return (_YEAR_DAYS - 2) * 24
    return spec.steps


def run_arm(case_file: CaseFile, spec: ExperimentSpec, *, secured: bool,
            efr_cap: Optional[float] = None, standard: Optional[str] = None,
            p_loss: Optional[float] = None,
            cache: Optional[dict] = None) -> ArmResult:
    """Rolling run of the case over the spec's segments; cached by key."""
    horizon = spec.horizon or case_file.scenario.horizon
    steps = _segment_steps(spec)
    rocof = spec.rocof if secured else None
    key = (secured, efr_cap, standard, p_loss, rocof, steps, spec.seed,
           spec.full_year, horizon)
    if cache is not None and key in cache:
        return cache[key]

    year = build_case(case_file, days=_YEAR_DAYS, seed=spec.seed,
                      secured=secured, standard=standard, rocof=rocof,
                      p_loss=p_loss, efr_cap=efr_cap)
    model = ForecastErrorModel(capacity=res_capacity(case_file),
                               sigma1=case_file.scenario.sigma1,
                               quantiles=case_file.scenario.quantiles,
                               branch_stages=case_file.scenario.branch_stages)
    solve_options = SolveOptions(backend=spec.backend,
                                 time_limit=spec.time_limit)
    segments = {}
    for season, start in _segment_starts(spec).items():
        stop = start + steps + horizon - 1
        if stop > len(year.demand):
            raise ValueError(f"segment '{season}' needs hours up to {stop}, "
                             f"profiles cover {len(year.demand)}")
        seg_case = dataclasses.replace(
            year, demand=year.demand[start:stop],
            res_forecast=year.res_forecast[start:stop])
        segments[season] = rolling_run(
            seg_case, model, steps=steps, horizon=horizon,
            uc_options=UcOptions(secured=secured),
            solve_options=solve_options)

    ordered = [segments[k] for k in segments]
    arm = ArmResult(
        key=key, segments=segments,
        cost=float(sum(r.costs.total for r in ordered)),
        fallback_hours=int(sum(len(r.fallback_hours) for r in ordered)),
        inertia=np.concatenate([r.inertia for r in ordered]),
        p_loss=np.concatenate([r.p_loss for r in ordered]))
    if cache is not None:
        cache[key] = arm
    return arm


# ---------------------------------------------------------------------------
# Studies
# ---------------------------------------------------------------------------

@dataclass
class CostSplitReport:
    rows: list                 # (season, secured, unsecured, ancillary)
    secured_cost: float
    unsecured_cost: float
    ancillary_cost: float
    share: float               # ancillary / secured
    fallback_hours: int


def run_cost_split(spec: ExperimentSpec,
                   cache: Optional[dict] = None) -> CostSplitReport:
    """Ancillary-services cost as secured minus energy-only cost."""
    cf = load_case_file(spec.case_path)
    cache = cache if cache is not None else {}
    sec = run_arm(cf, spec, secured=True, cache=cache)
    uns = run_arm(cf, spec, secured=False, cache=cache)
    rows = []
    for season in sec.segments:
        cs = sec.segments[season].costs.total
        cu = uns.segments[season].costs.total
        rows.append((season, cs, cu, cs - cu))
    total_s, total_u = sec.cost, uns.cost
    return CostSplitReport(
        rows=rows, secured_cost=total_s, unsecured_cost=total_u,
        ancillary_cost=total_s - total_u,
        share=(total_s - total_u) / total_s if total_s else 0.0,
        fallback_hours=sec.fallback_hours + uns.fallback_hours)


@dataclass
class InertiaHistReport:
    bin_edges: np.ndarray      # GVA.s, 1 GVA.s wide
    counts: np.ndarray
    modes: list                # GVA.s bin centers of local maxima
    min_inertia: float         # GVA.s
    hours: int
    fallback_hours: int


def _histogram_modes(counts: np.ndarray) -> list[int]:
    """Indices of strict local maxima (plateaus count once, at their left)."""
    modes = []
    n = len(counts)
    for i in range(n):
        left = counts[i - 1] if i > 0 else -1
        right = counts[i + 1] if i < n - 1 else -1
        if counts[i] > left and counts[i] >= right and counts[i] > 0:
            modes.append(i)
    return modes


def run_inertia_hist(spec: ExperimentSpec,
                     cache: Optional[dict] = None) -> InertiaHistReport:
    """Distribution of scheduled system inertia, 1 GVA.s bins."""
    cf = load_case_file(spec.case_path)
    cache = cache if cache is not None else {}
    arm = run_arm(cf, spec, secured=not spec.unsecured, cache=cache)
    h_gva = arm.inertia / 1000.0
    lo = np.floor(h_gva.min())
    hi = np.ceil(h_gva.max())
    edges = np.arange(lo, max(hi, lo + 1) + 1.0, 1.0)
    counts, _ = np.histogram(h_gva, bins=edges)
    mode_idx = _histogram_modes(counts)
    return InertiaHistReport(
        bin_edges=edges, counts=counts,
        modes=[float(edges[i] + 0.5) for i in mode_idx],
        min_inertia=float(h_gva.min()), hours=int(h_gva.size),
        fallback_hours=arm.fallback_hours)


@dataclass
class WeekProfileReport:
    hours: np.ndarray           # hour index within the week
    demand: np.ndarray          # MW
    res_available: np.ndarray   # MW
    curtailment: np.ndarray     # MW
    shed: np.ndarray            # MW
    categories: dict            # class name -> MW dispatched per hour
    storage_charge: np.ndarray
    storage_discharge: np.ndarray
    inertia: np.ndarray         # MVA.s
    surplus_hours: int          # hours with RES >= demand
    signature_hours: int        # curtailing while synchronous units run
    fallback_hours: int


def _high_res_week_start(case: SystemCase, steps: int, horizon: int) -> int:
    """Hour index starting the week with the largest renewable surplus."""
    res, dem = case.res_forecast, case.demand
    surplus = np.clip(res - dem, 0.0, None)
    csum = np.concatenate([[0.0], np.cumsum(surplus)])
    last = len(dem) - (steps + horizon - 1)
    day_starts = np.arange(0, last + 1, 24)
    scores = csum[day_starts + steps] - csum[day_starts]
    return int(day_starts[np.argmax(scores)])


def run_week_profile(spec: ExperimentSpec,
                     cache: Optional[dict] = None) -> WeekProfileReport:
    """Hour-by-hour dispatch by plant class over the highest-RES week."""
    cf = load_case_file(spec.case_path)
    horizon = spec.horizon or cf.scenario.horizon
    secured = not spec.unsecured
    year = build_case(cf, days=_YEAR_DAYS, seed=spec.seed, secured=secured,
                      rocof=spec.rocof if secured else None)
    start = _high_res_week_start(year, spec.steps, horizon)
    seg = dataclasses.replace(
        year, demand=year.demand[start:start + spec.steps + horizon - 1],
        res_forecast=year.res_forecast[start:start + spec.steps + horizon - 1])
    model = ForecastErrorModel(capacity=res_capacity(cf),
                               sigma1=cf.scenario.sigma1,
                               quantiles=cf.scenario.quantiles,
                               branch_stages=cf.scenario.branch_stages)
    result = rolling_run(seg, model, steps=spec.steps, horizon=horizon,
                         uc_options=UcOptions(secured=secured),
                         solve_options=SolveOptions(backend=spec.backend,
                                                    time_limit=spec.time_limit))

    class_of = [unit.name for _, unit in expand_thermal(year.thermal)]
    categories = {}
    for cls in dict.fromkeys(class_of):
        cols = [i for i, c in enumerate(class_of) if c == cls]
        categories[cls] = result.dispatch[:, cols].sum(axis=1)

    res_used = result.res_available - result.curtailment
    synchronous = result.commitment.sum(axis=1)
    surplus = result.res_available >= result.demand
    signature = (result.curtailment > 1e-6) & (synchronous > 1e-6)
    return WeekProfileReport(
        hours=result.times.copy(), demand=result.demand.copy(),
        res_available=result.res_available.copy(),
        curtailment=result.curtailment.copy(), shed=result.shed.copy(),
        categories=categories,
        storage_charge=result.charge.sum(axis=1),
        storage_discharge=result.discharge.sum(axis=1),
        inertia=result.inertia.copy(),
        surplus_hours=int(surplus.sum()),
        signature_hours=int(signature.sum()),
        fallback_hours=len(result.fallback_hours))


@dataclass
class EfrSweepReport:
    rows: list                 # (cap MW, secured cost, ancillary cost)
    unsecured_cost: float
    fallback_hours: int


def run_efr_sweep(spec: ExperimentSpec,
                  cache: Optional[dict] = None) -> EfrSweepReport:
    """Ancillary cost as a function of the EFR procurement cap."""
    cf = load_case_file(spec.case_path)
    cache = cache if cache is not None else {}
    uns = run_arm(cf, spec, secured=False, cache=cache)
    rows = []
    fallback = uns.fallback_hours
    for cap in spec.efr_caps:
        arm = run_arm(cf, spec, secured=True, efr_cap=float(cap), cache=cache)
        rows.append((float(cap), arm.cost, arm.cost - uns.cost))
        fallback += arm.fallback_hours
    return EfrSweepReport(rows=rows, unsecured_cost=uns.cost,
                          fallback_hours=fallback)


@dataclass
class ReliabilityReport:
    rows: list                 # (standard, secured cost, ancillary, mean loss MW,
                               #  fallback hours)
    unsecured_cost: float
    efr_cap: float
    fallback_hours: int


def run_reliability_compare(spec: ExperimentSpec,
                            cache: Optional[dict] = None,
                            efr_cap: float = 1500.0) -> ReliabilityReport:
    """Securing cost under different reliability standards, EFR cap fixed."""
    cf = load_case_file(spec.case_path)
    cache = cache if cache is not None else {}
    uns = run_arm(cf, spec, secured=False, cache=cache)
    rows = []
    fallback = uns.fallback_hours
    for standard in spec.standards:
        p_loss = spec.n2_p_loss if standard == N2_FIXED else None
        arm = run_arm(cf, spec, secured=True, efr_cap=efr_cap,
                      standard=standard, p_loss=p_loss, cache=cache)
        rows.append((standard, arm.cost, arm.cost - uns.cost,
                     arm.mean_p_loss, arm.fallback_hours))
        fallback += arm.fallback_hours
    return ReliabilityReport(rows=rows, unsecured_cost=uns.cost,
                             efr_cap=efr_cap, fallback_hours=fallback)
