"""Case files, synthetic profiles and result persistence.

A case file is a YAML document holding the fleet, the frequency-security
parameters, the scenario-model settings and either synthetic-profile
parameters or references to profile CSV files.  Unknown keys are rejected
so typos fail loudly.  Results round-trip through JSON and flatten to a
comma-separated table for plotting.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import numpy as np
import yaml
from scipy.signal import lfilter

from .coretypes import (CostBreakdown, FreqSecurityParams, ScheduleResult,
                        StorageUnit, SystemCase, ThermalUnit, validate_case)


# ---------------------------------------------------------------------------
# Case files
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SyntheticProfiles:
    """Parameters of the seeded profile generator."""

    demand_peak: float       # MW, series maximum
    demand_min: float        # MW, series minimum
    wind_capacity: float     # MW installed
    solar_capacity: float    # MW installed
    seed: int = 2030
    days: int = 7

    def __post_init__(self):
        if not self.demand_peak > self.demand_min >= 0:
            raise ValueError("demand_peak must exceed demand_min >= 0")
        if self.wind_capacity < 0 or self.solar_capacity < 0:
            raise ValueError("capacities must be non-negative")
        if self.days < 1:
            raise ValueError("days must be at least 1")


@dataclass(frozen=True)
class ProfileFiles:
    """References to externally supplied hourly CSV series."""

    demand: str   # path, relative to the case file
    res: str


@dataclass(frozen=True)
class ScenarioSpec:
    """Scenario-model settings carried by a case."""

    sigma1: float = 0.03
    quantiles: tuple[float, ...] = (10.0, 50.0, 90.0)
    branch_stages: tuple[int, ...] = (1, 5)
    horizon: int = 12            # h, rolling window length

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")


@dataclass(frozen=True)
class CaseFile:
    """Parsed case document; `build_case` turns it into a SystemCase."""

    name: str
    thermal: tuple[ThermalUnit, ...]
    storage: tuple[StorageUnit, ...]
    freq: FreqSecurityParams
    efr_procured_cap: float
    voll: float
    profiles: Union[SyntheticProfiles, ProfileFiles]
    scenario: ScenarioSpec


def _fields(cls) -> dict:
    return {f.name: f for f in dataclasses.fields(cls)}


def _parse_section(cls, raw: dict, where: str, **fixed):
    """Build a dataclass from a mapping, rejecting unknown keys."""
    if not isinstance(raw, dict):
        raise ValueError(f"{where}: expected a mapping, got {type(raw).__name__}")
    allowed = _fields(cls)
    unknown = set(raw) - set(allowed) - set(fixed)
    if unknown:
        raise ValueError(f"{where}: unknown keys {sorted(unknown)}")
    kwargs = dict(fixed)
    for key, value in raw.items():
        if key in fixed:
            continue
        if isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ValueError(f"{where}: {exc}") from exc


_TOP_KEYS = ("name", "thermal", "storage", "frequency", "efr_procured_cap",
             "voll", "profiles", "scenario")


def load_case_file(path: Union[str, Path]) -> CaseFile:
    """Parse and validate a case document."""
    path = Path(path)
    with open(path) as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ValueError(f"{path}: parse error: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: expected a mapping at the top level")
    unknown = set(raw) - set(_TOP_KEYS)
    if unknown:
        raise ValueError(f"{path}: unknown keys {sorted(unknown)}")
    for key in ("name", "thermal", "frequency", "profiles"):
        if key not in raw:
            raise ValueError(f"{path}: missing section '{key}'")

    thermal = tuple(_parse_section(ThermalUnit, t, f"{path}: thermal[{i}]")
                    for i, t in enumerate(raw["thermal"]))
    storage = tuple(_parse_section(StorageUnit, s, f"{path}: storage[{i}]")
                    for i, s in enumerate(raw.get("storage", []) or []))
    freq = _parse_section(FreqSecurityParams, raw["frequency"],
                          f"{path}: frequency")

    prof_raw = raw["profiles"]
    if not isinstance(prof_raw, dict) or len(prof_raw) != 1:
        raise ValueError(f"{path}: profiles must hold exactly one of "
                         f"'synthetic' or 'files'")
    kind, body = next(iter(prof_raw.items()))
    if kind == "synthetic":
        profiles = _parse_section(SyntheticProfiles, body,
                                  f"{path}: profiles.synthetic")
    elif kind == "files":
        profiles = _parse_section(ProfileFiles, body, f"{path}: profiles.files")
    else:
        raise ValueError(f"{path}: profiles.{kind} is not a known source")

    scenario = _parse_section(ScenarioSpec, raw.get("scenario", {}) or {},
                              f"{path}: scenario")
    return CaseFile(name=str(raw["name"]), thermal=thermal, storage=storage,
                    freq=freq, efr_procured_cap=float(raw.get("efr_procured_cap", 0.0)),
                    voll=float(raw.get("voll", 30_000.0)),
                    profiles=profiles, scenario=scenario)


def save_case_file(case_file: CaseFile, path: Union[str, Path]) -> None:
    """Write a case document; inverse of load_case_file."""
    def clean(obj):
        d = dataclasses.asdict(obj)
        return {k: (list(v) if isinstance(v, tuple) else v)
                for k, v in d.items()}

    if isinstance(case_file.profiles, SyntheticProfiles):
        profiles = {"synthetic": clean(case_file.profiles)}
    else:
        profiles = {"files": clean(case_file.profiles)}
    doc = {
        "name": case_file.name,
        "voll": case_file.voll,
        "efr_procured_cap": case_file.efr_procured_cap,
        "frequency": clean(case_file.freq),
        "thermal": [clean(t) for t in case_file.thermal],
        "storage": [clean(s) for s in case_file.storage],
        "profiles": profiles,
        "scenario": clean(case_file.scenario),
    }
    with open(path, "w") as fh:
        yaml.safe_dump(doc, fh, sort_keys=False)


def bundled_case_path(name: str = "gb2030") -> Path:
    """Filesystem path of a case document shipped with the package."""
    ref = resources.files("fsuc").joinpath("data", f"{name}.yaml")
    with resources.as_file(ref) as p:
        return Path(p)


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Profiles:
    """Hourly series in MW, equal length."""

    demand: np.ndarray
    wind: np.ndarray
    solar: np.ndarray

    @property
    def res(self) -> np.ndarray:
        return self.wind + self.solar


def synth_profiles(seed: int, days: int, demand_peak: float, demand_min: float,
                   wind_cap: float, solar_cap: float) -> Profiles:
    """Deterministic seeded demand and renewable series.

    Demand is a seasonal plus diurnal shape with smooth seeded noise,
    affinely rescaled so the series minimum and maximum hit the requested
    bounds exactly.  Solar follows a clear-sky half-sine, zero at night,
    scaled by a seeded daily factor with a seasonal envelope.  Wind is a
    logistic-squashed first-order autoregressive process, so it is smooth
    and stays strictly inside [0, cap].
    """
    if not demand_peak > demand_min >= 0:
        raise ValueError("demand_peak must exceed demand_min >= 0")
    rng = np.random.default_rng(seed)
    hours = days * 24
    t = np.arange(hours)
    hour = t % 24
    day = t // 24

    diurnal = 0.5 * (1.0 - np.cos(2.0 * np.pi * (hour - 4.0) / 24.0))
    seasonal = 0.5 * (1.0 + np.cos(2.0 * np.pi * day / 365.25))
    noise = lfilter([1.0], [1.0, -0.9], rng.standard_normal(hours))
    shape = 0.6 * diurnal + 0.3 * seasonal + 0.04 * noise
    lo, hi = shape.min(), shape.max()
    demand = demand_min + (demand_peak - demand_min) * (shape - lo) / (hi - lo)

    sun = np.clip(np.sin(np.pi * (hour - 6.0) / 12.0), 0.0, None)
    season_sun = 0.5 * (1.0 - np.cos(2.0 * np.pi * (day - 172.0) / 365.25))
    daily = rng.uniform(0.25, 1.0, days)[day]
    solar = solar_cap * (0.3 + 0.7 * season_sun) * daily * sun

    z = lfilter([1.0], [1.0, -0.97], 0.25 * rng.standard_normal(hours))
    wind = wind_cap / (1.0 + np.exp(-(z - 0.6)))

    return Profiles(demand=demand, wind=wind, solar=solar)


def read_profile(path: Union[str, Path]) -> np.ndarray:
    """Hourly MW series from a two-column CSV (hour, mw)."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["hour", "mw"]:
        raise ValueError(f"{path}: expected header 'hour,mw'")
    hours = [int(r[0]) for r in rows[1:]]
    if hours != list(range(len(hours))):
        raise ValueError(f"{path}: hours must run 0..n-1 without gaps")
    values = np.array([float(r[1]) for r in rows[1:]])
    if np.any(values < 0):
        raise ValueError(f"{path}: negative values")
    return values


def write_profile(series: np.ndarray, path: Union[str, Path]) -> None:
    """Inverse of read_profile."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hour", "mw"])
        for i, v in enumerate(np.asarray(series, dtype=float)):
            w.writerow([i, str(float(v))])


def case_profiles(case_file: CaseFile, days: Optional[int] = None,
                  seed: Optional[int] = None,
                  base_dir: Optional[Path] = None) -> Profiles:
    """Resolve a case's profiles, synthetic or file-backed."""
    src = case_file.profiles
    if isinstance(src, SyntheticProfiles):
        return synth_profiles(seed if seed is not None else src.seed,
                              days if days is not None else src.days,
                              src.demand_peak, src.demand_min,
                              src.wind_capacity, src.solar_capacity)
    base = base_dir or Path(".")
    demand = read_profile(base / src.demand)
    res = read_profile(base / src.res)
    if demand.shape != res.shape:
        raise ValueError("demand and res profiles differ in length")
    return Profiles(demand=demand, wind=res, solar=np.zeros_like(res))


def res_capacity(case_file: CaseFile) -> float:
    """Installed renewable capacity backing the forecast-error model."""
    src = case_file.profiles
    if isinstance(src, SyntheticProfiles):
        return src.wind_capacity + src.solar_capacity
    return float("nan")


def build_case(case_file: CaseFile, *, days: Optional[int] = None,
               seed: Optional[int] = None, secured: bool = True,
               standard: Optional[str] = None, rocof: Optional[float] = None,
               p_loss: Optional[float] = None, efr_cap: Optional[float] = None,
               base_dir: Optional[Path] = None) -> SystemCase:
    """SystemCase from a case document, with study overrides applied."""
    prof = case_profiles(case_file, days=days, seed=seed, base_dir=base_dir)
    freq = case_file.freq
    updates = {}
    if standard is not None:
        updates["standard"] = standard
    if rocof is not None:
        updates["rocof_max"] = rocof
    if p_loss is not None:
        updates["p_loss_fixed"] = p_loss
    if updates:
        freq = dataclasses.replace(freq, **updates)
    case = SystemCase(
        name=case_file.name, thermal=case_file.thermal,
        storage=case_file.storage, demand=prof.demand, res_forecast=prof.res,
        freq=freq,
        efr_procured_cap=(case_file.efr_procured_cap if efr_cap is None
                          else efr_cap),
        voll=case_file.voll, secured=secured)
    validate_case(case)
    return case


def load_case(path: Union[str, Path], **overrides) -> SystemCase:
    """Validated SystemCase straight from a case document path."""
    path = Path(path)
    return build_case(load_case_file(path), base_dir=path.parent, **overrides)


# ---------------------------------------------------------------------------
# Result persistence
# ---------------------------------------------------------------------------

_RESULT_ARRAYS = ("times", "node_ids", "probability", "commitment", "dispatch",
                  "pfr", "start_events", "charge", "discharge", "soc", "efr",
                  "demand", "res_available", "curtailment", "shed", "inertia",
                  "p_loss", "efr_total", "pfr_total")
_INT_ARRAYS = ("times", "node_ids")


def write_result(result: ScheduleResult, path: Union[str, Path]) -> None:
    """Lossless JSON dump of a schedule result."""
    doc = {
        "unit_names": list(result.unit_names),
        "storage_names": list(result.storage_names),
        "secured": bool(result.secured),
        "fallback_hours": [int(t) for t in result.fallback_hours],
        "costs": dataclasses.asdict(result.costs),
    }
    for key in _RESULT_ARRAYS:
        doc[key] = np.asarray(getattr(result, key)).tolist()
    try:
        with open(path, "w") as fh:
            json.dump(doc, fh)
    except OSError as exc:
        raise OSError(f"writing {path}: {exc}") from exc


def read_result(path: Union[str, Path]) -> ScheduleResult:
    """Inverse of write_result."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise OSError(f"reading {path}: {exc}") from exc
    kwargs = {
        "unit_names": list(doc["unit_names"]),
        "storage_names": list(doc["storage_names"]),
        "secured": bool(doc["secured"]),
        "fallback_hours": [int(t) for t in doc["fallback_hours"]],
        "costs": CostBreakdown(**doc["costs"]),
    }
    n_rows = len(doc["times"])
    for key in _RESULT_ARRAYS:
        dtype = int if key in _INT_ARRAYS else float
        arr = np.asarray(doc[key], dtype=dtype)
        if arr.ndim == 1 and arr.size == 0 and key in (
                "commitment", "dispatch", "pfr", "start_events",
                "charge", "discharge", "soc", "efr"):
            arr = arr.reshape(n_rows, 0)
        kwargs[key] = arr
    return ScheduleResult(**kwargs)


def write_result_table(result: ScheduleResult, path: Union[str, Path]) -> None:
    """Flat per-row CSV export: one line per (node, time) pair.

    Inertia is exported in GVA.s; every other power quantity stays in MW.
    Floats are written with str() so fixtures are byte-stable.
    """
    units = result.unit_names
    stos = result.storage_names
    header = (["time", "node", "probability", "demand_mw", "res_mw",
               "curtailment_mw", "shed_mw", "inertia_gva_s", "p_loss_mw",
               "efr_total_mw", "pfr_total_mw"]
              + [f"p_{u}_mw" for u in units] + [f"y_{u}" for u in units]
              + [f"pfr_{u}_mw" for u in units]
              + [f"charge_{s}_mw" for s in stos]
              + [f"discharge_{s}_mw" for s in stos]
              + [f"soc_{s}_mwh" for s in stos] + [f"efr_{s}_mw" for s in stos])
    f = lambda v: str(float(v))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(len(result.times)):
            row = [str(int(result.times[i])), str(int(result.node_ids[i])),
                   f(result.probability[i]), f(result.demand[i]),
                   f(result.res_available[i]), f(result.curtailment[i]),
                   f(result.shed[i]), f(result.inertia[i] / 1000.0),
                   f(result.p_loss[i]), f(result.efr_total[i]),
                   f(result.pfr_total[i])]
            row += [f(v) for v in result.dispatch[i]]
            row += [f(v) for v in result.commitment[i]]
            row += [f(v) for v in result.pfr[i]]
            row += [f(v) for v in result.charge[i]]
            row += [f(v) for v in result.discharge[i]]
            row += [f(v) for v in result.soc[i]]
            row += [f(v) for v in result.efr[i]]
            w.writerow(row)
