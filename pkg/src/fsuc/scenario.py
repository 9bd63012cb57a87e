"""Scenario trees for renewable forecast error and the rolling driver.

Renewable infeed is the only uncertain quantity.  Forecast error after a
lead of `l` hours is normal with standard deviation sigma1 * sqrt(l) *
capacity; a tree discretises it into quantile branches at a fixed set of
branching stages.  Between branchings every node keeps the z-score of its
branch, and a later branching replaces the z-score instead of compounding
it, so the tree stays narrow.  Stage 0 is the realized hour and is never
branched.

The rolling driver re-solves the stochastic model each hour, commits the
root decisions, advances the unit and storage state and stitches the root
hours into one realized schedule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .coretypes import CostBreakdown, ScheduleResult, SystemCase
from .solver import SolveOptions, SolveOutcome, solve_mip
from .ucmodel import (AssembledUc, InitialState, UcOptions, assemble,
                      extract_schedule, set_frequency_slack, update_for_step)

_SLACK_TOL = 1e-6  # MW of security slack that flags an insecure hour


@dataclass(frozen=True)
class ForecastErrorModel:
    """Normal forecast-error process for aggregate renewable infeed."""

    capacity: float                       # MW, installed renewable capacity
    sigma1: float = 0.03                  # p.u. of capacity at 1 h lead
    quantiles: tuple[float, ...] = (10.0, 50.0, 90.0)   # percent
    branch_stages: tuple[int, ...] = (1, 5)             # stages that split

    def __post_init__(self):
        if self.capacity <= 0:
            raise ValueError("capacity must be positive")
        if self.sigma1 < 0:
            raise ValueError("sigma1 must be non-negative")
        q = np.asarray(self.quantiles, dtype=float)
        if q.size == 0 or np.any(q <= 0) or np.any(q >= 100):
            raise ValueError("quantiles must lie strictly inside (0, 100)")
        if np.any(np.diff(q) <= 0):
            raise ValueError("quantiles must be strictly increasing")
        if any(s <= 0 for s in self.branch_stages):
            raise ValueError("stage 0 is the realized hour; branch later")

    def sigma(self, lead: int) -> float:
        """Forecast-error standard deviation in MW after `lead` hours."""
        return self.sigma1 * np.sqrt(float(lead)) * self.capacity

    def zscores(self) -> np.ndarray:
        """Standard-normal z-score of each quantile branch."""
        return ndtri(np.asarray(self.quantiles, dtype=float) / 100.0)

    def branch_probabilities(self) -> np.ndarray:
        """Probability mass of each branch.

        The real line is split at the midpoints between adjacent quantile
        z-scores; each branch carries the normal mass of its interval, so
        the masses sum to one exactly.
        """
        z = self.zscores()
        if z.size == 1:
            return np.ones(1)
        mids = ndtr((z[:-1] + z[1:]) / 2.0)
        return np.diff(np.concatenate([[0.0], mids, [1.0]]))


@dataclass(frozen=True)
class ScenarioTree:
    """Node-indexed scenario tree, stage-major with the root first."""

    parent: np.ndarray   # node id of the parent, -1 at the root
    stage: np.ndarray    # hour offset from the root
    prob: np.ndarray     # absolute reach probability
    res: np.ndarray      # MW, renewable infeed per node
    demand: np.ndarray   # MW, demand per node
    zscore: np.ndarray = field(default=None)  # branch z-score per node

    def __post_init__(self):
        n = len(self.parent)
        for name in ("stage", "prob", "res", "demand"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} length differs from parent length")
        if self.zscore is None:
            object.__setattr__(self, "zscore", np.zeros(n))

    @property
    def n_nodes(self) -> int:
        return len(self.parent)

    @property
    def horizon(self) -> int:
        return int(self.stage.max()) + 1 if self.n_nodes else 0

    def stage_nodes(self, t: int) -> np.ndarray:
        """Node ids at stage `t`, in tree order."""
        return np.nonzero(self.stage == t)[0]


def chain_tree(demand: Sequence[float], res: Sequence[float]) -> ScenarioTree:
    """Deterministic single-path tree over the given profiles."""
    demand = np.asarray(demand, dtype=float)
    res = np.asarray(res, dtype=float)
    if demand.shape != res.shape or demand.ndim != 1 or demand.size == 0:
        raise ValueError("demand and res must be equal-length 1-d profiles")
    t = demand.size
    return ScenarioTree(parent=np.arange(-1, t - 1), stage=np.arange(t),
                        prob=np.ones(t), res=res.copy(), demand=demand.copy(),
                        zscore=np.zeros(t))


def build_tree(model: ForecastErrorModel,
               demand: Sequence[float],
               res_forecast: Sequence[float],
               res_realized: Optional[float] = None) -> ScenarioTree:
    """Quantile scenario tree over a forecast window.

    The root carries the realized infeed (the stage-0 forecast unless
    `res_realized` is given).  At each branching stage every node splits
    into one child per quantile; elsewhere nodes continue on their branch.
    A node's infeed is the forecast shifted by z * sigma(stage), clipped
    into [0, capacity].
    """
    demand = np.asarray(demand, dtype=float)
    fc = np.asarray(res_forecast, dtype=float)
    if demand.shape != fc.shape or demand.ndim != 1 or demand.size == 0:
        raise ValueError("demand and res_forecast must be equal-length 1-d profiles")
    horizon = demand.size

    zs = model.zscores()
    mass = model.branch_probabilities()
    split_at = set(int(s) for s in model.branch_stages)

    root_res = fc[0] if res_realized is None else float(res_realized)
    parent = [-1]
    stage = [0]
    prob = [1.0]
    zval = [0.0]
    res = [float(np.clip(root_res, 0.0, model.capacity))]
    frontier = [0]

    for t in range(1, horizon):
        sigma = model.sigma(t)
        nxt = []
        for n in frontier:
            if t in split_at:
                branches = zip(zs, mass * prob[n])
            else:
                branches = [(zval[n], prob[n])]
            for z, p in branches:
                parent.append(n)
                stage.append(t)
                prob.append(float(p))
                zval.append(float(z))
                res.append(float(np.clip(fc[t] + z * sigma, 0.0, model.capacity)))
                nxt.append(len(parent) - 1)
        frontier = nxt

    stage_arr = np.array(stage)
    return ScenarioTree(parent=np.array(parent), stage=stage_arr,
                        prob=np.array(prob), res=np.array(res),
                        demand=demand[stage_arr], zscore=np.array(zval))


# ---------------------------------------------------------------------------
# Solving and the rolling driver
# ---------------------------------------------------------------------------

def solve_assembled(asm: AssembledUc,
                    options: Optional[SolveOptions] = None) -> SolveOutcome:
    """Solve an assembled model, falling back to penalized security slack.

    An infeasible secured model is re-solved with the frequency slack
    columns opened; the slack carries a value-of-lost-load price, so the
    solution meets as much of the requirement as the fleet can deliver.
    The slack bounds are pinned shut again before returning.
    """
    options = options or SolveOptions()
    out = solve_mip(asm.lp, options)
    if out.status == "infeasible" and asm.v_slack.size:
        set_frequency_slack(asm, True)
        try:
            out = solve_mip(asm.lp, options)
        finally:
            set_frequency_slack(asm, False)
    if out.x is None:
        raise RuntimeError(f"schedule solve failed: {out.status}")
    return out


def _widen(arr: np.ndarray, width: int) -> np.ndarray:
    """History matrix zero-padded on the old side to at least `width`."""
    if arr.shape[1] >= width:
        return arr
    out = np.zeros((arr.shape[0], width))
    out[:, :arr.shape[1]] = arr
    return out


def _root_slack(asm: AssembledUc, x: np.ndarray) -> float:
    if not asm.v_slack.size:
        return 0.0
    at_root = asm.slack_node == 0
    return float(x[asm.v_slack[at_root]].sum())


def rolling_run(case: SystemCase,
                model: ForecastErrorModel,
                steps: int,
                horizon: int = 12,
                state: Optional[InitialState] = None,
                uc_options: Optional[UcOptions] = None,
                solve_options: Optional[SolveOptions] = None) -> ScheduleResult:
    """Hourly re-solve over `steps` hours; returns the realized schedule.

    Each step assembles (or re-targets) the stochastic model on the next
    `horizon` hours of `case`'s profiles, solves it, commits the root
    decisions and advances unit, storage and start/stop state.  The
    realized infeed follows the forecast's median path.  Costs in the
    result are those of the committed root hours.
    """
    from .ucmodel.build import default_initial_state

    demand = np.asarray(case.demand, dtype=float)
    fc = np.asarray(case.res_forecast, dtype=float)
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if steps + horizon - 1 > demand.size:
        raise ValueError(
            f"profiles cover {demand.size} h; {steps} steps on a {horizon} h "
            f"window need {steps + horizon - 1}")

    uc_options = uc_options or UcOptions(secured=case.secured)
    state = state or default_initial_state(case)
    g = len(state.y)
    n_sto = len(state.soc)

    rows = {k: [] for k in ("y", "p", "pfr", "yst", "pc", "pd", "e", "efr")}
    scal = {k: [] for k in ("demand", "res", "curt", "shed", "h", "ploss",
                            "efrtot", "pfrtot", "slack")}
    cost = np.zeros(5)  # no_load, marginal, startup, shed, penalty
    fallback: list[int] = []
    asm = None

    for step in range(steps):
        window = slice(step, step + horizon)
        tree = build_tree(model, demand[window], fc[window])
        if asm is None:
            asm = assemble(case, tree, state, uc_options)
            # Carry start/stop history as deep as any unit's timing needs.
            u = asm.units
            width = int(max(1, (u.tst + np.maximum(u.tup, 1)).max(initial=1),
                            np.maximum(u.tdn, 1).max(initial=1)))
            state = InitialState(y=state.y, p=state.p, soc=state.soc,
                                 yst_hist=_widen(state.yst_hist, width),
                                 ysd_hist=_widen(state.ysd_hist, width))
        else:
            update_for_step(asm, tree, state)
        out = solve_assembled(asm, solve_options)
        sched = extract_schedule(asm, out.x)

        # Root-hour decisions become the realized trace.
        for key, arr in (("y", sched.commitment), ("p", sched.dispatch),
                         ("pfr", sched.pfr), ("yst", sched.start_events),
                         ("pc", sched.charge), ("pd", sched.discharge),
                         ("e", sched.soc), ("efr", sched.efr)):
            rows[key].append(arr[0].copy())
        scal["demand"].append(sched.demand[0])
        scal["res"].append(sched.res_available[0])
        scal["curt"].append(sched.curtailment[0])
        scal["shed"].append(sched.shed[0])
        scal["h"].append(sched.inertia[0])
        scal["ploss"].append(sched.p_loss[0])
        scal["efrtot"].append(sched.efr_total[0])
        scal["pfrtot"].append(sched.pfr_total[0])
        root_slack = _root_slack(asm, out.x)
        scal["slack"].append(root_slack)
        if root_slack > _SLACK_TOL:
            fallback.append(step)

        u = asm.units
        dt = uc_options.dt
        y0, p0, yst0 = sched.commitment[0], sched.dispatch[0], sched.start_events[0]
        ysd0 = out.x[asm.v_ysd[:, 0]] if g else np.zeros(0)
        cost[0] += float((u.cnl * y0).sum()) * dt
        cost[1] += float((u.cm * p0).sum()) * dt
        cost[2] += float((u.cst * yst0).sum())
        cost[3] += case.voll * float(sched.shed[0]) * dt
        cost[4] += case.voll * root_slack * dt

        state = InitialState(
            y=y0.copy(), p=p0.copy(),
            soc=sched.soc[0].copy() if n_sto else np.zeros(0),
            yst_hist=np.column_stack([yst0, state.yst_hist[:, :-1]])
            if state.yst_hist.size else state.yst_hist,
            ysd_hist=np.column_stack([ysd0, state.ysd_hist[:, :-1]])
            if state.ysd_hist.size else state.ysd_hist,
        )

    stack = lambda key, width: (np.vstack(rows[key]) if width
                                else np.zeros((steps, 0)))
    return ScheduleResult(
        times=np.arange(steps),
        node_ids=np.zeros(steps, dtype=int),
        probability=np.ones(steps),
        unit_names=list(asm.units.names),
        storage_names=[s.name for s in case.storage],
        commitment=stack("y", g),
        dispatch=stack("p", g),
        pfr=stack("pfr", g),
        start_events=stack("yst", g),
        charge=stack("pc", n_sto),
        discharge=stack("pd", n_sto),
        soc=stack("e", n_sto),
        efr=stack("efr", n_sto),
        demand=np.array(scal["demand"]),
        res_available=np.array(scal["res"]),
        curtailment=np.array(scal["curt"]),
        shed=np.array(scal["shed"]),
        inertia=np.array(scal["h"]),
        p_loss=np.array(scal["ploss"]),
        efr_total=np.array(scal["efrtot"]),
        pfr_total=np.array(scal["pfrtot"]),
        costs=CostBreakdown(no_load=cost[0], marginal=cost[1], startup=cost[2],
                            shed_penalty=cost[3], penalty=cost[4]),
        secured=bool(uc_options.secured and case.secured),
        fallback_hours=fallback,
    )
