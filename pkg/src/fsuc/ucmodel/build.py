"""Assembly of the scheduling model over a scenario tree.

The tree is duck-typed: any object with integer arrays `parent` (-1 at the
root) and `stage`, float arrays `prob`, `res` and `demand`, all indexed by
node, works.  Nodes must be topologically ordered (parent before child) and
each child's stage must be its parent's stage plus one.

Frequency security enters as linear rows per node: an inertia floor for the
initial RoCoF, conservative nadir cuts tangent to the exact requirement and
lifted per grid cell so cut-feasible points are truly secure, a guard row
covering the regime where EFR exceeds the loss, and the quasi-steady-state
requirement that procured response covers the loss.  Every frequency row
carries a penalty slack that is pinned to zero in normal operation; the
fallback path widens the slacks at VoLL instead of failing the step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..coretypes import (
    CostBreakdown,
    N1_OPTIMIZED,
    ScheduleResult,
    SystemCase,
    expand_thermal,
    total_pfr_capability,
    validate_case,
)
from ..freqsec import NadirCutSet, build_nadir_cuts, min_inertia_for_rocof
from .lp import LinearProgram, SENSE_EQ, SENSE_GE, SENSE_LE

_SLACK_TOL = 1e-6  # MW / MVA.s of frequency slack that counts as a fallback


@dataclass
class UcOptions:
    """Knobs of the model assembly, not of the case being solved."""

    secured: bool = True          # emit frequency rows and allow response
    relax_binaries: bool = True   # start/stop/switch events continuous in [0,1]
    cut_margin: float = 10.0      # MVA.s pad on inertia-bearing rows
    pfr_grid: Optional[tuple] = None     # override the response grid (MW)
    efr_grid: Optional[tuple] = None
    p_loss_grid: Optional[tuple] = None
    dt: float = 1.0               # h per stage


@dataclass
class InitialState:
    """Rolling-horizon state at the first scheduled hour.

    Histories are ordered most recent first: column k holds the value k+1
    steps before the horizon start.  Widths may be anything; missing depth
    reads as zero.
    """

    y: np.ndarray         # [units] commitment in the previous hour
    p: np.ndarray         # [units] MW dispatched in the previous hour
    soc: np.ndarray       # [storage] MWh at the end of the previous hour
    yst_hist: np.ndarray  # [units, k] start decisions taken k+1 steps ago
    ysd_hist: np.ndarray  # [units, k] shutdowns taken k+1 steps ago


def default_initial_state(case: SystemCase) -> InitialState:
    """Warm start: must-run at rating, mid-merit thermal at minimum load.

    Units with a startup lead longer than an hour begin committed at their
    stable minimum so the first scheduled hours are not forced into shedding
    while starts complete; instant-start and peaking units begin offline.
    """
    units = expand_thermal(case.thermal)
    g = len(units)
    y = np.zeros(g)
    p = np.zeros(g)
    for i, (_, u) in enumerate(units):
        if u.must_run:
            y[i] = 1.0
            p[i] = u.p_max
        elif u.t_startup > 0 and u.cost_startup > 0 and u.pfr_max > 0:
            y[i] = 1.0
            p[i] = u.p_msg
    soc = np.array([s.e_initial if s.e_initial is not None else 0.5 * s.e_max
                    for s in case.storage])
    return InitialState(y=y, p=p, soc=soc,
                        yst_hist=np.zeros((g, 1)), ysd_hist=np.zeros((g, 1)))


@dataclass
class _UnitArrays:
    """Expanded thermal fleet as flat arrays."""

    names: list[str]
    pmax: np.ndarray
    msg: np.ndarray
    ramp: np.ndarray
    cnl: np.ndarray
    cm: np.ndarray
    cst: np.ndarray
    tst: np.ndarray     # int h, startup lead
    tup: np.ndarray     # int h, min up
    tdn: np.ndarray     # int h, min down
    h: np.ndarray       # s, inertia constant
    pfrmax: np.ndarray
    mustrun: np.ndarray
    su: np.ndarray      # MW reachable in the start hour / quittable at stop


def _unit_arrays(case: SystemCase) -> _UnitArrays:
    expanded = expand_thermal(case.thermal)
    get = lambda f: np.array([f(u) for _, u in expanded])
    # A synchronizing unit lands at its stable minimum or one hour of
    # ramping, whichever is larger; shutdowns mirror it.
    return _UnitArrays(
        su=get(lambda u: max(u.p_msg, u.ramp_rate)),
        names=[n for n, _ in expanded],
        pmax=get(lambda u: u.p_max),
        msg=get(lambda u: u.p_msg),
        ramp=get(lambda u: u.ramp_rate),
        cnl=get(lambda u: u.cost_noload),
        cm=get(lambda u: u.cost_marginal),
        cst=get(lambda u: u.cost_startup),
        tst=get(lambda u: u.t_startup).astype(int),
        tup=get(lambda u: u.t_min_up).astype(int),
        tdn=get(lambda u: u.t_min_down).astype(int),
        h=get(lambda u: u.inertia_const),
        pfrmax=get(lambda u: min(u.pfr_max, u.p_max)),
        mustrun=get(lambda u: u.must_run).astype(bool),
    )


@dataclass
class AssembledUc:
    """A LinearProgram plus the index maps needed to read a solution back."""

    lp: LinearProgram
    case: SystemCase
    options: UcOptions
    units: _UnitArrays
    cuts: Optional[NadirCutSet]

    tree_parent: np.ndarray
    tree_stage: np.ndarray
    tree_prob: np.ndarray
    tree_res: np.ndarray
    tree_demand: np.ndarray
    anc: dict  # distance -> ancestor node array, -1 past the root

    # columns
    v_p: np.ndarray = None        # [units, nodes]
    v_y: np.ndarray = None
    v_yst: np.ndarray = None
    v_ysd: np.ndarray = None
    v_pfr: np.ndarray = None
    v_pc: np.ndarray = None       # [storage, nodes]
    v_pd: np.ndarray = None
    v_e: np.ndarray = None
    v_ys: np.ndarray = None
    v_efr: np.ndarray = None
    v_curt: np.ndarray = None     # [nodes]
    v_shed: np.ndarray = None
    v_h: np.ndarray = None
    v_efrtot: np.ndarray = None
    v_pfrtot: np.ndarray = None
    v_ploss: Optional[np.ndarray] = None
    v_slack: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    slack_node: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    # rows with state- or forecast-dependent right-hand sides
    r_balance: np.ndarray = None
    r_recursion: np.ndarray = None  # [units, nodes]
    r_rampup: np.ndarray = None
    r_rampdn: np.ndarray = None
    r_startable: np.ndarray = None
    r_shutwin: np.ndarray = None
    r_startwin: Optional[np.ndarray] = None  # only for units with a window
    startwin_units: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    r_soc: np.ndarray = None        # [storage, nodes]

    @property
    def n_nodes(self) -> int:
        return int(self.tree_stage.size)

    @property
    def horizon(self) -> int:
        return int(self.tree_stage.max()) + 1


def _ancestors(parent: np.ndarray, max_depth: int) -> dict:
    """anc[k][n] = node k steps up the path from n, or -1 past the root."""
    n = parent.size
    anc = {0: np.arange(n)}
    for k in range(1, max_depth + 1):
        prev = anc[k - 1]
        cur = np.where(prev >= 0, parent[np.maximum(prev, 0)], -1)
        anc[k] = cur
    return anc


def _tree_arrays(tree):
    parent = np.asarray(tree.parent, dtype=int)
    stage = np.asarray(tree.stage, dtype=int)
    prob = np.asarray(tree.prob, dtype=float)
    res = np.asarray(tree.res, dtype=float)
    demand = np.asarray(tree.demand, dtype=float)
    n = parent.size
    if not (stage.size == prob.size == res.size == demand.size == n):
        raise ValueError("tree arrays must share one length")
    if np.any(np.arange(n)[parent >= 0] <= parent[parent >= 0]):
        raise ValueError("tree nodes must be topologically ordered")
    ok = (parent < 0) | (stage == np.where(parent >= 0, stage[np.maximum(parent, 0)], -1) + 1)
    if not np.all(ok):
        raise ValueError("child stage must be parent stage + 1")
    if np.any((parent < 0) & (stage != 0)):
        raise ValueError("root nodes must sit at stage 0")
    return parent, stage, prob, res, demand


def _grids(case: SystemCase, options: UcOptions):
    """Case-adapted response grids for the nadir cuts."""
    fp = case.freq
    if options.p_loss_grid is not None:
        ploss = tuple(float(x) for x in options.p_loss_grid)
    elif fp.standard == N1_OPTIMIZED:
        units = sorted(case.thermal, key=lambda u: u.p_max)
        big = units[-1]
        steps = max(2, int(np.ceil((big.p_max - big.p_msg) / 75.0)) + 1)
        ploss = tuple(np.linspace(big.p_msg, big.p_max, steps))
    else:
        ploss = (float(fp.p_loss_fixed),)

    if options.efr_grid is not None:
        efr = tuple(float(x) for x in options.efr_grid)
    else:
        cap = float(case.efr_procured_cap)
        if cap <= 0:
            efr = (0.0,)
        else:
            pts = set(np.arange(0.0, cap, 250.0)) | {cap}
            # Loss values inside the range become grid points so no cell
            # straddles the efr = p_loss kink of the nadir floor.
            pts |= {float(l) for l in ploss if 0.0 < l < cap}
            efr = tuple(sorted(pts))

    if options.pfr_grid is not None:
        pfr = tuple(float(x) for x in options.pfr_grid)
    else:
        cap = max(total_pfr_capability(case), 50.0)
        # Geometric points at the low end where the floor varies as 1/pfr,
        # then linear spacing; realized pfr always lands inside the box.
        low = tuple(x for x in (1.0, 4.0, 16.0, 64.0) if x < min(cap, 250.0))
        inner = tuple(x for x in np.arange(250.0, cap, 250.0))
        pfr = low + inner + (cap,)
    return pfr, efr, ploss


def build_objective(case: SystemCase, prob: np.ndarray,
                    options: UcOptions) -> dict:
    """Per-column objective coefficients, probability weighted.

    Energy-linked terms scale with the stage length; startup costs are
    per event and do not.
    """
    u = _unit_arrays(case)
    dt = options.dt
    w = prob[None, :]
    return {
        "y": u.cnl[:, None] * w * dt,
        "p": u.cm[:, None] * w * dt,
        "yst": u.cst[:, None] * w,
        "shed": case.voll * prob * dt,
        "slack": case.voll * prob * dt,
    }


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------

def assemble(case: SystemCase, tree, state: Optional[InitialState] = None,
             options: Optional[UcOptions] = None) -> AssembledUc:
    """Build the full model; the returned structure is reusable across
    rolling steps through `update_for_step`."""
    options = options or UcOptions()
    problems = validate_case(case)
    if problems:
        raise ValueError("invalid case: " + "; ".join(str(p) for p in problems))
    if state is None:
        state = default_initial_state(case)

    parent, stage, prob, res, demand = _tree_arrays(tree)
    u = _unit_arrays(case)
    n = parent.size
    g = len(u.names)
    s = len(case.storage)
    horizon = int(stage.max()) + 1

    max_depth = int((u.tst + np.maximum(u.tup, 1)).max(initial=1))
    max_depth = max(max_depth, int(np.maximum(u.tdn - u.tst, 0).max(initial=0)))
    anc = _ancestors(parent, max_depth)

    secured = options.secured and case.secured
    cuts = None
    if secured:
        pfr_grid, efr_grid, ploss_grid = _grids(case, options)
        cuts = build_nadir_cuts(case.freq, pfr_grid, efr_grid, ploss_grid,
                                margin=options.cut_margin)

    lp = LinearProgram(name=case.name)
    asm = AssembledUc(lp=lp, case=case, options=options, units=u, cuts=cuts,
                      tree_parent=parent, tree_stage=stage, tree_prob=prob,
                      tree_res=res.copy(), tree_demand=demand.copy(), anc=anc)

    obj = build_objective(case, prob, options)

    def grid_meta(tag, count, axis_names=None):
        names = axis_names or u.names
        return [(tag, names[i], int(t)) for i in range(count) for t in range(n)]

    # Thermal columns.  Shapes are [units, nodes], flattened C-order.
    rep = lambda a: np.repeat(a, n)
    asm.v_p = lp.add_cols(g * n, 0.0, rep(u.pmax), obj["p"].ravel(),
                          meta=grid_meta("p", g)).reshape(g, n)
    # Commitment is always continuous: the recursion keeps it integral
    # whenever the start/stop events are.
    events_integer = not options.relax_binaries
    y_lb = rep(np.where(u.mustrun, 1.0, 0.0))
    asm.v_y = lp.add_cols(g * n, y_lb, 1.0, obj["y"].ravel(),
                          meta=grid_meta("y", g)).reshape(g, n)
    # Start decisions that cannot complete inside the horizon are pinned off,
    # as are start/stop events of must-run units.
    yst_ub = np.ones((g, n))
    yst_ub[(stage[None, :] + u.tst[:, None]) >= horizon] = 0.0
    yst_ub[u.mustrun, :] = 0.0
    ysd_ub = np.ones((g, n))
    ysd_ub[u.mustrun, :] = 0.0
    asm.v_yst = lp.add_cols(g * n, 0.0, yst_ub.ravel(), obj["yst"].ravel(),
                            integer=events_integer,
                            meta=grid_meta("yst", g)).reshape(g, n)
    asm.v_ysd = lp.add_cols(g * n, 0.0, ysd_ub.ravel(), 0.0,
                            integer=events_integer,
                            meta=grid_meta("ysd", g)).reshape(g, n)
    pfr_ub = rep(u.pfrmax) if secured else 0.0
    asm.v_pfr = lp.add_cols(g * n, 0.0, pfr_ub, 0.0,
                            meta=grid_meta("pfr", g)).reshape(g, n)

    # Storage columns.
    snames = [st.name for st in case.storage]
    if s:
        reps = lambda f: np.repeat(np.array([f(st) for st in case.storage]), n)
        asm.v_pc = lp.add_cols(s * n, 0.0, reps(lambda x: x.p_charge_max), 0.0,
                               meta=grid_meta("pc", s, snames)).reshape(s, n)
        asm.v_pd = lp.add_cols(s * n, 0.0, reps(lambda x: x.p_discharge_max), 0.0,
                               meta=grid_meta("pd", s, snames)).reshape(s, n)
        asm.v_e = lp.add_cols(s * n, reps(lambda x: x.e_min),
                              reps(lambda x: x.e_max), 0.0,
                              meta=grid_meta("e", s, snames)).reshape(s, n)
        asm.v_ys = lp.add_cols(s * n, 0.0, 1.0, 0.0, integer=events_integer,
                               meta=grid_meta("ys", s, snames)).reshape(s, n)
        efr_ub = reps(lambda x: x.efr_max) if secured else 0.0
        asm.v_efr = lp.add_cols(s * n, 0.0, efr_ub, 0.0,
                                meta=grid_meta("efr", s, snames)).reshape(s, n)
    else:
        empty = np.zeros((0, n), dtype=int)
        asm.v_pc = asm.v_pd = asm.v_e = asm.v_ys = asm.v_efr = empty

    # System columns.
    node_meta = lambda tag: [(tag, int(t)) for t in range(n)]
    asm.v_curt = lp.add_cols(n, 0.0, res, 0.0, meta=node_meta("curt"))
    asm.v_shed = lp.add_cols(n, 0.0, demand, obj["shed"], meta=node_meta("shed"))
    # Free: post-loss inertia is a defined quantity, negative when nothing
    # is committed; the RoCoF floor bounds it in secured runs.
    asm.v_h = lp.add_cols(n, -np.inf, np.inf, 0.0, meta=node_meta("hsys"))
    efrtot_ub = float(case.efr_procured_cap) if secured else 0.0
    asm.v_efrtot = lp.add_cols(n, 0.0, efrtot_ub, 0.0, meta=node_meta("efrtot"))
    pfrtot_ub = float(u.pfrmax.sum()) if secured else 0.0
    asm.v_pfrtot = lp.add_cols(n, 0.0, pfrtot_ub, 0.0, meta=node_meta("pfrtot"))
    if case.freq.standard == N1_OPTIMIZED:
        units = sorted(case.thermal, key=lambda x: x.p_max)
        big = units[-1]
        asm.v_ploss = lp.add_cols(n, big.p_msg, big.p_max, 0.0,
                                  meta=node_meta("ploss"))

    add_thermal_constraints(asm)
    add_storage_constraints(asm)
    add_load_balance(asm)
    add_frequency_constraints(asm)

    lp.finalize()
    _apply_dynamic(asm, state)
    return asm


def add_thermal_constraints(asm: AssembledUc) -> None:
    """Commitment recursion, start/stop windows, ramps and power windows."""
    lp, u, anc = asm.lp, asm.units, asm.anc
    stage = asm.tree_stage
    parent = asm.tree_parent
    n = asm.n_nodes
    g = len(u.names)
    has_parent = parent >= 0
    pnodes = parent[has_parent]

    def rows(tag, count=g):
        ids = lp.add_rows(count * n, SENSE_LE, 0.0,
                          [(tag, u.names[i], int(t))
                           for i in range(count) for t in range(n)])
        return ids.reshape(count, n)

    # y(t) - y(t-1) - yst(t - lead) + ysd(t) = 0 on each path.
    asm.r_recursion = lp.add_rows(
        g * n, SENSE_EQ, 0.0,
        [("commit", u.names[i], int(t)) for i in range(g) for t in range(n)]
    ).reshape(g, n)
    for i in range(g):
        r = asm.r_recursion[i]
        lp.add_entries(r, asm.v_y[i], 1.0)
        lp.add_entries(r[has_parent], asm.v_y[i, pnodes], -1.0)
        lp.add_entries(r, asm.v_ysd[i], 1.0)
        a = anc[int(u.tst[i])]
        ok = a >= 0
        lp.add_entries(r[ok], asm.v_yst[i, a[ok]], -1.0)

    # A start decision requires the unit to be offline from the previous
    # hour, or shutting down in this one.
    asm.r_startable = lp.add_rows(
        g * n, SENSE_LE, 1.0,
        [("startable", u.names[i], int(t)) for i in range(g) for t in range(n)]
    ).reshape(g, n)
    for i in range(g):
        lp.add_entries(asm.r_startable[i], asm.v_yst[i], 1.0)
        lp.add_entries(asm.r_startable[i, has_parent], asm.v_y[i, pnodes], 1.0)
        lp.add_entries(asm.r_startable[i], asm.v_ysd[i], -1.0)

    # Minimum up: no shutdown within t_min_up hours of coming online.
    asm.r_shutwin = rows("minup")
    for i in range(g):
        r = asm.r_shutwin[i]
        lp.add_entries(r, asm.v_ysd[i], 1.0)
        lp.add_entries(r[has_parent], asm.v_y[i, pnodes], -1.0)
        for j in range(1, int(u.tup[i])):
            a = anc[j + int(u.tst[i])]
            ok = a >= 0
            lp.add_entries(r[ok], asm.v_yst[i, a[ok]], 1.0)

    # Minimum down beyond the startup lead: no start decision while a recent
    # shutdown still enforces offline time at the synchronization hour.
    win = np.maximum(u.tdn - u.tst, 0)
    asm.startwin_units = np.nonzero(win > 0)[0]
    if asm.startwin_units.size:
        k = asm.startwin_units.size
        asm.r_startwin = lp.add_rows(
            k * n, SENSE_LE, 1.0,
            [("mindown", u.names[i], int(t))
             for i in asm.startwin_units for t in range(n)]).reshape(k, n)
        for row_i, i in enumerate(asm.startwin_units):
            r = asm.r_startwin[row_i]
            lp.add_entries(r, asm.v_yst[i], 1.0)
            for j in range(int(win[i])):
                a = anc[j]
                ok = a >= 0
                lp.add_entries(r[ok], asm.v_ysd[i, a[ok]], 1.0)

    # Ramps with start/stop exceptions: a starting unit lands at its stable
    # minimum, a stopping unit must already sit there.
    asm.r_rampup = rows("rampup")
    asm.r_rampdn = rows("rampdn")
    for i in range(g):
        r = asm.r_rampup[i]
        lp.add_entries(r, asm.v_p[i], 1.0)
        lp.add_entries(r[has_parent], asm.v_p[i, pnodes], -1.0)
        lp.add_entries(r[has_parent], asm.v_y[i, pnodes], -u.ramp[i])
        a = anc[int(u.tst[i])]
        ok = a >= 0
        lp.add_entries(r[ok], asm.v_yst[i, a[ok]], -u.su[i])

        r = asm.r_rampdn[i]
        lp.add_entries(r, asm.v_p[i], -1.0)
        lp.add_entries(r[has_parent], asm.v_p[i, pnodes], 1.0)
        lp.add_entries(r, asm.v_y[i], -u.ramp[i])
        lp.add_entries(r, asm.v_ysd[i], -u.su[i])

    # Power window: stable minimum and response headroom against the rating.
    r_pmin = lp.add_rows(g * n, SENSE_GE, 0.0,
                         [("pmin", u.names[i], int(t))
                          for i in range(g) for t in range(n)]).reshape(g, n)
    r_head = lp.add_rows(g * n, SENSE_LE, 0.0,
                         [("headroom", u.names[i], int(t))
                          for i in range(g) for t in range(n)]).reshape(g, n)
    for i in range(g):
        lp.add_entries(r_pmin[i], asm.v_p[i], 1.0)
        lp.add_entries(r_pmin[i], asm.v_y[i], -u.msg[i])
        lp.add_entries(r_head[i], asm.v_p[i], 1.0)
        lp.add_entries(r_head[i], asm.v_pfr[i], 1.0)
        lp.add_entries(r_head[i], asm.v_y[i], -u.pmax[i])


def add_storage_constraints(asm: AssembledUc) -> None:
    """Energy accounting and mutually exclusive charge/discharge modes."""
    lp = asm.lp
    n = asm.n_nodes
    parent = asm.tree_parent
    has_parent = parent >= 0
    pnodes = parent[has_parent]

    asm.r_soc = np.zeros((len(asm.case.storage), n), dtype=int)
    for i, st in enumerate(asm.case.storage):
        r = lp.add_rows(n, SENSE_EQ, 0.0,
                        [("soc", st.name, int(t)) for t in range(n)])
        asm.r_soc[i] = r
        lp.add_entries(r, asm.v_e[i], 1.0)
        lp.add_entries(r[has_parent], asm.v_e[i, pnodes], -1.0)
        lp.add_entries(r, asm.v_pc[i], -st.eta_charge)
        lp.add_entries(r, asm.v_pd[i], 1.0 / st.eta_discharge)

        r = lp.add_rows(n, SENSE_LE, st.p_charge_max,
                        [("chargemode", st.name, int(t)) for t in range(n)])
        lp.add_entries(r, asm.v_pc[i], 1.0)
        lp.add_entries(r, asm.v_ys[i], st.p_charge_max)

        r = lp.add_rows(n, SENSE_LE, 0.0,
                        [("dischargemode", st.name, int(t)) for t in range(n)])
        lp.add_entries(r, asm.v_pd[i], 1.0)
        lp.add_entries(r, asm.v_ys[i], -st.p_discharge_max)

        # EFR must be deliverable: discharge headroom plus curtailable charge.
        r = lp.add_rows(n, SENSE_LE, 0.0,
                        [("efrroom", st.name, int(t)) for t in range(n)])
        lp.add_entries(r, asm.v_efr[i], 1.0)
        lp.add_entries(r, asm.v_pd[i], 1.0)
        lp.add_entries(r, asm.v_pc[i], -1.0)
        lp.add_entries(r, asm.v_ys[i], -st.p_discharge_max)


def add_load_balance(asm: AssembledUc) -> None:
    """Supply equals demand, with curtailment and shedding as relief valves."""
    lp = asm.lp
    n = asm.n_nodes
    asm.r_balance = lp.add_rows(n, SENSE_EQ, 0.0,
                                [("balance", int(t)) for t in range(n)])
    for i in range(len(asm.units.names)):
        lp.add_entries(asm.r_balance, asm.v_p[i], 1.0)
    for i in range(len(asm.case.storage)):
        lp.add_entries(asm.r_balance, asm.v_pd[i], 1.0)
        lp.add_entries(asm.r_balance, asm.v_pc[i], -1.0)
    lp.add_entries(asm.r_balance, asm.v_curt, -1.0)
    lp.add_entries(asm.r_balance, asm.v_shed, 1.0)


def add_frequency_constraints(asm: AssembledUc) -> None:
    """Inertia accounting plus the security rows, when enabled.

    The accounting equality is always present so unsecured counterfactuals
    still report the inertia their schedule would carry.
    """
    lp, u = asm.lp, asm.units
    case = asm.case
    fp = case.freq
    n = asm.n_nodes

    # System inertia from committed units, net of the outaged machine.  The
    # machine spins at full rating even when part-loaded, so the deduction is
    # rating-based under the optimized standard; under a fixed standard it is
    # the loss itself, capped at the largest machine because any excess (an
    # HVDC pole in the double-loss standard) carries no inertia.
    big = float(u.pmax.max(initial=0.0))
    loss = big if fp.standard == N1_OPTIMIZED else fp.p_loss_fixed
    deduction = fp.h_loss * min(big, loss)
    r_h = lp.add_rows(n, SENSE_EQ, -deduction,
                      [("inertia", int(t)) for t in range(n)])
    lp.add_entries(r_h, asm.v_h, 1.0)
    for i in range(len(u.names)):
        lp.add_entries(r_h, asm.v_y[i], -u.h[i] * u.pmax[i])

    # Response totals, defined even when pinned to zero.
    r_et = lp.add_rows(n, SENSE_EQ, 0.0, [("efrsum", int(t)) for t in range(n)])
    lp.add_entries(r_et, asm.v_efrtot, 1.0)
    for i in range(len(case.storage)):
        lp.add_entries(r_et, asm.v_efr[i], -1.0)
    r_pt = lp.add_rows(n, SENSE_EQ, 0.0, [("pfrsum", int(t)) for t in range(n)])
    lp.add_entries(r_pt, asm.v_pfrtot, 1.0)
    for i in range(len(u.names)):
        lp.add_entries(r_pt, asm.v_pfr[i], -1.0)

    # Under the optimized standard the secured loss is the output of the
    # largest unit, which the schedule may hold down to relax requirements.
    if asm.v_ploss is not None:
        big = int(np.argmax(u.pmax))
        r = lp.add_rows(n, SENSE_EQ, 0.0, [("lossdef", int(t)) for t in range(n)])
        lp.add_entries(r, asm.v_ploss, 1.0)
        lp.add_entries(r, asm.v_p[big], -1.0)

    secured = asm.options.secured and case.secured
    if not secured:
        return

    margin = asm.options.cut_margin
    slack_rows: list[np.ndarray] = []

    # Initial-RoCoF inertia floor.
    if asm.v_ploss is None:
        floor = min_inertia_for_rocof(fp.p_loss_fixed, fp.rocof_max, fp.f0)
        r = lp.add_rows(n, SENSE_GE, floor + margin,
                        [("rocof", int(t)) for t in range(n)])
        lp.add_entries(r, asm.v_h, 1.0)
    else:
        r = lp.add_rows(n, SENSE_GE, margin,
                        [("rocof", int(t)) for t in range(n)])
        lp.add_entries(r, asm.v_h, 1.0)
        lp.add_entries(r, asm.v_ploss, -fp.f0 / (2.0 * fp.rocof_max))
    slack_rows.append(r)

    # Guard for the regime where EFR covers the loss: the containment burden
    # within the EFR delivery time never exceeds this inertia level.
    c_a = fp.f0 * fp.t_efr / (4.0 * fp.delta_f_max)
    r = lp.add_rows(n, SENSE_GE, margin, [("efrguard", int(t)) for t in range(n)])
    lp.add_entries(r, asm.v_h, 1.0)
    lp.add_entries(r, asm.v_efrtot, -c_a)
    slack_rows.append(r)

    # Quasi-steady-state: procured response covers the loss.
    if asm.v_ploss is None:
        r = lp.add_rows(n, SENSE_GE, fp.p_loss_fixed,
                        [("qss", int(t)) for t in range(n)])
        lp.add_entries(r, asm.v_efrtot, 1.0)
        lp.add_entries(r, asm.v_pfrtot, 1.0)
    else:
        r = lp.add_rows(n, SENSE_GE, 0.0, [("qss", int(t)) for t in range(n)])
        lp.add_entries(r, asm.v_efrtot, 1.0)
        lp.add_entries(r, asm.v_pfrtot, 1.0)
        lp.add_entries(r, asm.v_ploss, -1.0)
    slack_rows.append(r)

    # Conservative nadir cuts.
    for k, cut in enumerate(asm.cuts.cuts):
        rhs = cut.rhs
        if asm.v_ploss is None:
            rhs = rhs - cut.a_ploss * fp.p_loss_fixed
        r = lp.add_rows(n, SENSE_GE, rhs,
                        [("nadir", k, int(t)) for t in range(n)])
        lp.add_entries(r, asm.v_h, cut.a_h)
        lp.add_entries(r, asm.v_efrtot, cut.a_efr)
        lp.add_entries(r, asm.v_pfrtot, cut.a_pfr)
        if asm.v_ploss is not None:
            lp.add_entries(r, asm.v_ploss, cut.a_ploss)
        slack_rows.append(r)

    # One pinned slack per security row; the fallback path widens them.
    all_rows = np.concatenate(slack_rows)
    node_of = np.tile(np.arange(n), len(slack_rows))
    w = case.voll * asm.tree_prob[node_of] * asm.options.dt
    ids = lp.add_cols(all_rows.size, 0.0, 0.0, w,
                      meta=[("fslack", int(r)) for r in all_rows])
    lp.add_entries(all_rows, ids, 1.0)
    asm.v_slack = ids
    asm.slack_node = node_of


def set_frequency_slack(asm: AssembledUc, enabled: bool) -> None:
    """Open or pin the security-row slacks (the infeasibility fallback)."""
    if asm.v_slack.size:
        asm.lp.set_col_bounds(asm.v_slack, ub=(np.inf if enabled else 0.0))


# ---------------------------------------------------------------------------
# Rolling-step updates
# ---------------------------------------------------------------------------

def _hist(arr: np.ndarray, width: int) -> np.ndarray:
    """History matrix padded (or truncated) to `width` columns."""
    g = arr.shape[0]
    out = np.zeros((g, max(width, 1)))
    take = min(arr.shape[1], width)
    if take:
        out[:, :take] = arr[:, :take]
    return out


def _apply_dynamic(asm: AssembledUc, state: InitialState) -> None:
    """Write every state- and forecast-dependent RHS and bound."""
    lp, u, anc = asm.lp, asm.units, asm.anc
    stage = asm.tree_stage
    roots = asm.tree_parent < 0
    n = asm.n_nodes
    g = len(u.names)

    depth1 = int((u.tst + np.maximum(u.tup, 1)).max(initial=1))
    h_yst = _hist(np.asarray(state.yst_hist, dtype=float), depth1)
    depth2 = int(np.maximum(u.tdn, 1).max(initial=1))
    h_ysd = _hist(np.asarray(state.ysd_hist, dtype=float), depth2)

    lp.set_rhs(asm.r_balance, asm.tree_demand - asm.tree_res)
    lp.set_col_bounds(asm.v_curt, ub=asm.tree_res)
    lp.set_col_bounds(asm.v_shed, ub=asm.tree_demand)

    def hist_at(hmat, i, dist):
        """Constant contribution of pre-horizon events at path distance
        `dist`: a vector over nodes, zero where the variable exists."""
        miss = stage < dist
        out = np.zeros(n)
        if dist > 0 and miss.any():
            k = dist - stage[miss] - 1
            out[miss] = hmat[i, k]
        return out

    for i in range(g):
        tst = int(u.tst[i])
        rhs = np.zeros(n)
        rhs[roots] += state.y[i]
        rhs += hist_at(h_yst, i, tst)
        lp.set_rhs(asm.r_recursion[i], rhs)

        rhs = np.zeros(n)
        rhs[roots] += state.p[i] + u.ramp[i] * state.y[i]
        rhs += u.su[i] * hist_at(h_yst, i, tst)
        lp.set_rhs(asm.r_rampup[i], rhs)

        rhs = np.zeros(n)
        rhs[roots] -= state.p[i]
        lp.set_rhs(asm.r_rampdn[i], rhs)

        rhs = np.ones(n)
        rhs[roots] -= state.y[i]
        lp.set_rhs(asm.r_startable[i], rhs)

        rhs = np.zeros(n)
        rhs[roots] += state.y[i]
        for j in range(1, int(u.tup[i])):
            rhs -= hist_at(h_yst, i, j + tst)
        lp.set_rhs(asm.r_shutwin[i], rhs)

    if asm.r_startwin is not None:
        win = np.maximum(u.tdn - u.tst, 0)
        for row_i, i in enumerate(asm.startwin_units):
            rhs = np.ones(n)
            for j in range(int(win[i])):
                rhs -= hist_at(h_ysd, i, j)
            lp.set_rhs(asm.r_startwin[row_i], rhs)

    for i in range(len(asm.case.storage)):
        rhs = np.zeros(n)
        rhs[roots] = state.soc[i]
        lp.set_rhs(asm.r_soc[i], rhs)


def update_for_step(asm: AssembledUc, tree, state: InitialState) -> None:
    """Move the assembled model to a new rolling step.

    The new tree must have the shape of the one the model was built on:
    identical parents, stages and probabilities.  Only forecasts, demand
    and the initial state change; everything is applied in place.
    """
    parent, stage, prob, res, demand = _tree_arrays(tree)
    if not (np.array_equal(parent, asm.tree_parent)
            and np.array_equal(stage, asm.tree_stage)):
        raise ValueError("tree shape changed; assemble a new model")
    if not np.allclose(prob, asm.tree_prob, atol=1e-12):
        raise ValueError("node probabilities changed; assemble a new model")
    asm.tree_res = res.copy()
    asm.tree_demand = demand.copy()
    _apply_dynamic(asm, state)


# ---------------------------------------------------------------------------
# Extraction
# ---------------------------------------------------------------------------

def extract_schedule(asm: AssembledUc, x: np.ndarray) -> ScheduleResult:
    """Read a solution vector back into physical quantities."""
    u = asm.units
    case = asm.case
    n = asm.n_nodes
    prob = asm.tree_prob
    dt = asm.options.dt

    take = lambda ids: x[ids]
    commitment = take(asm.v_y)
    dispatch = take(asm.v_p)
    yst = take(asm.v_yst)
    shed = take(asm.v_shed)
    slack = take(asm.v_slack) if asm.v_slack.size else np.zeros(0)

    no_load = float((u.cnl[:, None] * commitment * prob[None, :]).sum() * dt)
    marginal = float((u.cm[:, None] * dispatch * prob[None, :]).sum() * dt)
    startup = float((u.cst[:, None] * yst * prob[None, :]).sum())
    shed_cost = float((case.voll * shed * prob).sum() * dt)
    penalty = 0.0
    fallback: list[int] = []
    if slack.size:
        penalty = float((case.voll * slack * prob[asm.slack_node]).sum() * dt)
        hot = slack > _SLACK_TOL
        fallback = sorted({int(t) for t in asm.tree_stage[asm.slack_node[hot]]})

    if asm.v_ploss is not None:
        p_loss = take(asm.v_ploss)
    else:
        p_loss = np.full(n, case.freq.p_loss_fixed)

    return ScheduleResult(
        times=asm.tree_stage.copy(),
        node_ids=np.arange(n),
        probability=prob.copy(),
        unit_names=list(u.names),
        storage_names=[st.name for st in case.storage],
        commitment=commitment.T.copy(),
        dispatch=dispatch.T.copy(),
        pfr=take(asm.v_pfr).T.copy(),
        start_events=yst.T.copy(),
        charge=take(asm.v_pc).T.copy(),
        discharge=take(asm.v_pd).T.copy(),
        soc=take(asm.v_e).T.copy(),
        efr=take(asm.v_efr).T.copy(),
        demand=asm.tree_demand.copy(),
        res_available=asm.tree_res.copy(),
        curtailment=take(asm.v_curt),
        shed=shed.copy(),
        inertia=take(asm.v_h),
        p_loss=p_loss,
        efr_total=take(asm.v_efrtot),
        pfr_total=take(asm.v_pfrtot),
        costs=CostBreakdown(no_load=no_load, marginal=marginal, startup=startup,
                            shed_penalty=shed_cost, penalty=penalty),
        secured=bool(asm.options.secured and case.secured),
        fallback_hours=fallback,
    )
