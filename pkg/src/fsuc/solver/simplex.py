"""Bounded-variable revised simplex with equilibration scaling.

Dense two-phase implementation intended for small and medium instances:
exported models, unit tests and the enumeration-scale problems of the
branch-and-bound driver.  Pricing is Dantzig's rule with a permanent switch
to Bland's rule once degeneracy is detected, which keeps the method finite
and the iteration sequence deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..ucmodel.lp import SENSE_EQ, SENSE_GE, SENSE_LE

# Nonbasic rest positions.
_AT_LB = 0
_AT_UB = 1
_AT_FREE = 2
_BASIC = 3

_FEAS_TOL = 1e-8       # scaled-row feasibility
_COST_TOL = 1e-9       # reduced-cost optimality
_PIVOT_TOL = 1e-10     # smallest admissible pivot magnitude
_DEGEN_STREAK = 40     # zero-step iterations before switching to Bland
_REFACTOR_EVERY = 150  # basis reinversions


@dataclass
class SimplexResult:
    status: str                   # optimal | infeasible | unbounded | limit
    x: Optional[np.ndarray]       # structural solution, original scaling
    objective: float
    duals: Optional[np.ndarray]   # one per row, original scaling
    reduced_costs: Optional[np.ndarray]
    iterations: int


class _Tableau:
    """Mutable simplex state over the slack-extended, scaled problem."""

    def __init__(self, a_ext: np.ndarray, lb: np.ndarray, ub: np.ndarray):
        self.a = a_ext
        self.m = a_ext.shape[0]
        self.n = a_ext.shape[1]
        self.lb = lb
        self.ub = ub
        self.status = np.full(self.n, _AT_LB, dtype=np.int8)
        self.basis = np.zeros(self.m, dtype=np.int64)
        self.binv = np.eye(self.m)
        self.xb = np.zeros(self.m)
        self.iterations = 0
        self.bland = False
        self._degen_run = 0
        self._since_refactor = 0

    def nonbasic_value(self, j: int) -> float:
        s = self.status[j]
        if s == _AT_LB:
            return self.lb[j]
        if s == _AT_UB:
            return self.ub[j]
        return 0.0

    def full_solution(self) -> np.ndarray:
        x = np.where(self.status == _AT_UB, self.ub,
                     np.where(self.status == _AT_LB, self.lb, 0.0))
        x[~np.isfinite(x)] = 0.0
        x[self.basis] = self.xb
        return x

    def refactor(self) -> None:
        basis_matrix = self.a[:, self.basis]
        try:
            self.binv = np.linalg.inv(basis_matrix)
        except np.linalg.LinAlgError:
            self.binv = np.linalg.pinv(basis_matrix)
        self._since_refactor = 0

    def run(self, cost: np.ndarray, max_iter: int) -> str:
        """Iterate to optimality for `cost`; returns a status string."""
        while True:
            if self.iterations >= max_iter:
                return "limit"
            self.iterations += 1

            y = self.binv.T @ cost[self.basis]
            d = cost - self.a.T @ y

            can_up = (((self.status == _AT_LB) | (self.status == _AT_FREE))
                      & (d < -_COST_TOL) & (self.lb < self.ub))
            can_dn = (((self.status == _AT_UB) | (self.status == _AT_FREE))
                      & (d > _COST_TOL) & (self.lb < self.ub))
            eligible = np.nonzero(can_up | can_dn)[0]
            if eligible.size == 0:
                self._final_d = d
                self._final_y = y
                return "optimal"

            if self.bland:
                q = int(eligible[0])
            else:
                q = int(eligible[np.argmax(np.abs(d[eligible]))])
            direction = 1.0 if can_up[q] else -1.0

            w = self.binv @ self.a[:, q]
            # x_B moves by -direction * step * w; the entering column moves
            # by direction * step from its rest value.
            step_limit = np.inf
            leave_pos = -1
            leave_to = _AT_LB
            span = self.ub[q] - self.lb[q]
            if np.isfinite(span):
                step_limit = span
            rate = direction * w
            with np.errstate(divide="ignore", invalid="ignore"):
                down = np.where(rate > _PIVOT_TOL,
                                (self.xb - self.lb[self.basis]) / rate, np.inf)
                up = np.where(rate < -_PIVOT_TOL,
                              (self.ub[self.basis] - self.xb) / (-rate), np.inf)
            down[~np.isfinite(self.lb[self.basis])] = np.inf
            up[~np.isfinite(self.ub[self.basis])] = np.inf
            ratios = np.minimum(down, up)
            ratios[ratios < 0] = 0.0
            if ratios.size:
                best = float(ratios.min())
                if best < step_limit:
                    # Deterministic stabilizing tie-break: among rows within
                    # tolerance of the best ratio take the largest pivot.
                    tied = np.nonzero(ratios <= best + 1e-12)[0]
                    leave_pos = int(tied[np.argmax(np.abs(w[tied]))])
                    step_limit = best
                    leave_to = _AT_LB if down[leave_pos] <= up[leave_pos] else _AT_UB

            if not np.isfinite(step_limit):
                return "unbounded"

            if step_limit <= 1e-12:
                self._degen_run += 1
                if self._degen_run >= _DEGEN_STREAK:
                    self.bland = True
            else:
                self._degen_run = 0

            entering_value = self.nonbasic_value(q) + direction * step_limit
            self.xb = self.xb - rate * step_limit

            if leave_pos < 0:
                # Bound flip: the entering variable traverses its whole span.
                self.status[q] = _AT_UB if direction > 0 else _AT_LB
                continue

            leaving = int(self.basis[leave_pos])
            self.status[leaving] = leave_to
            self.status[q] = _BASIC
            self.basis[leave_pos] = q
            self.xb[leave_pos] = entering_value

            pivot = w[leave_pos]
            if abs(pivot) < _PIVOT_TOL:
                self.refactor()
                continue
            self.binv[leave_pos, :] /= pivot
            others = np.arange(self.m) != leave_pos
            self.binv[others, :] -= np.outer(w[others], self.binv[leave_pos, :])
            self._since_refactor += 1
            if self._since_refactor >= _REFACTOR_EVERY:
                self.refactor()


def _equilibrate(a: np.ndarray):
    """Inf-norm row and column scaling factors (1.0 where empty)."""
    absa = np.abs(a)
    row = absa.max(axis=1, initial=0.0)
    row[row == 0] = 1.0
    absa = absa / row[:, None]
    col = absa.max(axis=0, initial=0.0)
    col[col == 0] = 1.0
    return row, col


def solve_dense(c: np.ndarray, a: np.ndarray, sense: np.ndarray,
                b: np.ndarray, lb: np.ndarray, ub: np.ndarray,
                max_iter: int = 50_000) -> SimplexResult:
    """Solve min c@x s.t. a@x (sense) b, lb <= x <= ub."""
    m, n = a.shape
    c = np.asarray(c, dtype=float)
    b = np.asarray(b, dtype=float)
    lb = np.asarray(lb, dtype=float).copy()
    ub = np.asarray(ub, dtype=float).copy()

    infeasible_bounds = np.any(lb > ub + 1e-12)
    if infeasible_bounds:
        return SimplexResult("infeasible", None, np.nan, None, None, 0)

    # Equilibration: scaled variable x' = x / col, scaled row = row / rscale.
    rscale, cscale = _equilibrate(a)
    a_s = a / rscale[:, None] / cscale[None, :]
    b_s = b / rscale
    lb_s = lb * cscale
    ub_s = ub * cscale
    c_s = c / cscale

    # Slack columns: one per row, coefficient +1 in the scaled system.
    slack_lb = np.empty(m)
    slack_ub = np.empty(m)
    for i in range(m):
        if sense[i] == SENSE_LE:
            slack_lb[i], slack_ub[i] = 0.0, np.inf
        elif sense[i] == SENSE_GE:
            slack_lb[i], slack_ub[i] = -np.inf, 0.0
        elif sense[i] == SENSE_EQ:
            slack_lb[i], slack_ub[i] = 0.0, 0.0
        else:
            raise ValueError(f"unknown row sense {sense[i]}")

    a_ext = np.hstack([a_s, np.eye(m)])
    lb_ext = np.concatenate([lb_s, slack_lb])
    ub_ext = np.concatenate([ub_s, slack_ub])

    tab = _Tableau(a_ext, lb_ext, ub_ext)

    # Rest positions: nearest finite bound, else free at zero.
    for j in range(tab.n):
        lo, hi = lb_ext[j], ub_ext[j]
        if np.isfinite(lo) and np.isfinite(hi):
            tab.status[j] = _AT_LB if abs(lo) <= abs(hi) else _AT_UB
        elif np.isfinite(lo):
            tab.status[j] = _AT_LB
        elif np.isfinite(hi):
            tab.status[j] = _AT_UB
        else:
            tab.status[j] = _AT_FREE

    rest = np.array([tab.nonbasic_value(j) for j in range(n + m)])
    residual = b_s - a_ext @ rest

    # Start from the slack basis; rows whose slack cannot absorb the
    # residual get an artificial column and a phase-1 cost.
    artificials: list[int] = []
    art_cols = []
    slack_ids = np.arange(n, n + m)
    tab.basis = slack_ids.copy()
    tab.status[slack_ids] = _BASIC
    xb = rest[slack_ids] + residual
    for i in range(m):
        lo, hi = slack_lb[i], slack_ub[i]
        if xb[i] < lo - _FEAS_TOL or xb[i] > hi + _FEAS_TOL:
            clamp = min(max(xb[i], lo), hi)
            shortfall = xb[i] - clamp
            tab.status[slack_ids[i]] = (_AT_LB if clamp == lo else _AT_UB)
            col = np.zeros(m)
            col[i] = 1.0 if shortfall >= 0 else -1.0
            art_cols.append(col)
            artificials.append(i)
            xb[i] = abs(shortfall)
        # else: slack stays basic at xb[i]

    if artificials:
        k = len(artificials)
        a_full = np.hstack([a_ext, np.column_stack(art_cols)])
        lb_full = np.concatenate([lb_ext, np.zeros(k)])
        ub_full = np.concatenate([ub_ext, np.full(k, np.inf)])
        tab2 = _Tableau(a_full, lb_full, ub_full)
        tab2.status[:tab.n] = tab.status
        tab2.basis = tab.basis.copy()
        art_ids = np.arange(n + m, n + m + k)
        for pos, row in enumerate(artificials):
            tab2.basis[row] = art_ids[pos]
            tab2.status[art_ids[pos]] = _BASIC
        tab2.status[slack_ids] = np.where(
            np.isin(slack_ids, tab2.basis), _BASIC, tab2.status[slack_ids])
        tab2.xb = xb
        # Artificials covering a negative residual carry a -1 column, so the
        # starting basis is not the identity; rebuild its inverse.
        tab2.refactor()
        tab = tab2

        phase1_cost = np.zeros(tab.n)
        phase1_cost[art_ids] = 1.0
        status = tab.run(phase1_cost, max_iter)
        if status == "limit":
            return SimplexResult("limit", None, np.nan, None, None,
                                 tab.iterations)
        art_level = float(phase1_cost[tab.basis] @ np.abs(tab.xb))
        if art_level > 1e-7:
            return SimplexResult("infeasible", None, np.nan, None, None,
                                 tab.iterations)
        # Pin the artificials for phase 2.
        tab.ub[art_ids] = 0.0
        cost = np.zeros(tab.n)
        cost[:n] = c_s
    else:
        tab.xb = xb
        cost = np.zeros(tab.n)
        cost[:n] = c_s

    status = tab.run(cost, max_iter)
    if status in ("limit", "unbounded"):
        return SimplexResult(status, None, np.nan, None, None, tab.iterations)

    x_scaled = tab.full_solution()[:n]
    x = x_scaled / cscale
    # Clip floating dust back into the declared bounds.
    x = np.minimum(np.maximum(x, lb), ub)
    duals = tab._final_y / rscale
    reduced = tab._final_d[:n] * cscale
    objective = float(c @ x)
    return SimplexResult("optimal", x, objective, duals, reduced,
                         tab.iterations)
