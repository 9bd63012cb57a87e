"""Best-first branch and bound over LP relaxations.

Nodes are ordered by relaxation bound with an insertion counter as the
tie-break, branching picks the most fractional integer variable (lowest
id on ties), and the floor child is pushed before the ceil child.  All
choices are deterministic so repeated solves return identical schedules.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

_INT_TOL = 1e-6


@dataclass
class BnbResult:
    status: str          # optimal | infeasible | limit
    x: Optional[np.ndarray]
    objective: float
    nodes: int
    iterations: int      # summed LP iterations


def solve_binary(relax: Callable, lb: np.ndarray, ub: np.ndarray,
                 integer_mask: np.ndarray, max_nodes: int = 100_000,
                 time_limit: Optional[float] = None,
                 abs_gap: float = 1e-9) -> BnbResult:
    """Minimize over the integrality constraints in `integer_mask`.

    Parameters
    ----------
    relax : callable
        ``relax(lb, ub) -> (status, x, objective, iterations)`` solving the
        continuous relaxation under the given bound vectors.
    lb, ub : ndarray
        Root bound vectors.
    integer_mask : ndarray of bool
        Variables required to take integer values.
    """
    int_ids = np.nonzero(integer_mask)[0]
    deadline = None if time_limit is None else time.monotonic() + time_limit

    def fractional(x: np.ndarray) -> Optional[int]:
        if int_ids.size == 0:
            return None
        frac = np.abs(x[int_ids] - np.round(x[int_ids]))
        if frac.max(initial=0.0) <= _INT_TOL:
            return None
        scores = -np.abs(frac - 0.5)
        scores[frac <= _INT_TOL] = -np.inf
        return int(int_ids[int(np.argmax(scores))])

    counter = 0
    heap: list = []

    def push(bound: float, node_lb: np.ndarray, node_ub: np.ndarray) -> None:
        nonlocal counter
        heapq.heappush(heap, (bound, counter, node_lb, node_ub))
        counter += 1

    def branch(bound: float, x: np.ndarray, j: int,
               node_lb: np.ndarray, node_ub: np.ndarray) -> None:
        floor_ub = node_ub.copy()
        floor_ub[j] = np.floor(x[j])
        push(bound, node_lb, floor_ub)
        ceil_lb = node_lb.copy()
        ceil_lb[j] = np.ceil(x[j])
        push(bound, ceil_lb, node_ub)

    status0, x0, obj0, it0 = relax(lb, ub)
    nodes = 1
    iterations = it0
    if status0 == "infeasible":
        return BnbResult("infeasible", None, np.nan, nodes, iterations)
    if status0 != "optimal":
        return BnbResult("limit", None, np.nan, nodes, iterations)
    j0 = fractional(x0)
    if j0 is None:
        return BnbResult("optimal", x0, obj0, nodes, iterations)
    branch(obj0, x0, j0, lb.copy(), ub.copy())

    best_x: Optional[np.ndarray] = None
    best_obj = np.inf
    hit_limit = False

    while heap:
        if nodes >= max_nodes:
            hit_limit = True
            break
        if deadline is not None and time.monotonic() > deadline:
            hit_limit = True
            break
        bound, _, node_lb, node_ub = heapq.heappop(heap)
        if bound >= best_obj - abs_gap:
            continue
        status, x, obj, it = relax(node_lb, node_ub)
        nodes += 1
        iterations += it
        if status == "infeasible":
            continue
        if status != "optimal":
            hit_limit = True
            break
        if obj >= best_obj - abs_gap:
            continue
        j = fractional(x)
        if j is None:
            best_obj = obj
            best_x = x
            continue
        branch(obj, x, j, node_lb, node_ub)

    if best_x is not None:
        open_bound = min((h[0] for h in heap), default=np.inf)
        if hit_limit and open_bound < best_obj - abs_gap:
            return BnbResult("limit", best_x, best_obj, nodes, iterations)
        return BnbResult("optimal", best_x, best_obj, nodes, iterations)
    if hit_limit:
        return BnbResult("limit", None, np.nan, nodes, iterations)
    return BnbResult("infeasible", None, np.nan, nodes, iterations)
