"""HiGHS-backed solves via scipy.optimize (linprog and milp)."""

from __future__ import annotations

from typing import Optional

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from ..ucmodel.lp import LinearProgram, SENSE_EQ, SENSE_GE, SENSE_LE

# scipy status codes -> our vocabulary.  linprog: 1 is iteration limit;
# milp: 1 covers both its iteration and time limits.
_STATUS = {0: "optimal", 1: "iteration_limit", 2: "infeasible",
           3: "unbounded", 4: "error"}


def _matrix(lp: LinearProgram) -> sparse.csr_matrix:
    lp.finalize()
    a = sparse.coo_matrix((lp.tri_val, (lp.tri_row, lp.tri_col)),
                          shape=(lp.nrows, lp.ncols)).tocsr()
    a.sum_duplicates()
    return a


def solve_lp_scipy(lp: LinearProgram, time_limit: Optional[float] = None):
    """Continuous solve; integer flags are ignored.

    Returns (status, x, objective, duals, reduced_costs, iterations).
    """
    a = _matrix(lp)
    le = lp.sense == SENSE_LE
    ge = lp.sense == SENSE_GE
    eq = lp.sense == SENSE_EQ
    ineq = le | ge
    sign = np.where(ge[ineq], -1.0, 1.0)

    a_ub = b_ub = a_eq = b_eq = None
    if ineq.any():
        a_ub = sparse.diags(sign) @ a[ineq]
        b_ub = lp.rhs[ineq] * sign
    if eq.any():
        a_eq = a[eq]
        b_eq = lp.rhs[eq]

    options = {"presolve": True}
    if time_limit is not None:
        options["time_limit"] = float(time_limit)
    res = linprog(lp.obj, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                  bounds=np.column_stack([lp.lb, lp.ub]),
                  method="highs", options=options)

    status = _STATUS.get(res.status, "error")
    if status != "optimal":
        return status, None, np.nan, None, None, _nit(res)

    duals = np.zeros(lp.nrows)
    if ineq.any():
        duals[ineq] = res.ineqlin.marginals * sign
    if eq.any():
        duals[eq] = res.eqlin.marginals
    reduced = res.lower.marginals + res.upper.marginals
    return status, np.asarray(res.x), float(res.fun), duals, reduced, _nit(res)


def solve_mip_scipy(lp: LinearProgram, time_limit: Optional[float] = None,
                    rel_gap: float = 1e-9):
    """Integer-constrained solve.  Returns (status, x, objective, nodes)."""
    a = _matrix(lp)
    lower = np.where(lp.sense == SENSE_LE, -np.inf, lp.rhs)
    upper = np.where(lp.sense == SENSE_GE, np.inf, lp.rhs)

    options = {"presolve": True, "mip_rel_gap": rel_gap}
    if time_limit is not None:
        options["time_limit"] = float(time_limit)
    res = milp(c=lp.obj,
               constraints=LinearConstraint(a, lower, upper),
               integrality=lp.integer.astype(np.uint8),
               bounds=Bounds(lp.lb, lp.ub),
               options=options)

    status = _STATUS.get(res.status, "error")
    if res.x is None and status == "optimal":
        status = "error"
    x = None if res.x is None else np.asarray(res.x)
    obj = np.nan if res.fun is None else float(res.fun)
    nodes = int(getattr(res, "mip_node_count", 0) or 0)
    return status, x, obj, nodes


def _nit(res) -> int:
    nit = getattr(res, "nit", 0)
    try:
        return int(nit)
    except (TypeError, ValueError):
        return 0
