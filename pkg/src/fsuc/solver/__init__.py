"""LP and MIP solving behind a small backend-agnostic interface.

Two backends: "bundled" (dense two-phase revised simplex plus best-first
branch and bound, no dependencies beyond numpy, deterministic) and
"scipy" (HiGHS through scipy.optimize, the production choice for the
rolling studies).  "auto" picks scipy when importable, else bundled.

MPS export lets any instance be inspected or replayed standalone:

>>> from fsuc.solver import write_mps, read_mps, solve_lp
>>> write_mps(lp, "model.mps")           # doctest: +SKIP
>>> again = read_mps("model.mps")        # doctest: +SKIP
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..ucmodel.lp import LinearProgram
from .mps import read_mps, write_mps
from .simplex import solve_dense

__all__ = [
    "SolveOptions", "SolveOutcome", "solve_lp", "solve_mip",
    "available_backends", "dual_objective", "read_mps", "write_mps",
]

# Largest dense (rows x cols-with-slacks) footprint the bundled backend
# will materialize; beyond this the scipy backend is the right tool.
_DENSE_CELL_LIMIT = 40_000_000


@dataclass
class SolveOptions:
    backend: str = "auto"             # auto | scipy | bundled
    time_limit: Optional[float] = None  # wall seconds; None = no limit
    max_iterations: int = 200_000     # simplex pivots (bundled)
    max_nodes: int = 100_000          # branch-and-bound nodes (bundled)
    mip_rel_gap: float = 1e-9


@dataclass
class SolveOutcome:
    status: str                       # optimal | infeasible | unbounded |
                                      # iteration_limit | time_limit | error
    objective: float
    x: Optional[np.ndarray]
    duals: Optional[np.ndarray] = None
    reduced_costs: Optional[np.ndarray] = None
    iterations: int = 0
    nodes: int = 0
    wall_time: float = 0.0            # s
    backend: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def available_backends() -> tuple[str, ...]:
    try:
        import scipy.optimize  # noqa: F401
        return ("scipy", "bundled")
    except ImportError:  # pragma: no cover - scipy is a hard dependency here
        return ("bundled",)


def _pick(backend: str) -> str:
    if backend == "auto":
        return available_backends()[0]
    if backend not in ("scipy", "bundled"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend


def _dense_parts(lp: LinearProgram):
    lp.finalize()
    cells = lp.nrows * (lp.ncols + lp.nrows)
    if cells > _DENSE_CELL_LIMIT:
        raise ValueError(
            f"instance too large for the bundled dense backend "
            f"({lp.nrows} rows x {lp.ncols} cols); use backend='scipy'")
    return lp.to_dense()


def solve_lp(lp: LinearProgram, options: Optional[SolveOptions] = None) -> SolveOutcome:
    """Solve the continuous relaxation (integer flags ignored)."""
    options = options or SolveOptions()
    backend = _pick(options.backend)
    lp.finalize()
    t0 = time.perf_counter()

    if backend == "scipy":
        from .scipy_backend import solve_lp_scipy
        status, x, obj, duals, reduced, nit = solve_lp_scipy(
            lp, time_limit=options.time_limit)
        return SolveOutcome(status, obj, x, duals, reduced, iterations=nit,
                            wall_time=time.perf_counter() - t0, backend=backend)

    a = _dense_parts(lp)
    res = solve_dense(lp.obj, a, lp.sense, lp.rhs, lp.lb, lp.ub,
                      max_iter=options.max_iterations)
    status = "iteration_limit" if res.status == "limit" else res.status
    return SolveOutcome(status, res.objective, res.x, res.duals,
                        res.reduced_costs, iterations=res.iterations,
                        wall_time=time.perf_counter() - t0, backend=backend)


def solve_mip(lp: LinearProgram, options: Optional[SolveOptions] = None) -> SolveOutcome:
    """Solve honoring the integer flags; falls back to solve_lp if none."""
    options = options or SolveOptions()
    lp.finalize()
    if not lp.has_integers:
        return solve_lp(lp, options)
    backend = _pick(options.backend)
    t0 = time.perf_counter()

    if backend == "scipy":
        from .scipy_backend import solve_mip_scipy
        status, x, obj, nodes = solve_mip_scipy(
            lp, time_limit=options.time_limit, rel_gap=options.mip_rel_gap)
        return SolveOutcome(status, obj, x, nodes=nodes,
                            wall_time=time.perf_counter() - t0, backend=backend)

    a = _dense_parts(lp)

    def relax(nlb, nub):
        r = solve_dense(lp.obj, a, lp.sense, lp.rhs, nlb, nub,
                        max_iter=options.max_iterations)
        return r.status, r.x, r.objective, r.iterations

    from .branch_bound import solve_binary
    res = solve_binary(relax, lp.lb.copy(), lp.ub.copy(), lp.integer,
                       max_nodes=options.max_nodes,
                       time_limit=options.time_limit)
    elapsed = time.perf_counter() - t0
    status = res.status
    if status == "limit":
        timed_out = (options.time_limit is not None
                     and elapsed >= options.time_limit)
        status = "time_limit" if timed_out else "iteration_limit"
    return SolveOutcome(status, res.objective, res.x, nodes=res.nodes,
                        iterations=res.iterations, wall_time=elapsed,
                        backend=backend)


def dual_objective(lp: LinearProgram, duals: np.ndarray,
                   reduced: np.ndarray) -> float:
    """Lower bound implied by (duals, reduced); equals the primal objective
    at an exact optimum.  Multipliers resting on infinite bounds are
    tolerance dust and contribute nothing."""
    lp.finalize()
    val = float(duals @ lp.rhs)
    pos = (reduced > 0) & np.isfinite(lp.lb)
    neg = (reduced < 0) & np.isfinite(lp.ub)
    val += float(reduced[pos] @ lp.lb[pos])
    val += float(reduced[neg] @ lp.ub[neg])
    return val
