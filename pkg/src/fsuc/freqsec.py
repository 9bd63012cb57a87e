"""Post-fault frequency security: RoCoF floor, nadir algebra, cuts, ODE oracle.

After losing an infeed of `p_loss` MW, system frequency obeys the swing
equation; enhanced frequency response (EFR) ramps in fully by `t_efr` seconds
and primary frequency response (PFR) by `t_pfr` seconds.  Three requirements
define a secure operating state:

* RoCoF: the initial rate of change of frequency, f0 * p_loss / (2 * H), must
  not exceed `rocof_max`.
* Nadir: the frequency minimum must stay above f0 - delta_f_max.  When the
  minimum falls between the two delivery times, the closed form is
  (H/f0 - efr*t_efr/(4*delta_f_max)) * pfr/t_pfr >= (p_loss - efr)^2/(4*delta_f_max).
* Quasi-steady state: efr + pfr >= p_loss so that frequency recovers at all.

The nadir requirement is nonlinear in (H, efr, pfr, p_loss).  For use inside a
linear program it is rewritten as a floor on inertia,

    H >= g(pfr, efr, p_loss)
       = f0 * [ (p_loss - efr)^2 * t_pfr / (4 * delta_f_max * pfr)
                + efr * t_efr / (4 * delta_f_max) ],

and g is replaced by per-cell linear cuts that lie on or above g over their
own grid cell.  Any point inside the gridded box with p_loss > efr that
satisfies all cuts therefore satisfies the exact nadir requirement; the price
is a conservatism bounded by the recorded per-cell overshoot.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .coretypes import FreqSecurityParams

# Default generating grids for nadir cuts (MW).  Configurable per call; the
# UC assembly derives case-adapted grids from these.
DEFAULT_PFR_GRID = tuple(float(x) for x in range(250, 2501, 250))
DEFAULT_EFR_GRID = tuple(float(x) for x in range(0, 2001, 250))
DEFAULT_P_LOSS_GRID = (900.0, 1350.0, 1800.0, 2800.0)


@dataclass(frozen=True)
class FrequencyState:
    """Operating point relevant to post-fault frequency behaviour."""

    inertia: float  # MVA.s, post-loss system inertia H
    efr: float      # MW of enhanced frequency response
    pfr: float      # MW of primary frequency response
    p_loss: float   # MW of lost infeed


# ---------------------------------------------------------------------------
# Closed-form requirements
# ---------------------------------------------------------------------------

def min_inertia_for_rocof(p_loss: float, rocof_max: float, f0: float) -> float:
    """MVA.s of inertia needed to cap the initial RoCoF at `rocof_max`."""
    if rocof_max <= 0:
        raise ValueError("rocof_max must be positive")
    return f0 * p_loss / (2.0 * rocof_max)


def nadir_inertia_requirement(efr: float, pfr: float, p_loss: float,
                              params: FreqSecurityParams) -> float:
    """Exact inertia floor g(pfr, efr, p_loss) from the nadir requirement.

    Defined for pfr > 0; the quadratic term uses (p_loss - efr)^2 regardless
    of sign, which matches the closed form on its validity window and is a
    convex over-statement elsewhere.
    """
    if pfr <= 0:
        raise ValueError("pfr must be positive for the nadir closed form")
    four_df = 4.0 * params.delta_f_max
    quad = (p_loss - efr) ** 2 * params.t_pfr / (four_df * pfr)
    ramp = efr * params.t_efr / four_df
    return params.f0 * (quad + ramp)


def nadir_satisfied(state: FrequencyState, params: FreqSecurityParams) -> bool:
    """True when the operating point meets the nadir requirement.

    When efr covers the loss entirely the closed form does not apply and the
    point is accepted provided inertia meets the RoCoF floor.
    """
    if state.efr >= state.p_loss:
        floor = min_inertia_for_rocof(state.p_loss, params.rocof_max, params.f0)
        return state.inertia >= floor
    if state.pfr <= 0:
        return False
    four_df = 4.0 * params.delta_f_max
    lhs = (state.inertia / params.f0
           - state.efr * params.t_efr / four_df) * state.pfr / params.t_pfr
    rhs = (state.p_loss - state.efr) ** 2 / four_df
    return lhs >= rhs


# ---------------------------------------------------------------------------
# Conservative linear cuts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NadirCut:
    """Linear inequality a_h*H + a_efr*efr + a_pfr*pfr + a_ploss*p_loss >= rhs."""

    a_h: float
    a_efr: float
    a_pfr: float
    a_ploss: float
    rhs: float
    anchor: tuple[float, float, float]  # (pfr, efr, p_loss) exactness corner
    conservatism: float                 # MVA.s worst overshoot over the cell

    def value(self, state: FrequencyState) -> float:
        """Signed slack; non-negative when the cut is satisfied."""
        return (self.a_h * state.inertia + self.a_efr * state.efr
                + self.a_pfr * state.pfr + self.a_ploss * state.p_loss
                - self.rhs)


@dataclass(frozen=True)
class NadirCutSet:
    """All cuts generated from one grid, with the domain they cover."""

    cuts: tuple[NadirCut, ...]
    pfr_grid: tuple[float, ...]
    efr_grid: tuple[float, ...]
    p_loss_grid: tuple[float, ...]
    max_conservatism: float  # MVA.s, worst lift over all cells

    def satisfied(self, state: FrequencyState, tol: float = 0.0) -> bool:
        return all(cut.value(state) >= -tol for cut in self.cuts)

    def required_inertia(self, efr: float, pfr: float, p_loss: float) -> float:
        """Inertia floor the cut set imposes at a response point."""
        probe = FrequencyState(inertia=0.0, efr=efr, pfr=pfr, p_loss=p_loss)
        req = 0.0
        for cut in self.cuts:
            if cut.a_h > 0:
                req = max(req, -cut.value(probe) / cut.a_h)
        return req


def _cells(grid: Sequence[float]) -> list[tuple[float, float]]:
    pts = sorted(float(x) for x in grid)
    if len(pts) == 1:
        return [(pts[0], pts[0])]
    return list(zip(pts[:-1], pts[1:]))


def build_nadir_cuts(params: FreqSecurityParams,
                     pfr_grid: Sequence[float] = DEFAULT_PFR_GRID,
                     efr_grid: Sequence[float] = DEFAULT_EFR_GRID,
                     p_loss_grid: Sequence[float] = DEFAULT_P_LOSS_GRID,
                     margin: float = 0.0) -> NadirCutSet:
    """Conservative piecewise-linear cuts for the nadir inertia floor.

    Writing d = p_loss - efr, the floor is g = k_quad * d^2 / pfr
    + k_ramp * efr.  Over one grid cell the convex factors d^2 and 1/pfr are
    replaced by their secants through the cell edges, which overestimate them
    inside the cell, and the product of the secants by its McCormick upper
    plane.  The resulting cut is linear in (pfr, efr, p_loss), touches g at
    the cell's conservative corner (lowest pfr, largest d) and at the
    (highest pfr, largest d) corner, lies on or above g over the whole cell,
    and falls away from g outside it, so stacking every cell's cut keeps the
    binding requirement near the exact floor.  Cells lying entirely in the
    region efr >= p_loss are skipped: there the closed form does not bind and
    the RoCoF floor plus the EFR containment guard govern.

    `margin` is added to every right-hand side (MVA.s).
    """
    if min(pfr_grid) <= 0:
        raise ValueError("pfr grid must be strictly positive")
    four_df = 4.0 * params.delta_f_max
    k_quad = params.f0 * params.t_pfr / four_df
    k_ramp = params.f0 * params.t_efr / four_df

    cuts: list[NadirCut] = []
    worst = 0.0
    for (plo, phi) in _cells(pfr_grid):
        for (elo, ehi) in _cells(efr_grid):
            for (llo, lhi) in _cells(p_loss_grid):
                d_hi = lhi - elo
                if d_hi <= 0:
                    continue  # efr covers the loss on the whole cell
                d_lo = max(llo - ehi, 0.0)
                # Secants: 1/pfr <= 1/plo + 1/phi - pfr/(plo*phi) on the cell,
                # d^2 <= (d_lo + d_hi)*d - d_lo*d_hi on [d_lo, d_hi]; their
                # product is bounded by the McCormick plane exact at d = d_hi.
                sig_hi = d_hi * d_hi
                a_p = -k_quad * sig_hi / (plo * phi)
                a_d = k_quad * (d_lo + d_hi) / phi
                const = k_quad * (sig_hi / plo - d_lo * d_hi / phi)
                # Cut: H >= a_p*pfr + a_d*(p_loss - efr) + k_ramp*efr + const.
                overshoot = _cell_overshoot(a_p, a_d, const, k_quad,
                                            plo, phi, d_lo, d_hi)
                worst = max(worst, overshoot)
                cuts.append(NadirCut(
                    a_h=1.0, a_efr=a_d - k_ramp, a_pfr=-a_p, a_ploss=-a_d,
                    rhs=const + margin, anchor=(plo, elo, lhi),
                    conservatism=overshoot))

    return NadirCutSet(
        cuts=tuple(cuts),
        pfr_grid=tuple(sorted(float(x) for x in pfr_grid)),
        efr_grid=tuple(sorted(float(x) for x in efr_grid)),
        p_loss_grid=tuple(sorted(float(x) for x in p_loss_grid)),
        max_conservatism=worst)


def _cell_overshoot(a_p: float, a_d: float, const: float, k_quad: float,
                    plo: float, phi: float, d_lo: float, d_hi: float) -> float:
    """Worst excess of a cell's cut over the exact floor, on that cell.

    The excess a_p*p + a_d*d + const - k_quad*d^2/p is jointly concave on
    p > 0, so its maximum sits at a corner or where a partial derivative
    vanishes; all candidates are closed-form.
    """
    def excess(p: float, d: float) -> float:
        return a_p * p + a_d * d + const - k_quad * d * d / p

    p_cands = {plo, phi}
    d_cands = {d_lo, d_hi}
    for d in (d_lo, d_hi):
        if a_p < 0 and d > 0:
            p_cands.add(min(max(d * np.sqrt(k_quad / -a_p), plo), phi))
    for p in (plo, phi):
        d_cands.add(min(max(a_d * p / (2.0 * k_quad), d_lo), d_hi))
    return max(excess(p, d) for p in p_cands for d in d_cands)


# ---------------------------------------------------------------------------
# Time-domain oracle
# ---------------------------------------------------------------------------

@dataclass
class FrequencyTrajectory:
    """Outcome of a swing-equation integration."""

    nadir: float      # Hz, lowest frequency reached
    t_nadir: float    # s at which the minimum occurred
    max_rocof: float  # Hz/s, largest magnitude of df/dt
    times: Optional[np.ndarray] = field(default=None, repr=False)
    freqs: Optional[np.ndarray] = field(default=None, repr=False)


def simulate_frequency(state: FrequencyState, params: FreqSecurityParams,
                       dt: float = 1e-3, t_end: float = 30.0,
                       record: bool = False) -> FrequencyTrajectory:
    """Integrate the post-fault swing equation with fixed-step RK4.

    (2 H / f0) * df/dt = -p_loss + R(t) where the response ramp is
    R(t) = efr * min(t/t_efr, 1) + pfr * min(t/t_pfr, 1).  Integration stops
    at `t_end` or as soon as frequency recovers through its minimum.
    """
    if state.inertia <= 0:
        raise ValueError("inertia must be positive to simulate")
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")

    f0 = params.f0
    efr, pfr, p_loss = state.efr, state.pfr, state.p_loss
    t_efr, t_pfr = params.t_efr, params.t_pfr
    gain = f0 / (2.0 * state.inertia)

    def deriv(t: float) -> float:
        resp = (efr * min(t / t_efr, 1.0) + pfr * min(t / t_pfr, 1.0))
        return gain * (resp - p_loss)

    n_steps = int(round(t_end / dt))
    f = f0
    t = 0.0
    nadir = f0
    t_nadir = 0.0
    max_rocof = 0.0
    ts = [0.0] if record else None
    fs = [f0] if record else None

    for _ in range(n_steps):
        d1 = deriv(t)
        if abs(d1) > max_rocof:
            max_rocof = abs(d1)
        if d1 > 0.0 and f >= nadir:
            break  # recovered through the minimum
        # RK4 on df/dt = deriv(t); the rate depends on time only.
        d2 = deriv(t + 0.5 * dt)
        d4 = deriv(t + dt)
        f = f + (dt / 6.0) * (d1 + 4.0 * d2 + d4)
        t = t + dt
        if f < nadir:
            nadir = f
            t_nadir = t
        if record:
            ts.append(t)
            fs.append(f)

    return FrequencyTrajectory(
        nadir=nadir, t_nadir=t_nadir, max_rocof=max_rocof,
        times=np.asarray(ts) if record else None,
        freqs=np.asarray(fs) if record else None)


def write_trajectory(traj: FrequencyTrajectory, path: str) -> None:
    """Dump a recorded trajectory as two-column time/frequency text."""
    if traj.times is None or traj.freqs is None:
        raise ValueError("trajectory was not recorded; pass record=True")
    with open(path, "w", encoding="ascii") as handle:
        handle.write("time_s,frequency_hz\n")
        for t, f in zip(traj.times, traj.freqs):
            handle.write(f"{t!r},{f!r}\n")
