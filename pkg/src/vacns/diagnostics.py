"""Conserved quantities, the kinetic-energy floor, residuals, and audits.

For the continuous system total mass m(t) and momentum P(t) are conserved,
and the Cauchy-Schwarz bound |P|^2 <= 2 m E_k pins the kinetic energy from
below: E_k(t) >= C0 = |P(0)|^2 / (2 m(0)), hence |u(t)|_inf >= C_u =
sqrt(2 C0 / m(0)). The discrete scheme is advective (non-conservative), so
the floors are asserted with a drift allowance measured from the trajectory
itself. The same-snapshot Cauchy-Schwarz inequality is exact on the grid,
which makes the allowance a small, provable correction.

The audits sample numerical inequality constants: the interpolation
inequality |f|_p^p <= C |f|_2^{(6-p)/2} |grad f|_2^{(3p-6)/2} (p in [2,6])
and the first-order commutator bound |grad(fg) - f grad g|_r <=
C (|grad f|_a |g|_b + |grad f|_b |g|_a). They assert stabilization of the
empirical maxima under corpus growth, never a specific constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid
from .picard import Trajectory
from .randfields import audit_field, audit_pair
from .state import FluidState, PhysParams, ebar_from_state, psi_from_c, rho_from_c

DRIFT_ALLOWANCE_CAP = 0.2
_EPS = 1e-300


@dataclass
class ConservedRecord:
    """Mass, momentum, kinetic energy and floors at one sample time.

    ``c0_floor``/``u_floor`` come from the t = 0 record of the trajectory;
    the margins are relative slack against the drift-adjusted floors and are
    None when the floors do not apply (zero initial momentum or vacuum).
    """

    t: float
    mass: float
    momentum: np.ndarray
    e_kin: float
    sup_u: float
    c0_floor: float | None = None
    u_floor: float | None = None
    ek_margin: float | None = None
    u_margin: float | None = None


def conserved_quantities(state: FluidState, params: PhysParams) -> ConservedRecord:
    """Riemann sums of rho, rho*u and 0.5*rho*|u|^2 for one snapshot."""
    grid = state.grid
    rho = rho_from_c(state.c, params)
    mass = grid.integral(rho)
    momentum = np.atleast_1d(grid.integral(rho[..., None] * state.u))
    u_sq = np.einsum("...a,...a->...", state.u, state.u)
    e_kin = 0.5 * grid.integral(rho * u_sq)
    sup_u = grid.norm(state.u, np.inf)
    return ConservedRecord(state.t, mass, momentum, e_kin, sup_u)


def conservation_drift(traj: Trajectory, params: PhysParams,
                       records: list[ConservedRecord] | None = None) -> tuple[float, float]:
    """Largest relative mass and momentum drift over the sampled trajectory."""
    if records is None:
        records = [conserved_quantities(s, params) for s in traj.states]
    if len(records) < 2:
        return 0.0, 0.0
    m0 = records[0].mass
    p0 = np.linalg.norm(records[0].momentum)
    mass_drift = max(abs(r.mass - m0) for r in records) / max(m0, _EPS)
    mom_drift = max(float(np.linalg.norm(r.momentum - records[0].momentum))
                    for r in records) / max(p0, _EPS)
    return mass_drift, mom_drift


def drift_allowance(mass_drift: float, momentum_drift: float) -> float:
    """Relative slack absorbing measured drift in the floor inequalities.

    2*dP + dm covers the energy floor exactly to first order and
    2*(dP + dm) covers the velocity floor; the allowance is capped so a
    grossly non-conservative trajectory cannot excuse itself.
    """
    return min(2.0 * (momentum_drift + mass_drift), DRIFT_ALLOWANCE_CAP)


def conserved_table(traj: Trajectory, params: PhysParams) -> list[ConservedRecord]:
    """Per-sample records with floors and drift-adjusted margins attached."""
    records = [conserved_quantities(s, params) for s in traj.states]
    r0 = records[0]
    p0 = float(np.linalg.norm(r0.momentum))
    if r0.mass <= 0 or p0 == 0.0:
        return records
    c0_floor = p0 ** 2 / (2.0 * r0.mass)
    u_floor = float(np.sqrt(2.0 * c0_floor / r0.mass))
    mass_drift, mom_drift = conservation_drift(traj, params, records)
    allowance = drift_allowance(mass_drift, mom_drift)
    for rec in records:
        rec.c0_floor, rec.u_floor = c0_floor, u_floor
        rec.ek_margin = rec.e_kin / c0_floor - (1.0 - allowance)
        rec.u_margin = rec.sup_u / u_floor - (1.0 - allowance)
    return records


@dataclass(frozen=True)
class NondecayVerdict:
    applicable: bool
    passed: bool
    margin: float
    u_floor: float
    min_sup_u: float
    allowance: float


def nondecay_check(traj: Trajectory, params: PhysParams) -> NondecayVerdict:
    """Assert min_t |u(t)|_inf >= C_u * (1 - allowance) over the samples.

    Trajectories with zero initial momentum (or vacuum) are not applicable:
    the floor degenerates to zero.
    """
    records = conserved_table(traj, params)
    r0 = records[0]
    if r0.u_floor is None:
        return NondecayVerdict(False, True, 0.0, 0.0, 0.0, 0.0)
    mass_drift, mom_drift = conservation_drift(traj, params, records)
    allowance = drift_allowance(mass_drift, mom_drift)
    min_sup = min(r.sup_u for r in records)
    margin = min_sup / r0.u_floor - (1.0 - allowance)
    return NondecayVerdict(True, margin >= 0.0, margin, r0.u_floor, min_sup, allowance)


def original_residual(state: FluidState, state_prev: FluidState, dt: float,
                      params: PhysParams) -> tuple[float, float]:
    """L2 defect of the recovered (rho, u) in the original equations.

    Uses backward time differences between the two snapshots and central
    space differences; both residuals vanish at the scheme's order under
    refinement. Decay boxes are evaluated two layers away from the faces.
    """
    grid = state.grid
    rho = rho_from_c(state.c, params)
    rho_prev = rho_from_c(state_prev.c, params)
    u, u_prev = state.u, state_prev.u

    mass_res = ((rho - rho_prev) / dt
                + np.einsum("...a,...a->...", u, grid.gradient(rho))
                + rho * grid.divergence(u))

    pressure = params.A * rho ** params.gamma
    e_of_rho = ebar_from_state(state, params) if params.is_powerlaw else \
        params.second_viscosity(rho)
    jac = grid.jacobian(u)
    divu = np.einsum("...ii->...", jac)
    stress = params.alpha * rho[..., None, None] * (jac + np.swapaxes(jac, -1, -2))
    diag = rho * e_of_rho * divu
    for i in range(grid.dim):
        stress[..., i, i] += diag
    mom_res = (rho[..., None] * (u - u_prev) / dt
               + rho[..., None] * np.einsum("...ia,...a->...i", jac, u)
               + grid.gradient(pressure)
               - grid.tensor_divergence(stress))

    sl = grid.interior_slices(depth=2)
    vol = grid.cell_volume
    r_mass = float(np.sqrt((mass_res[sl] ** 2).sum() * vol))
    r_mom = float(np.sqrt((mom_res[sl] ** 2).sum() * vol))
    return r_mass, r_mom


@dataclass
class RegularityRecord:
    """Discrete analogs of the norm groups a healthy solution keeps finite."""

    t: float
    c_h2: float
    psi_d1: float
    u_h2: float
    ct_h1: float | None = None
    psit_l2: float | None = None
    ut_l2: float | None = None
    u_d3_sq_time_integral: float = 0.0
    blown_up: bool = False


def regularity_monitor(traj: Trajectory, params: PhysParams,
                       ceiling: float = 1e8) -> list[RegularityRecord]:
    """Norm groups per sample; time derivatives by backward differences.

    The running integral column accumulates |u|_{D^3}^2 dt (trapezoid) so
    square-integrable-in-time regularity can be eyeballed. Any value above
    ``ceiling`` marks the record blown up.
    """
    records = []
    running = 0.0
    prev_d3_sq = None
    for i, (t, s) in enumerate(zip(traj.times, traj.states)):
        g = s.grid
        rec = RegularityRecord(
            t=t,
            c_h2=g.sobolev_norm(s.c - params.c_inf, 2),
            psi_d1=g.dk_seminorm(s.psi, 1),
            u_h2=g.sobolev_norm(s.u, 2),
        )
        d3_sq = g.dk_seminorm(s.u, 3) ** 2
        if i > 0:
            dt = t - traj.times[i - 1]
            prev = traj.states[i - 1]
            rec.ct_h1 = g.sobolev_norm((s.c - prev.c) / dt, 1)
            rec.psit_l2 = g.norm((s.psi - prev.psi) / dt, 2)
            rec.ut_l2 = g.norm((s.u - prev.u) / dt, 2)
            running += 0.5 * dt * (d3_sq + prev_d3_sq)
        rec.u_d3_sq_time_integral = running
        prev_d3_sq = d3_sq
        vals = [rec.c_h2, rec.psi_d1, rec.u_h2, rec.u_d3_sq_time_integral] + [
            v for v in (rec.ct_h1, rec.psit_l2, rec.ut_l2) if v is not None]
        rec.blown_up = any(not np.isfinite(v) or v > ceiling for v in vals)
        records.append(rec)
    return records


def psi_consistency(state: FluidState, params: PhysParams,
                    eps_vac: float | None = None) -> tuple[float, float]:
    """(off-vacuum definitional residual, curl residual) of the evolved psi.

    The definitional residual is the sup of |psi - 2 theta grad(c)/c| over
    cells with c > 10*eps_vac; the curl residual tracks the symmetry
    d_i psi_j = d_j psi_i (zero in 1D by convention).
    """
    grid = state.grid
    eps = params.eps_vac if eps_vac is None else eps_vac
    target = psi_from_c(state.c, grid, params, eps)
    diff = grid.pointwise_magnitude(state.psi - target)
    off_vac = state.c > 10.0 * eps
    if not grid.is_periodic:
        inner = np.zeros(grid.shape, dtype=bool)
        inner[grid.interior_slices(depth=2)] = True
        off_vac = off_vac & inner
    residual = float(diff[off_vac].max()) if off_vac.any() else 0.0
    curl_res = grid.norm(grid.curl(state.psi), np.inf) if grid.dim >= 2 else 0.0
    return residual, curl_res


# -- inequality audits -------------------------------------------------------------


def gn_ratio(grid: Grid, f: np.ndarray, p: float) -> float:
    """|f|_p^p / (|f|_2^{(6-p)/2} |grad f|_2^{(3p-6)/2}) for one field."""
    if not 2.0 <= p <= 6.0:
        raise ValueError(f"exponent p must lie in [2, 6], got {p}")
    num = grid.norm(f, p) ** p
    den = (grid.norm(f, 2) ** (0.5 * (6.0 - p))
           * grid.dk_seminorm(f, 1) ** (0.5 * (3.0 * p - 6.0)))
    return num / max(den, _EPS)


def gn_audit(grid: Grid, corpus_size: int, seed: int,
             p_values: tuple[float, ...] = (3.0, 4.0, 6.0)) -> dict[float, float]:
    """Max interpolation-inequality ratio over a seeded random corpus."""
    maxima = {p: 0.0 for p in p_values}
    for i in range(corpus_size):
        f = audit_field(grid, seed, i)
        for p in p_values:
            maxima[p] = max(maxima[p], gn_ratio(grid, f, p))
    return maxima


def commutator_ratio(grid: Grid, f: np.ndarray, g: np.ndarray) -> float:
    """First-order commutator ratio with (r,a,b) = (2,2,inf) pairing.

    The right side |grad f|_2 |g|_inf + |grad f|_inf |g|_2 is symmetric in
    the two Hoelder splittings used downstream, so one ratio covers both.
    """
    lhs = grid.norm(grid.gradient(f * g) - f[..., None] * grid.gradient(g), 2)
    rhs = (grid.dk_seminorm(f, 1, 2) * grid.norm(g, np.inf)
           + grid.dk_seminorm(f, 1, np.inf) * grid.norm(g, 2))
    if rhs <= 1e-14 * (grid.norm(f, np.inf) + 1.0) * (grid.norm(g, np.inf) + 1.0):
        return 0.0  # constant f: both sides vanish up to roundoff
    return lhs / rhs


def commutator_audit(grid: Grid, corpus_size: int, seed: int) -> dict[str, float]:
    """Max commutator ratio over a seeded corpus of random field pairs."""
    best = 0.0
    for i in range(corpus_size):
        f, g = audit_pair(grid, seed, i)
        best = max(best, commutator_ratio(grid, f, g))
    return {"s1_r2": best}
