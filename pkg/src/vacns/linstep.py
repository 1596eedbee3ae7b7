"""The linearized sub-solvers of one fixed-point iteration.

Each iteration freezes the velocity field v from the previous iterate and
advances, per time step,

* c      by upwind advection plus an integrating-factor source
          (c_t + v.grad(c) + ((gamma-1)/2) c div(v) = 0),
* psi    by the symmetric hyperbolic system
          (psi_t + (v.grad)psi + (grad v)^T psi + grad(div v) = 0),
* E      (power-law mode) by the same transport scheme with coefficient b-1,
* u      by one backward-Euler step of the degenerate viscous system
          (u_t + v.grad(v) + 2 theta c grad(c) + L u = psi . Q(c, v)).

The implicit operator I + dt*L is symmetric positive definite in divergence
form whenever 2*alpha + 3*Ebar >= 0 holds pointwise, and is inverted
matrix-free with conjugate gradients.

A characteristics integrator doubles as ground truth for the transport
scheme: for steady v, c(t,x) = c0(X) * exp(-((gamma-1)/2) * I) where X is the
foot of the backward characteristic through x and I accumulates div(v) along
the path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import Grid
from .solvers import LinearSolveError, conjugate_gradient
from .state import FluidState, PhysParams, ebar_from_state


class CFLError(RuntimeError):
    """Advective CFL number exceeded; carries the largest admissible dt."""

    def __init__(self, cfl: float, cfl_max: float, required_dt: float):
        super().__init__(f"CFL number {cfl:.3g} exceeds limit {cfl_max:.3g}; "
                         f"reduce dt to at most {required_dt:.3g}")
        self.required_dt = required_dt


@dataclass(frozen=True)
class LinStepConfig:
    dt: float
    cfl_max: float = 0.9
    lin_tol: float = 1e-10
    lin_maxit: int = 500

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (0 < self.cfl_max <= 1):
            raise ValueError(f"cfl_max must lie in (0, 1], got {self.cfl_max}")
        if self.lin_tol <= 0 or self.lin_maxit < 1:
            raise ValueError("linear solver tolerance/iteration budget invalid")


@dataclass
class StepCounters:
    """Clamp bookkeeping accumulated across steps (reported, never hidden)."""

    c_clamps: int = 0
    e_clamps: int = 0


@dataclass(frozen=True)
class FrozenVelocity:
    """Previous-iterate velocity with its cached derivative fields."""

    grid: Grid
    v: np.ndarray
    jac: np.ndarray = field(repr=False)
    div: np.ndarray = field(repr=False)
    grad_div: np.ndarray = field(repr=False)

    @classmethod
    def from_field(cls, grid: Grid, v: np.ndarray) -> "FrozenVelocity":
        jac = grid.jacobian(v)
        div = np.einsum("...ii->...", jac)
        return cls(grid, v, jac, div, grid.gradient(div))

    @classmethod
    def zero(cls, grid: Grid) -> "FrozenVelocity":
        return cls.from_field(grid, np.zeros(grid.shape + (grid.dim,)))

    def max_speed_sum(self) -> float:
        """max over cells of sum_a |v_a| / h_a, the advective stiffness."""
        h = np.asarray(self.grid.spacing)
        return float((np.abs(self.v) / h).sum(axis=-1).max())


def cfl_number(fv: FrozenVelocity, dt: float) -> float:
    return dt * fv.max_speed_sum()


def check_cfl(fv: FrozenVelocity, cfg: LinStepConfig) -> None:
    speed = fv.max_speed_sum()
    cfl = cfg.dt * speed
    if cfl > cfg.cfl_max * (1.0 + 1e-12):
        raise CFLError(cfl, cfg.cfl_max, cfg.cfl_max / speed)


def _upwind(grid: Grid, f: np.ndarray, v: np.ndarray, dt: float) -> np.ndarray:
    """Donor-cell upwind update of f by velocity v (unsplit over axes).

    Decay-box grids may wrap here: only the outermost layer sees wrapped
    neighbors and that layer is clamped to far-field values afterwards.
    """
    out = f.copy()
    trail = (1,) * (f.ndim - grid.dim)
    for a in range(grid.dim):
        h = grid.spacing[a]
        va = v[..., a].reshape(v.shape[:grid.dim] + trail)
        back = f - np.roll(f, 1, axis=a)
        fwd = np.roll(f, -1, axis=a) - f
        out -= (dt / h) * (np.maximum(va, 0.0) * back + np.minimum(va, 0.0) * fwd)
    return out


def _count_clamp(arr: np.ndarray) -> tuple[np.ndarray, int]:
    neg = arr < 0.0
    n = int(neg.sum())
    if n:
        arr = np.where(neg, 0.0, arr)
    return arr, n


def transport_step(c: np.ndarray, fv: FrozenVelocity, params: PhysParams,
                   cfg: LinStepConfig, counters: StepCounters | None = None) -> np.ndarray:
    """One explicit step of c_t + v.grad(c) + ((gamma-1)/2) c div(v) = 0.

    Upwind advection followed by the exact integrating factor
    exp(-dt*((gamma-1)/2)*div v) for the stiff source, which keeps c
    nonnegative for any div(v). Undershoots (roundoff only) are clamped
    and counted.
    """
    check_cfl(fv, cfg)
    grid = fv.grid
    out = _upwind(grid, c, fv.v, cfg.dt)
    out *= np.exp(-cfg.dt * 0.5 * (params.gamma - 1.0) * fv.div)
    out, n = _count_clamp(out)
    if counters is not None:
        counters.c_clamps += n
    if not grid.is_periodic:
        out = grid.clamp_edges(out, params.c_inf)
    return out


def e_transport_step(e: np.ndarray, fv: FrozenVelocity, b: float,
                     cfg: LinStepConfig, counters: StepCounters | None = None) -> np.ndarray:
    """Transport of the power-law viscosity field: E_t + v.grad(E) + (b-1) E div(v) = 0.

    Same scheme as the sound-speed transport with coefficient b-1.
    """
    check_cfl(fv, cfg)
    grid = fv.grid
    out = _upwind(grid, e, fv.v, cfg.dt)
    out *= np.exp(-cfg.dt * (b - 1.0) * fv.div)
    out, n = _count_clamp(out)
    if counters is not None:
        counters.e_clamps += n
    if not grid.is_periodic:
        out = grid.clamp_edges(out, 0.0)
    return out


def psi_step(psi: np.ndarray, fv: FrozenVelocity, cfg: LinStepConfig) -> np.ndarray:
    """One explicit step of the symmetric hyperbolic system for psi.

    The advection matrices are diagonal with entries v^(l), so every
    component is upwinded with the full velocity; the zeroth-order coupling
    B = (grad v)^T and the forcing grad(div v) are added explicitly:
    (B psi)_i = sum_j (d_i v_j) psi_j.
    """
    check_cfl(fv, cfg)
    grid = fv.grid
    adv = _upwind(grid, psi, fv.v, cfg.dt)
    b_psi = np.einsum("...ji,...j->...i", fv.jac, adv)
    out = adv - cfg.dt * (b_psi + fv.grad_div)
    if not grid.is_periodic:
        out = grid.clamp_edges(out, 0.0)
    return out


def apply_viscous_operator(grid: Grid, u: np.ndarray, ebar: np.ndarray,
                           alpha: float) -> np.ndarray:
    """L u = -div( alpha*(J + J^T) + Ebar * div(u) * I ) in divergence form.

    Central differences throughout (zero-ghost central in decay-box mode) so
    the operator is exactly symmetric with respect to the grid inner product.
    """
    dirichlet = not grid.is_periodic
    if dirichlet:
        jac = np.stack([grid.diff_dirichlet(u, a) for a in range(grid.dim)], axis=-1)
    else:
        jac = grid.jacobian(u)
    divu = np.einsum("...ii->...", jac)
    stress = alpha * (jac + np.swapaxes(jac, -1, -2))
    diag = ebar * divu
    for i in range(grid.dim):
        stress[..., i, i] += diag
    return -grid.tensor_divergence(stress, dirichlet=dirichlet)


def momentum_step(u: np.ndarray, state: FluidState, fv: FrozenVelocity,
                  params: PhysParams, cfg: LinStepConfig) -> np.ndarray:
    """One backward-Euler step of the linearized momentum equation.

    Solves (I + dt*L) u_new = u + dt*( -v.grad(v) - 2 theta c grad(c)
    + psi . Q(c, v) ) with the coefficients taken from ``state`` (the
    already-updated c, psi and viscosity field) and the frozen velocity v.
    """
    grid = fv.grid
    ebar = ebar_from_state(state, params)
    c = state.c
    adv = np.einsum("...ia,...a->...i", fv.jac, fv.v)
    pressure = 2.0 * params.theta * c[..., None] * grid.gradient(c)
    q = params.alpha * (fv.jac + np.swapaxes(fv.jac, -1, -2))
    diag = ebar * fv.div
    for i in range(grid.dim):
        q[..., i, i] += diag
    forcing = np.einsum("...i,...ij->...j", state.psi, q)
    rhs = u + cfg.dt * (-adv - pressure + forcing)

    mask = None
    if not grid.is_periodic:
        mask = grid.boundary_mask()
        rhs = rhs.copy()
        rhs[mask] = 0.0

    def apply_a(x):
        y = x + cfg.dt * apply_viscous_operator(grid, x, ebar, params.alpha)
        if mask is not None:
            y[mask] = 0.0
        return y

    try:
        u_new, _ = conjugate_gradient(apply_a, rhs, tol=cfg.lin_tol, maxit=cfg.lin_maxit)
    except LinearSolveError as err:
        if "positive definite" in str(err):
            raise LinearSolveError(
                str(err) + " (check the admissibility condition 2*alpha + 3*E(rho) >= 0)",
                residual=err.residual, iterations=err.iterations) from err
        raise
    if mask is not None:
        u_new[mask] = 0.0
    return u_new


def diffusion_smooth(grid: Grid, u: np.ndarray, tau: float,
                     tol: float = 1e-12, maxit: int = 2000) -> np.ndarray:
    """One implicit heat-flow step (I - tau*Laplacian) u_s = u.

    Used to produce the well-conditioned first velocity iterate of the
    fixed-point scheme.
    """
    dirichlet = not grid.is_periodic

    def apply_a(x):
        return x - tau * grid.laplacian(x, dirichlet=dirichlet)

    out, _ = conjugate_gradient(apply_a, u, tol=tol, maxit=maxit)
    if dirichlet:
        out = grid.clamp_edges(out, 0.0)
    return out


def characteristics_oracle(grid: Grid, c0, v, t: float, params: PhysParams,
                           substeps: int | None = None,
                           div_v: Callable[[np.ndarray], np.ndarray] | None = None) -> np.ndarray:
    """Ground-truth transport solution for a steady velocity field.

    Integrates the backward characteristic ODE dX/ds = v(X) from each grid
    point with classical RK4 while accumulating the divergence integral, then
    evaluates c0 at the foot:
        c(t, x) = c0(X(0)) * exp(-((gamma-1)/2) * int_0^t div v(X(s)) ds).

    ``c0`` and ``v`` may be callables (evaluated exactly, for closed-form
    oracles) or grid fields (linearly interpolated). Characteristic feet
    leaving a decay box evaluate to the far-field value c_inf.
    """
    if t < 0:
        raise ValueError("oracle integrates forward states only (t >= 0)")
    n = substeps if substeps is not None else max(64, 4 * grid.points[0])

    if callable(v):
        v_at = lambda pts: np.asarray(v(pts), dtype=float)
    else:
        v_field = np.asarray(v, dtype=float)
        v_at = lambda pts: grid.interp(v_field, pts)
    if div_v is not None:
        div_at = div_v
    elif callable(v):
        raise ValueError("a callable velocity needs an explicit div_v callable")
    else:
        div_field = grid.divergence(np.asarray(v, dtype=float))
        div_at = lambda pts: grid.interp(div_field, pts)

    x = np.stack(grid.meshgrid(), axis=-1)
    integral = np.zeros(grid.shape)
    if t > 0:
        ds = t / n
        for _ in range(n):
            # RK4 on the augmented system (X, I): dX/ds = -v(X), dI/ds = div v(X)
            k1x, k1i = -v_at(x), div_at(x)
            k2x, k2i = -v_at(x + 0.5 * ds * k1x), div_at(x + 0.5 * ds * k1x)
            k3x, k3i = -v_at(x + 0.5 * ds * k2x), div_at(x + 0.5 * ds * k2x)
            k4x, k4i = -v_at(x + ds * k3x), div_at(x + ds * k3x)
            x = x + (ds / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            integral = integral + (ds / 6.0) * (k1i + 2.0 * k2i + 2.0 * k3i + k4i)

    if callable(c0):
        foot = np.asarray(c0(x), dtype=float)
    else:
        foot = grid.interp(np.asarray(c0, dtype=float), x)
    if not grid.is_periodic:
        foot = np.where(grid.contains(x), foot, params.c_inf)
    return foot * np.exp(-0.5 * (params.gamma - 1.0) * integral)
