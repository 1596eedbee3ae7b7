"""Nonlinear solve per time window by successive approximation.

Each window [t0, t0 + W] is solved by iterating the linearized sub-steps
with the velocity frozen at the previous iterate: given the velocity
trajectory u^k over the window, (c, psi, E) are marched by the explicit
transport steps and u^{k+1} by the implicit viscous steps, all against u^k.
Convergence is measured by the squared-difference metric

    Gamma^{k+1} = ||dc||_{H^1}^2 + ||dpsi||_{L^2}^2 + ||du||_{H^1}^2

between consecutive window-end iterates. The first iterate uses a
heat-flow-smoothed copy of the initial velocity, which is steady over the
window. The outer march chains windows and halves a failing window once
before giving up.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .grid import Grid
from .linstep import (CFLError, FrozenVelocity, LinStepConfig, StepCounters,
                      diffusion_smooth, e_transport_step, momentum_step,
                      psi_step, transport_step)
from .state import FluidState, PhysParams, c_from_rho, psi_from_c


@dataclass(frozen=True)
class PicardConfig:
    window: float
    max_iter: int = 20
    gamma_tol: float = 1e-10
    delta_list: tuple[float, ...] = (1e-2, 1e-3, 1e-4)
    refreeze_per_step: bool = False

    def __post_init__(self):
        if self.window <= 0:
            raise ValueError(f"window length must be positive, got {self.window}")
        if self.max_iter < 1:
            raise ValueError("need at least one iteration")
        if self.gamma_tol <= 0:
            raise ValueError("gamma_tol must be positive")
        if any(d <= 0 for d in self.delta_list):
            raise ValueError("regularization shifts must be positive")


@dataclass
class PicardTrace:
    gammas: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    wall_ms: float = 0.0
    dt: float = 0.0
    nsteps: int = 0
    c_clamps: int = 0
    e_clamps: int = 0


def gamma_metric(s1: FluidState, s2: FluidState) -> float:
    """H1^2(c diff) + L2^2(psi diff) + H1^2(u diff) between two states."""
    if s1.grid != s2.grid:
        raise ValueError("states live on different grids")
    g = s1.grid
    return (g.sobolev_norm(s1.c - s2.c, 1) ** 2
            + g.norm(s1.psi - s2.psi, 2) ** 2
            + g.sobolev_norm(s1.u - s2.u, 1) ** 2)


def _window_steps(window: float, first_v: FrozenVelocity, cfg: LinStepConfig) -> tuple[int, float]:
    """Globally synchronized dt from the configured dt and the CFL of v."""
    dt_allowed = cfg.dt
    speed = first_v.max_speed_sum()
    if speed > 0:
        dt_allowed = min(dt_allowed, 0.5 * cfg.cfl_max / speed)
    nsteps = max(1, int(np.ceil(window / dt_allowed - 1e-12)))
    return nsteps, window / nsteps


def _march(state0: FluidState, v_traj: list[np.ndarray], params: PhysParams,
           cfg: LinStepConfig, counters: StepCounters,
           refreeze: bool = False) -> tuple[FluidState, list[np.ndarray]]:
    """March (c, psi, E, u) over the window against a frozen velocity trajectory."""
    grid = state0.grid
    c, psi, u, e = state0.c, state0.psi, state0.u, state0.e
    new_traj = [u.copy()]
    for n in range(len(v_traj) - 1):
        v = u if refreeze else v_traj[n]
        fv = FrozenVelocity.from_field(grid, v)
        c = transport_step(c, fv, params, cfg, counters)
        psi = psi_step(psi, fv, cfg)
        if params.is_powerlaw:
            e = e_transport_step(e, fv, params.second_viscosity.b, cfg, counters)
        coeff_state = FluidState(grid, c, psi, u, e, state0.t)
        u = momentum_step(u, coeff_state, fv, params, cfg)
        new_traj.append(u.copy())
    end = FluidState(grid, c, psi, u, e, state0.t + cfg.dt * (len(v_traj) - 1),
                     clamp_events=state0.clamp_events + counters.c_clamps + counters.e_clamps)
    return end, new_traj


def picard_window(state0: FluidState, params: PhysParams, lin_cfg: LinStepConfig,
                  pic_cfg: PicardConfig, window: float | None = None) -> tuple[FluidState, PicardTrace]:
    """Advance one window; returns the end state and the iteration trace.

    Non-convergence is reported through ``trace.converged`` rather than an
    exception so the outer march can shrink the window and retry. Sub-step
    failures (CFL, linear solver) propagate.
    """
    window = pic_cfg.window if window is None else window
    grid = state0.grid
    t_start = time.perf_counter()
    trace = PicardTrace()

    u0_smooth = diffusion_smooth(grid, state0.u, lin_cfg.dt)
    fv0 = FrozenVelocity.from_field(grid, u0_smooth)
    nsteps, dt = _window_steps(window, fv0, lin_cfg)
    cfg = replace(lin_cfg, dt=dt)
    trace.dt, trace.nsteps = dt, nsteps

    v_traj = [u0_smooth] * (nsteps + 1)
    prev_end = FluidState(grid, state0.c, state0.psi, u0_smooth, state0.e, state0.t + window)

    if pic_cfg.refreeze_per_step:
        counters = StepCounters()
        end, _ = _march(state0, v_traj, params, cfg, counters, refreeze=True)
        trace.iterations, trace.converged = 1, True
        trace.c_clamps, trace.e_clamps = counters.c_clamps, counters.e_clamps
        trace.wall_ms = 1e3 * (time.perf_counter() - t_start)
        return end, trace

    end = prev_end
    for k in range(pic_cfg.max_iter):
        counters = StepCounters()
        end, v_traj = _march(state0, v_traj, params, cfg, counters)
        trace.c_clamps += counters.c_clamps
        trace.e_clamps += counters.e_clamps
        gamma = gamma_metric(end, prev_end)
        trace.gammas.append(gamma)
        trace.iterations = k + 1
        if gamma <= pic_cfg.gamma_tol:
            trace.converged = True
            break
        prev_end = end
    trace.wall_ms = 1e3 * (time.perf_counter() - t_start)
    return end, trace


@dataclass
class Trajectory:
    """Sampled states of one outer march, with per-window iteration traces."""

    times: list[float] = field(default_factory=list)
    states: list[FluidState] = field(default_factory=list)
    traces: list[PicardTrace] = field(default_factory=list)
    completed: bool = True
    failure: str | None = None

    @property
    def initial(self) -> FluidState:
        return self.states[0]

    @property
    def final(self) -> FluidState:
        return self.states[-1]


def time_march(state0: FluidState, t_final: float, params: PhysParams,
               lin_cfg: LinStepConfig, pic_cfg: PicardConfig,
               sample_cadence: int = 1) -> Trajectory:
    """Chain fixed-point windows over [0, t_final].

    States are recorded every ``sample_cadence`` windows (plus start and
    end). A window that fails to converge is halved and retried once; a
    second failure aborts cleanly with the partial trajectory.
    """
    if t_final <= 0:
        raise ValueError("t_final must be positive")
    traj = Trajectory()
    traj.times.append(state0.t)
    traj.states.append(state0.copy())
    state = state0
    n_windows = 0
    t_end = state0.t + t_final
    while state.t < t_end - 1e-12:
        window = min(pic_cfg.window, t_end - state.t)
        try:
            new_state, trace = picard_window(state, params, lin_cfg, pic_cfg, window)
            new_traces = [trace]
            if not trace.converged:
                # retry once with the window halved before giving up
                half = 0.5 * window
                s1, tr1 = picard_window(state, params, lin_cfg, pic_cfg, half)
                s2, tr2 = (picard_window(s1, params, lin_cfg, pic_cfg, half)
                           if tr1.converged else (s1, tr1))
                if tr1.converged and tr2.converged:
                    new_state, new_traces = s2, [tr1, tr2]
                else:
                    traj.completed = False
                    traj.failure = (f"window at t={state.t:.6g} failed to contract "
                                    f"(last Gamma {trace.gammas[-1]:.3g})")
                    traj.traces.append(trace)
                    return traj
        except CFLError as err:
            traj.completed = False
            traj.failure = f"window at t={state.t:.6g}: {err}"
            return traj
        state = new_state
        traj.traces.extend(new_traces)
        n_windows += 1
        if n_windows % sample_cadence == 0 or state.t >= t_end - 1e-12:
            traj.times.append(state.t)
            traj.states.append(state.copy())
    if traj.times[-1] < state.t:
        traj.times.append(state.t)
        traj.states.append(state.copy())
    return traj


@dataclass(frozen=True)
class VacuumStudyRow:
    delta_hi: float
    delta_lo: float
    difference: float


def vacuum_study(grid: Grid, rho0: np.ndarray, params: PhysParams,
                 lin_cfg: LinStepConfig, pic_cfg: PicardConfig, t_final: float,
                 u0: np.ndarray | None = None) -> tuple[list[VacuumStudyRow], bool]:
    """Regularized-data convergence study c0 -> c0 + delta.

    Runs the outer march from each shifted initial state and reports the
    pairwise end-state differences ||dc||_2 + ||du||_2 down the (descending)
    shift list; Cauchy behavior means a strictly decreasing column.
    """
    deltas = sorted(pic_cfg.delta_list, reverse=True)
    if len(deltas) < 3:
        raise ValueError("need at least three regularization shifts")
    c0 = c_from_rho(rho0, params)
    u0 = np.zeros(grid.shape + (grid.dim,)) if u0 is None else u0
    finals = []
    for delta in deltas:
        c_shift = c0 + delta
        psi0 = psi_from_c(c_shift, grid, params)
        e0 = None
        if params.is_powerlaw:
            e0 = (rho0 + 0.0) ** (params.second_viscosity.b - 1.0)
        st = FluidState(grid, c_shift, psi0, u0.copy(), e0)
        traj = time_march(st, t_final, params, lin_cfg, pic_cfg)
        if not traj.completed:
            raise RuntimeError(f"regularized run delta={delta:g} aborted: {traj.failure}")
        finals.append(traj.final)
    rows = []
    for i in range(len(deltas) - 1):
        diff = (grid.norm(finals[i].c - finals[i + 1].c, 2)
                + grid.norm(finals[i].u - finals[i + 1].u, 2))
        rows.append(VacuumStudyRow(deltas[i], deltas[i + 1], diff))
    decreasing = all(rows[i].difference > rows[i + 1].difference
                     for i in range(len(rows) - 1))
    return rows, decreasing
