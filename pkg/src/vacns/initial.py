"""Initial-data constructors for the experiment runner and tests."""

from __future__ import annotations

import numpy as np

from .grid import Grid
from .state import FluidState, PhysParams, c_from_rho, psi_from_c, rho_from_c


def _e_field(rho0: np.ndarray, params: PhysParams) -> np.ndarray | None:
    if not params.is_powerlaw:
        return None
    return rho0 ** (params.second_viscosity.b - 1.0)


def state_from_rho(grid: Grid, rho0: np.ndarray, u0: np.ndarray,
                   params: PhysParams) -> FluidState:
    c0 = c_from_rho(rho0, params)
    psi0 = psi_from_c(c0, grid, params)
    return FluidState(grid, c0, psi0, u0, _e_field(rho0, params))


def inverse_power_profile(grid: Grid, params: PhysParams, sigma: float) -> FluidState:
    """rho0 = 1 / (1 + |x|^(2 sigma)), u0 = 0; decays to vacuum in the far field.

    The exponent must exceed max(1, 1/(gamma-1)) for the sound-speed
    variable to have the regularity the solver assumes.
    """
    bound = max(1.0, 1.0 / (params.gamma - 1.0))
    if sigma <= bound:
        raise ValueError(
            f"sigma must exceed max(1, 1/(gamma-1)) = {bound:g}, got {sigma:g}")
    r = grid.radius()
    rho0 = 1.0 / (1.0 + r ** (2.0 * sigma))
    u0 = np.zeros(grid.shape + (grid.dim,))
    return state_from_rho(grid, rho0, u0, params)


def fourier_mode(grid: Grid, params: PhysParams, k: int, amplitude: float,
                 u_mean: float | tuple = 0.0, c_amplitude: float = 0.0) -> FluidState:
    """Single-mode data: u = u_mean + amplitude*sin(k x1) e1, c = c_inf + c_amplitude*sin(k x1).

    The optional constant drift and density mode give the run nonzero total
    momentum without leaving the single-mode family.
    """
    if k < 1:
        raise ValueError("wavenumber must be a positive integer")
    x1 = grid.meshgrid()[0]
    phase = np.sin(2.0 * np.pi * k * x1 / grid.extent[0])
    c0 = params.c_inf + c_amplitude * phase
    if np.any(c0 < 0):
        raise ValueError("density mode amplitude drives c negative")
    u0 = np.zeros(grid.shape + (grid.dim,))
    mean = np.broadcast_to(np.atleast_1d(np.asarray(u_mean, dtype=float)), (grid.dim,))
    u0 += mean
    u0[..., 0] += amplitude * phase
    psi0 = psi_from_c(c0, grid, params)
    rho0 = rho_from_c(c0, params)
    return FluidState(grid, c0, psi0, u0, _e_field(rho0, params))


def constant_state(grid: Grid, params: PhysParams, c_val: float,
                   u_val: float | tuple = 0.0) -> FluidState:
    """Spatially uniform state (an exact steady point of the dynamics)."""
    if c_val < 0:
        raise ValueError("constant sound speed must be nonnegative")
    c0 = np.full(grid.shape, float(c_val))
    u0 = np.zeros(grid.shape + (grid.dim,))
    u0 += np.broadcast_to(np.atleast_1d(np.asarray(u_val, dtype=float)), (grid.dim,))
    psi0 = np.zeros(grid.shape + (grid.dim,))
    rho0 = rho_from_c(c0, params)
    return FluidState(grid, c0, psi0, u0, _e_field(rho0, params))
