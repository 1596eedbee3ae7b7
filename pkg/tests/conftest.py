import numpy as np
import pytest

from vacns.grid import Grid
from vacns.state import PhysParams, constant_law


@pytest.fixture
def params_const_visc():
    """gamma = 2, A = 1, alpha = 1, E(rho) = 0.5, periodic far field c = 1."""
    return PhysParams(A=1.0, gamma=2.0, alpha=1.0,
                      second_viscosity=constant_law(0.5), c_inf=1.0)


@pytest.fixture
def params_vacuum():
    """Decaying far field (c_inf = 0), zero second viscosity."""
    return PhysParams(A=1.0, gamma=2.0, alpha=1.0, c_inf=0.0)


def smooth_positive_state_2d(grid, params, c_amp=0.2, u_amp=0.15):
    """Periodic positive-density data used by several refinement studies."""
    from vacns.state import FluidState, psi_from_c
    x, y = grid.meshgrid()
    c0 = params.c_inf + c_amp * np.sin(x) * np.sin(y)
    u0 = np.zeros(grid.shape + (2,))
    u0[..., 0] = u_amp * np.sin(y)
    u0[..., 1] = 0.6 * u_amp * np.sin(x)
    return FluidState(grid, c0, psi_from_c(c0, grid, params), u0)


@pytest.fixture
def grid1d():
    return Grid.periodic(1, 64)


@pytest.fixture
def grid3d():
    return Grid.periodic(3, 16)
