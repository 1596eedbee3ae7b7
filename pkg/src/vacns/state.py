"""Physical parameters and the reformulated unknowns (c, psi, u).

The solver works in the sound-speed variable c = sqrt(A*gamma) * rho^((gamma-1)/2)
together with psi = (2/(gamma-1)) * grad(c)/c (the log-density gradient up to a
constant) and the velocity u. This module holds all algebraic conversions
between rho and (c, psi) plus the viscous stress factor Q. Everything here is
pointwise and pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .grid import Grid


@dataclass(frozen=True)
class SmoothLaw:
    """Second-viscosity generator E(rho) with two continuous derivatives."""

    e_func: Callable[[np.ndarray], np.ndarray]
    name: str = "smooth"

    def __call__(self, rho):
        return self.e_func(np.asarray(rho, dtype=float))


@dataclass(frozen=True)
class PowerLaw:
    """lambda(rho) = rho^b, i.e. E(rho) = rho^(b-1), with b in (1,2) or (2,3).

    In this mode E is transported as its own field rather than recomputed
    from c (it is generally not C^2 at rho = 0).
    """

    b: float

    def __post_init__(self):
        if not (1.0 < self.b < 3.0) or self.b == 2.0:
            raise ValueError(f"power-law exponent must lie in (1,2) or (2,3), got {self.b}")

    def __call__(self, rho):
        return np.asarray(rho, dtype=float) ** (self.b - 1.0)


@dataclass(frozen=True)
class PhysParams:
    """Pressure law P = A*rho^gamma, shear viscosity alpha*rho, second viscosity law.

    ``c_inf`` is the constant far-field value of the sound-speed variable
    (zero for genuinely decaying data). ``allow_outside_theorem`` unlocks
    gamma in (2,3) with a smooth law, a regime the well-posedness theory
    does not cover; runs there make no claim beyond the numbers produced.
    """

    A: float = 1.0
    gamma: float = 2.0
    alpha: float = 1.0
    second_viscosity: SmoothLaw | PowerLaw = field(
        default_factory=lambda: SmoothLaw(lambda rho: np.zeros_like(rho), name="zero"))
    c_inf: float = 0.0
    eps_vac: float = 1e-10
    allow_outside_theorem: bool = False

    def __post_init__(self):
        if self.A <= 0:
            raise ValueError(f"pressure constant A must be positive, got {self.A}")
        if not (1.0 < self.gamma <= 3.0):
            raise ValueError(f"gamma must lie in (1, 3], got {self.gamma}")
        if self.alpha <= 0:
            raise ValueError(f"shear viscosity constant alpha must be positive, got {self.alpha}")
        if self.c_inf < 0:
            raise ValueError(f"far-field sound speed must be nonnegative, got {self.c_inf}")
        if self.eps_vac <= 0:
            raise ValueError(f"vacuum cutoff must be positive, got {self.eps_vac}")
        if isinstance(self.second_viscosity, SmoothLaw) and not self.allow_outside_theorem:
            if not (self.gamma <= 2.0 or self.gamma == 3.0):
                raise ValueError(
                    f"smooth-law runs need gamma in (1,2] or gamma = 3 (got {self.gamma}); "
                    "set allow_outside_theorem to run gamma in (2,3) anyway")

    @property
    def theta(self) -> float:
        return 1.0 / (self.gamma - 1.0)

    @property
    def is_powerlaw(self) -> bool:
        return isinstance(self.second_viscosity, PowerLaw)

    @property
    def sound_coeff(self) -> float:
        return float(np.sqrt(self.A * self.gamma))


@dataclass
class FluidState:
    """Snapshot of the reformulated unknowns on one grid.

    ``e`` carries the transported second-viscosity field E = rho^(b-1) in
    power-law mode and stays None otherwise. ``clamp_events`` counts how many
    cell values had to be clamped back to nonnegativity so far along the
    trajectory that produced this state (zero on healthy runs).
    """

    grid: Grid
    c: np.ndarray
    psi: np.ndarray
    u: np.ndarray
    e: np.ndarray | None = None
    t: float = 0.0
    clamp_events: int = 0

    def copy(self) -> "FluidState":
        return FluidState(self.grid, self.c.copy(), self.psi.copy(), self.u.copy(),
                          None if self.e is None else self.e.copy(),
                          self.t, self.clamp_events)

    def with_time(self, t: float) -> "FluidState":
        out = self.copy()
        out.t = t
        return out

    def validate(self) -> None:
        for label, arr in (("c", self.c), ("psi", self.psi), ("u", self.u)):
            if not np.all(np.isfinite(arr)):
                raise FloatingPointError(f"state field {label} has non-finite values")
        if np.any(self.c < 0):
            raise ValueError("sound-speed field went negative")
        if self.e is not None and np.any(self.e < 0):
            raise ValueError("transported viscosity field went negative")

    @classmethod
    def zero(cls, grid: Grid, powerlaw: bool = False) -> "FluidState":
        e = np.zeros(grid.shape) if powerlaw else None
        return cls(grid, np.zeros(grid.shape), np.zeros(grid.shape + (grid.dim,)),
                   np.zeros(grid.shape + (grid.dim,)), e)


# -- conversions ----------------------------------------------------------------


def c_from_rho(rho: np.ndarray, params: PhysParams) -> np.ndarray:
    """Sound-speed variable c = sqrt(A*gamma) * rho^((gamma-1)/2); c = 0 at vacuum."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("density must be nonnegative")
    return params.sound_coeff * rho ** (0.5 * (params.gamma - 1.0))


def rho_from_c(c: np.ndarray, params: PhysParams) -> np.ndarray:
    """Exact pointwise inverse rho = (c / sqrt(A*gamma))^(2/(gamma-1))."""
    c = np.asarray(c, dtype=float)
    if np.any(c < 0):
        raise ValueError("sound-speed variable must be nonnegative")
    return (c / params.sound_coeff) ** (2.0 * params.theta)


def psi_from_c(c: np.ndarray, grid: Grid, params: PhysParams,
               eps_vac: float | None = None) -> np.ndarray:
    """psi = 2*theta*grad(c)/c, regularized by the vacuum cutoff.

    Below the cutoff the quotient is meaningless, so psi is set to zero
    there; during evolution psi is advanced by its own hyperbolic system and
    this formula serves only as an off-vacuum consistency oracle.
    """
    eps = params.eps_vac if eps_vac is None else eps_vac
    if eps <= 0:
        raise ValueError("vacuum cutoff must be positive")
    gc = grid.gradient(c)
    denom = np.maximum(c, eps)
    psi = 2.0 * params.theta * gc / denom[..., None]
    psi[c <= eps] = 0.0
    return psi


def ebar_of_c(c: np.ndarray, params: PhysParams) -> np.ndarray:
    """Ebar(c) = E(rho(c)) for a smooth second-viscosity law."""
    if params.is_powerlaw:
        raise ValueError("power-law mode transports E as a field; use state.e")
    return params.second_viscosity(rho_from_c(c, params))


def ebar_from_state(state: FluidState, params: PhysParams) -> np.ndarray:
    """The coefficient Ebar entering the stress, whichever mode is active."""
    if params.is_powerlaw:
        if state.e is None:
            raise ValueError("power-law mode requires the transported E field")
        return state.e
    return ebar_of_c(state.c, params)


def q_tensor(c_or_e: np.ndarray, v: np.ndarray, grid: Grid, params: PhysParams) -> np.ndarray:
    """Viscous stress factor Q = alpha*(J + J^T) + Ebar * div(v) * I.

    In smooth mode the scalar argument is c (Ebar is composed on the fly);
    in power-law mode it is the transported E field itself.
    """
    ebar = c_or_e if params.is_powerlaw else ebar_of_c(c_or_e, params)
    jac = grid.jacobian(v)
    divv = np.einsum("...ii->...", jac)
    q = params.alpha * (jac + np.swapaxes(jac, -1, -2))
    diag = ebar * divv
    for i in range(grid.dim):
        q[..., i, i] += diag
    return q


@dataclass(frozen=True)
class AdmissibilityVerdict:
    ok: bool
    min_combination: float
    rho_violation: float | None = None

    def __bool__(self):
        return self.ok


def check_admissible(params: PhysParams, rho_max: float, samples: int = 1001) -> AdmissibilityVerdict:
    """Sample 2*alpha + 3*E(rho) on [0, rho_max]; any negative value fails."""
    if rho_max <= 0:
        raise ValueError("rho_max must be positive")
    samples = max(int(samples), 1001)
    rho = np.linspace(0.0, rho_max, samples)
    combo = 2.0 * params.alpha + 3.0 * params.second_viscosity(rho)
    i = int(np.argmin(combo))
    if combo[i] < 0:
        return AdmissibilityVerdict(False, float(combo[i]), float(rho[i]))
    return AdmissibilityVerdict(True, float(combo[i]))


def constant_law(beta: float) -> SmoothLaw:
    """E(rho) identically beta (lambda = beta * rho)."""
    return SmoothLaw(lambda rho, b=float(beta): np.full_like(rho, b), name=f"constant({beta:g})")


def linear_law(coef: float = 1.0) -> SmoothLaw:
    """E(rho) = coef * rho (lambda = coef * rho^2)."""
    return SmoothLaw(lambda rho, k=float(coef): k * rho, name=f"linear({coef:g})")


def with_params(params: PhysParams, **changes) -> PhysParams:
    return replace(params, **changes)
