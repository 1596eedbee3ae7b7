"""Dimension-parametric finite-difference solver for compressible isentropic
Navier-Stokes flow with density-dependent viscosity and vacuum far field,
formulated in the sound-speed variables (c, psi, u), with a verification
harness for conservation laws, the kinetic-energy floor, and the
velocity non-decay phenomenon."""

__version__ = "0.1.0"

from .grid import Boundary, Grid
from .state import (FluidState, PhysParams, PowerLaw, SmoothLaw, c_from_rho,
                    check_admissible, constant_law, ebar_of_c, linear_law,
                    psi_from_c, q_tensor, rho_from_c)
from .linstep import (CFLError, FrozenVelocity, LinStepConfig, StepCounters,
                      characteristics_oracle, e_transport_step, momentum_step,
                      psi_step, transport_step)
from .solvers import LinearSolveError, conjugate_gradient
from .elliptic import (FluxFields, decomposition_residual, effective_flux,
                       elliptic_regularity_ratio, flux_fields, poisson_solve,
                       vorticity)
from .picard import (PicardConfig, PicardTrace, Trajectory, gamma_metric,
                     picard_window, time_march, vacuum_study)
from .diagnostics import (ConservedRecord, NondecayVerdict, RegularityRecord,
                          commutator_audit, conservation_drift, conserved_quantities,
                          conserved_table, gn_audit, nondecay_check,
                          original_residual, psi_consistency, regularity_monitor)

__all__ = [name for name in dir() if not name.startswith("_")]
