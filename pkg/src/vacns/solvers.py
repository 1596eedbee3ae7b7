"""Matrix-free conjugate gradients for the implicit sub-steps."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class LinearSolveError(RuntimeError):
    """Iterative solve failed; carries the last residual for the report."""

    def __init__(self, message: str, residual: float | None = None,
                 iterations: int | None = None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass
class CGInfo:
    iterations: int
    residual: float
    converged: bool


def conjugate_gradient(apply_a: Callable[[np.ndarray], np.ndarray],
                       b: np.ndarray,
                       tol: float,
                       maxit: int,
                       x0: np.ndarray | None = None) -> tuple[np.ndarray, CGInfo]:
    """Solve A x = b for a symmetric positive-definite matrix-free operator.

    Convergence means ||r||_2 <= tol * ||b||_2. A zero right-hand side
    returns the zero vector immediately (so exact steady states stay exact).
    Negative curvature raises: the operator is not SPD, which for the viscous
    step signals a violated admissibility condition 2*alpha + 3*E >= 0.
    """
    bnorm = float(np.sqrt(np.vdot(b, b).real))
    if bnorm == 0.0:
        return np.zeros_like(b), CGInfo(0, 0.0, True)
    x = np.zeros_like(b) if x0 is None else x0.copy()
    r = b - apply_a(x)
    p = r.copy()
    rr = float(np.vdot(r, r).real)
    for k in range(1, int(maxit) + 1):
        ap = apply_a(p)
        pap = float(np.vdot(p, ap).real)
        if pap <= 0.0:
            raise LinearSolveError(
                "conjugate gradient hit nonpositive curvature: operator is not "
                "positive definite", residual=float(np.sqrt(rr)) / bnorm, iterations=k)
        alpha = rr / pap
        x += alpha * p
        r -= alpha * ap
        rr_new = float(np.vdot(r, r).real)
        if np.sqrt(rr_new) <= tol * bnorm:
            return x, CGInfo(k, float(np.sqrt(rr_new)) / bnorm, True)
        p = r + (rr_new / rr) * p
        rr = rr_new
    raise LinearSolveError(
        f"conjugate gradient did not reach tolerance {tol:g} in {maxit} iterations",
        residual=float(np.sqrt(rr)) / bnorm, iterations=int(maxit))
