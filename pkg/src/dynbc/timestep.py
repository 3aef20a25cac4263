"""One-step integrators for second-order systems M u'' + D u' + A u = f.

Both steppers work on the first-order formulation with w := u'.  System
matrices are constant, so the shifted operators they invert are factorized
once per step size and cached on the system object.

Implicit Euler:
    (M + tau*D + tau^2*A) w1 = M w0 - tau*A u0 + tau*f1
    u1 = u0 + tau*w1

IMEX Crank-Nicolson (left/right rectangle treatment of f):
    (M + tau/2*D + tau^2/4*A) wh = M w0 - tau/2*A u0 + tau/2*f0
    u1 = u0 + tau*wh
    M w1 = 2*M wh - M w0 + tau/2*(f1 - f0)
where f0 uses the state at the step start and f1 the updated u1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .linalg import factorize


@dataclass
class StepState:
    u: np.ndarray
    w: np.ndarray
    t: float


@dataclass
class SecondOrderSystem:
    """Constant-coefficient system with cached operator factorizations."""

    M: sp.csr_matrix
    A: sp.csr_matrix
    D: sp.csr_matrix | None = None
    _solvers: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.M.shape[0]

    def shifted_solver(self, cd: float, ca: float) -> Callable[[np.ndarray], np.ndarray]:
        """Solver for (M + cd*D + ca*A), factorized on first use."""
        key = (cd, ca)
        solver = self._solvers.get(key)
        if solver is None:
            op = self.M + ca * self.A
            if self.D is not None and cd != 0.0:
                op = op + cd * self.D
            solver = factorize(op)
            self._solvers[key] = solver
        return solver

    def mass_solver(self) -> Callable[[np.ndarray], np.ndarray]:
        return self.shifted_solver(0.0, 0.0)


def implicit_euler_step(
    sys: SecondOrderSystem, s: StepState, tau: float, f_eval: np.ndarray
) -> StepState:
    """Advance one implicit Euler step; f_eval is the load at the new time
    (with the nonlinearity, if any, frozen at the old state)."""
    rhs = sys.M @ s.w - tau * (sys.A @ s.u) + tau * f_eval
    w1 = sys.shifted_solver(tau, tau * tau)(rhs)
    u1 = s.u + tau * w1
    return StepState(u1, w1, s.t + tau)


def cn_imex_step(
    sys: SecondOrderSystem,
    s: StepState,
    tau: float,
    f_left: np.ndarray,
    f_right_eval: Callable[[np.ndarray], np.ndarray],
) -> StepState:
    """Advance one implicit-explicit Crank-Nicolson step.

    f_left is the load at the step start; f_right_eval maps the updated
    position u1 to the load at the step end.
    """
    rhs = sys.M @ s.w - 0.5 * tau * (sys.A @ s.u) + 0.5 * tau * f_left
    wh = sys.shifted_solver(0.5 * tau, 0.25 * tau * tau)(rhs)
    u1 = s.u + tau * wh
    df = f_right_eval(u1) - f_left
    if np.any(df):
        w1 = sys.mass_solver()(sys.M @ (2.0 * wh - s.w) + 0.5 * tau * df)
    else:
        w1 = 2.0 * wh - s.w
    return StepState(u1, w1, s.t + tau)
