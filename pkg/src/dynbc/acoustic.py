"""Splitting schemes for the wave equation with acoustic boundary conditions.

Here the bulk variable u (acoustic velocity potential) and the surface
variable delta (normal boundary displacement) are coupled only through
first-derivative terms: the semi-discrete system carries the skew block
matrix [[0, -B^T], [B, 0]] in front of the velocities and needs no
algebraic constraint.  The splitting freezes the opposite velocity while
advancing each side: the bulk sees B^T zeta as a load, the surface sees
-B w with the freshly updated bulk velocity.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .assembly import BilinearParams, BlockSystem
from .kinetic import Nonlinearity
from .timestep import SecondOrderSystem, StepState, cn_imex_step, implicit_euler_step
from .trajectory import Trajectory, steps_per_sample


@dataclass
class AcousticState:
    u: np.ndarray
    w: np.ndarray
    delta: np.ndarray
    zeta: np.ndarray
    t: float


@dataclass
class AcousticProblem:
    """Assembled operators (with acoustic coupling B = [0 M_surf]) plus
    the semi-linear sources, as in the kinetic case."""

    blocks: BlockSystem
    f_bulk: Nonlinearity | None = None
    f_surf: Nonlinearity | None = None
    T: float = 1.0
    _bulk_sys: SecondOrderSystem | None = field(default=None, repr=False)
    _surf_sys: SecondOrderSystem | None = field(default=None, repr=False)
    _full_sys: SecondOrderSystem | None = field(default=None, repr=False)

    @property
    def params(self) -> BilinearParams:
        return self.blocks.params

    def bulk_system(self) -> SecondOrderSystem:
        if self._bulk_sys is None:
            self._bulk_sys = SecondOrderSystem(self.blocks.M_bulk, self.blocks.A_bulk)
        return self._bulk_sys

    def surface_system(self) -> SecondOrderSystem:
        if self._surf_sys is None:
            self._surf_sys = SecondOrderSystem(self.blocks.M_surf, self.blocks.A_surf)
        return self._surf_sys

    def coupled_system(self) -> SecondOrderSystem:
        """Full system with the skew velocity coupling, for the reference."""
        if self._full_sys is None:
            b = self.blocks
            mass = sp.block_diag([b.M_bulk, b.M_surf], format="csr")
            stiff = sp.block_diag([b.A_bulk, b.A_surf], format="csr")
            skew = sp.bmat([[None, -b.B.T], [b.B, None]], format="csr")
            self._full_sys = SecondOrderSystem(mass, stiff, D=skew)
        return self._full_sys

    def bulk_load(self, t: float, u: np.ndarray) -> np.ndarray:
        if self.f_bulk is None:
            return np.zeros(self.blocks.n_bulk)
        return self.blocks.M_bulk @ self.f_bulk(t, u)

    def surf_load(self, t: float, delta: np.ndarray) -> np.ndarray:
        if self.f_surf is None:
            return np.zeros(self.blocks.n_surf)
        return self.blocks.M_surf @ self.f_surf(t, delta)


def lie_euler_step(prob: AcousticProblem, s: AcousticState, tau: float) -> AcousticState:
    """One Lie step, implicit Euler on both subsystems.

    Bulk first, with the surface velocity frozen; then the surface, driven
    by the updated bulk velocity.
    """
    b = prob.blocks
    bulk = implicit_euler_step(
        prob.bulk_system(), StepState(s.u, s.w, s.t), tau,
        prob.bulk_load(s.t + tau, s.u) + b.B.T @ s.zeta,
    )
    surf = implicit_euler_step(
        prob.surface_system(), StepState(s.delta, s.zeta, s.t), tau,
        prob.surf_load(s.t + tau, s.delta) - b.B @ bulk.w,
    )
    return AcousticState(u=bulk.u, w=bulk.w, delta=surf.u, zeta=surf.w, t=s.t + tau)


def strang_cn_step(prob: AcousticProblem, s: AcousticState, tau: float) -> AcousticState:
    """One Strang step, IMEX Crank-Nicolson on all three substeps:
    half bulk, full surface, half bulk."""
    b = prob.blocks
    half = 0.5 * tau

    f_half_box: list[np.ndarray] = []

    def bulk_right(u1: np.ndarray) -> np.ndarray:
        f = prob.bulk_load(s.t + half, u1)
        f_half_box.append(f)
        return f + b.B.T @ s.zeta

    bulk_half = cn_imex_step(
        prob.bulk_system(), StepState(s.u, s.w, s.t), half,
        prob.bulk_load(s.t, s.u) + b.B.T @ s.zeta, bulk_right,
    )
    f_omega_half = f_half_box[0]

    coupl = b.B @ bulk_half.w
    surf = cn_imex_step(
        prob.surface_system(), StepState(s.delta, s.zeta, s.t), tau,
        prob.surf_load(s.t, s.delta) - coupl,
        lambda d1: prob.surf_load(s.t + tau, d1) - coupl,
    )

    bulk_new = cn_imex_step(
        prob.bulk_system(), StepState(bulk_half.u, bulk_half.w, s.t + half), half,
        f_omega_half + b.B.T @ surf.w,
        lambda u1: prob.bulk_load(s.t + tau, u1) + b.B.T @ surf.w,
    )
    return AcousticState(
        u=bulk_new.u, w=bulk_new.w, delta=surf.u, zeta=surf.w, t=s.t + tau
    )


def energy_acoustic(prob: AcousticProblem, s: AcousticState) -> float:
    """Discrete energy: bulk/surface stiffness plus bulk/surface mass
    quadratic forms of (u, delta, w, zeta)."""
    b = prob.blocks
    return 0.5 * float(
        s.u @ (b.A_bulk @ s.u)
        + s.delta @ (b.A_surf @ s.delta)
        + s.w @ (b.M_bulk @ s.w)
        + s.zeta @ (b.M_surf @ s.zeta)
    )


def reference_solve(
    prob: AcousticProblem, init: AcousticState, tau_ref: float, out_times: np.ndarray
) -> Trajectory:
    """Crank-Nicolson on the full coupled system (no splitting)."""
    sys = prob.coupled_system()
    nb = prob.blocks.n_bulk

    def load(t: float, z: np.ndarray) -> np.ndarray:
        return np.concatenate(
            [prob.bulk_load(t, z[:nb]), prob.surf_load(t, z[nb:])]
        )

    def energy(z: np.ndarray, v: np.ndarray) -> float:
        return energy_acoustic(
            prob,
            AcousticState(u=z[:nb], w=v[:nb], delta=z[nb:], zeta=v[nb:], t=0.0),
        )

    dt_out = out_times[1] - out_times[0]
    per = steps_per_sample(tau_ref, dt_out)
    state = StepState(
        np.concatenate([init.u, init.delta]),
        np.concatenate([init.w, init.zeta]),
        0.0,
    )
    bulk = [state.u[:nb].copy()]
    surf = [state.u[nb:].copy()]
    energies = [energy(state.u, state.w)]
    for k in range(len(out_times) - 1):
        for i in range(per):
            t = out_times[k] + i * tau_ref
            f_left = load(t, state.u)
            state = cn_imex_step(
                sys, StepState(state.u, state.w, t), tau_ref,
                f_left, lambda z1, t1=t + tau_ref: load(t1, z1),
            )
        bulk.append(state.u[:nb].copy())
        surf.append(state.u[nb:].copy())
        energies.append(energy(state.u, state.w))
    return Trajectory(
        times=np.asarray(out_times, dtype=float),
        bulk=np.asarray(bulk),
        surf=np.asarray(surf),
        energy=np.asarray(energies),
    )


def run_scheme(
    prob: AcousticProblem,
    scheme: str,
    init: AcousticState,
    tau: float,
    out_times: np.ndarray,
) -> Trajectory:
    """Advance a splitting scheme and sample it on the output grid."""
    if scheme == "reference-cn":
        return reference_solve(prob, init, tau, out_times)
    if scheme == "lie-euler":
        step = lambda st: lie_euler_step(prob, st, tau)  # noqa: E731
    elif scheme == "strang-cn":
        step = lambda st: strang_cn_step(prob, st, tau)  # noqa: E731
    else:
        raise ValueError(f"unknown acoustic scheme {scheme!r}")

    dt_out = out_times[1] - out_times[0]
    per = steps_per_sample(tau, dt_out)
    s = init
    bulk = [s.u.copy()]
    surf = [s.delta.copy()]
    energies = [energy_acoustic(prob, s)]
    for _ in range(len(out_times) - 1):
        for _ in range(per):
            s = step(s)
        bulk.append(s.u.copy())
        surf.append(s.delta.copy())
        energies.append(energy_acoustic(prob, s))
    return Trajectory(
        times=np.asarray(out_times, dtype=float),
        bulk=np.asarray(bulk),
        surf=np.asarray(surf),
        energy=np.asarray(energies),
    )
