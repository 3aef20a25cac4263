"""Splitting schemes for the wave equation with kinetic boundary conditions.

The semi-discrete problem is a constrained system: bulk and surface wave
equations tied together by the trace constraint u2 = p.  The splitting
advances the bulk interior with Dirichlet data taken from the surface
variable (position p, acceleration approximation pdd) and then the surface
with the freshly updated bulk values, restoring the constraint exactly at
the end of every step.

Lie composition takes one full substep each; Strang wraps a full surface
step between two half bulk steps.  Either composition can run with the
implicit Euler or the IMEX Crank-Nicolson one-step integrator.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .assembly import BilinearParams, BlockSystem
from .linalg import factorize
from .timestep import SecondOrderSystem, StepState, cn_imex_step, implicit_euler_step
from .trajectory import Trajectory, steps_per_sample

EULER = "euler"
CN = "cn"

Nonlinearity = Callable[[float, np.ndarray], np.ndarray]


@dataclass
class KineticState:
    """One time level: bulk interior/trace split plus surface variables.

    The trace fields alias the surface ones (u2 is p, w2 is r) after every
    accepted step, which keeps the coupling constraint exact.  pdd is the
    finite-difference approximation of the second derivative of p that the
    next bulk substep consumes.
    """

    u1: np.ndarray
    u2: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    p: np.ndarray
    r: np.ndarray
    pdd: np.ndarray
    t: float

    @property
    def u(self) -> np.ndarray:
        return np.concatenate([self.u1, self.u2])

    @property
    def w(self) -> np.ndarray:
        return np.concatenate([self.w1, self.w2])


@dataclass
class KineticProblem:
    """Assembled operators plus the semi-linear right-hand sides.

    f_bulk and f_surf map (t, nodal values) to nodal values of the source;
    they enter the discrete equations through the mass matrices (nodal
    interpolation).  None means a vanishing source.
    """

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

    @property
    def n_interior(self) -> int:
        return self.blocks.n_bulk - self.blocks.n_surf

    def bulk_system(self) -> SecondOrderSystem:
        if self._bulk_sys is None:
            self._bulk_sys = SecondOrderSystem(self.blocks.M11, self.blocks.A11)
        return self._bulk_sys

    def surface_system(self) -> SecondOrderSystem:
        if self._surf_sys is None:
            self._surf_sys = SecondOrderSystem(self.blocks.M_surf, self.blocks.A_surf)
        return self._surf_sys

    def eliminated_system(self) -> SecondOrderSystem:
        """Monolithic system with p identified with the bulk trace dofs."""
        if self._full_sys is None:
            b = self.blocks
            me = b.M_bulk + _embed(b.M_surf, b.n_bulk)
            ae = b.A_bulk + _embed(b.A_surf, b.n_bulk)
            self._full_sys = SecondOrderSystem(me.tocsr(), ae.tocsr())
        return self._full_sys

    def bulk_load(self, t: float, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
        """Discrete bulk load M_bulk @ f_bulk(t, u) for stacked u."""
        if self.f_bulk is None:
            return np.zeros(self.blocks.n_bulk)
        g = self.f_bulk(t, np.concatenate([u1, u2]))
        return self.blocks.M_bulk @ g

    def load_blocks(
        self, t: float, u1: np.ndarray, u2: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """Interior/trace split (f1, f2) of the bulk load."""
        f = self.bulk_load(t, u1, u2)
        ni = self.n_interior
        return f[:ni], f[ni:]

    def surf_load(self, t: float, p: np.ndarray) -> np.ndarray:
        if self.f_surf is None:
            return np.zeros(self.blocks.n_surf)
        return self.blocks.M_surf @ self.f_surf(t, p)


def _embed(mat: sp.spmatrix, n: int) -> sp.coo_matrix:
    """Place a surface matrix on the trailing block of an n x n matrix."""
    coo = sp.coo_matrix(mat)
    off = n - mat.shape[0]
    return sp.coo_matrix((coo.data, (coo.row + off, coo.col + off)), shape=(n, n))


def consistent_accelerations(
    prob: KineticProblem, u0: np.ndarray, w0: np.ndarray, t: float = 0.0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Initial accelerations and multiplier from the saddle-point system.

    Solves
        [ blkdiag(M_bulk, M_surf)  B^T ] [udd; pdd]   [rhs]
        [ B                         0  ] [lambda  ] = [ 0 ]
    with rhs the loads minus the stiffness terms at time t, which enforces
    both dynamic equations and the twice-differentiated constraint.
    """
    b = prob.blocks
    nb, ns = b.n_bulk, b.n_surf
    p0 = u0[prob.n_interior:]
    rhs_dyn = np.concatenate(
        [
            prob.bulk_load(t, u0[: prob.n_interior], p0) - b.A_bulk @ u0,
            prob.surf_load(t, p0) - b.A_surf @ p0,
        ]
    )
    mass = sp.block_diag([b.M_bulk, b.M_surf], format="csr")
    saddle = sp.bmat(
        [[mass, b.B.T], [b.B, None]], format="csc"
    )
    sol = factorize(saddle)(np.concatenate([rhs_dyn, np.zeros(ns)]))
    udd = sol[:nb]
    pdd = sol[nb : nb + ns]
    lam = sol[nb + ns :]
    return udd, pdd, lam


def consistent_init(
    prob: KineticProblem, u0: np.ndarray, w0: np.ndarray
) -> KineticState:
    """Build the starting state: p0 is the trace of u0 and pdd comes from
    the saddle-point solve."""
    ni = prob.n_interior
    p0 = u0[ni:].copy()
    r0 = w0[ni:].copy()
    _, pdd0, _ = consistent_accelerations(prob, u0, w0, t=0.0)
    return KineticState(
        u1=u0[:ni].copy(), u2=p0, w1=w0[:ni].copy(), w2=r0,
        p=p0, r=r0, pdd=pdd0, t=0.0,
    )


def lie_step(
    prob: KineticProblem, s: KineticState, tau: float, substepper: str = EULER
) -> KineticState:
    """One Lie splitting step: full bulk substep, then full surface substep."""
    b = prob.blocks
    coupl_bulk = b.M12 @ s.pdd + b.A12 @ s.p
    bulk = StepState(s.u1, s.w1, s.t)

    if substepper == EULER:
        f1_new, f2_new = prob.load_blocks(s.t + tau, s.u1, s.p)
        bulk_new = implicit_euler_step(prob.bulk_system(), bulk, tau, f1_new - coupl_bulk)
    elif substepper == CN:
        f1_old, f2_old = prob.load_blocks(s.t, s.u1, s.p)
        bulk_new = cn_imex_step(
            prob.bulk_system(), bulk, tau,
            f1_old - coupl_bulk,
            lambda u1: prob.load_blocks(s.t + tau, u1, s.p)[0] - coupl_bulk,
        )
    else:
        raise ValueError(f"unknown substepper {substepper!r}")

    ddu1 = (bulk_new.w - s.w1) / tau
    coupl_surf = (
        b.M22 @ s.pdd + b.A22 @ s.p + b.M21 @ ddu1 + b.A21 @ bulk_new.u
    )
    surf = StepState(s.p, s.r, s.t)

    if substepper == EULER:
        g = prob.surf_load(s.t + tau, s.p) + f2_new - coupl_surf
        surf_new = implicit_euler_step(prob.surface_system(), surf, tau, g)
    else:
        g_old = prob.surf_load(s.t, s.p) + f2_old - coupl_surf
        surf_new = cn_imex_step(
            prob.surface_system(), surf, tau,
            g_old,
            lambda p1: prob.surf_load(s.t + tau, p1)
            + prob.load_blocks(s.t + tau, bulk_new.u, p1)[1]
            - coupl_surf,
        )

    pdd_new = (surf_new.w - s.r) / tau
    return KineticState(
        u1=bulk_new.u, u2=surf_new.u, w1=bulk_new.w, w2=surf_new.w,
        p=surf_new.u, r=surf_new.w, pdd=pdd_new, t=s.t + tau,
    )


def strang_step(
    prob: KineticProblem, s: KineticState, tau: float, substepper: str = CN
) -> KineticState:
    """One Strang splitting step: half bulk, full surface, half bulk."""
    if substepper not in (EULER, CN):
        raise ValueError(f"unknown substepper {substepper!r}")
    b = prob.blocks
    half = 0.5 * tau
    coupl_bulk = b.M12 @ s.pdd + b.A12 @ s.p
    bulk = StepState(s.u1, s.w1, s.t)

    if substepper == CN:
        f1_old, f2_old = prob.load_blocks(s.t, s.u1, s.p)
        f1_half_box: list[np.ndarray] = []

        def right_half(u1: np.ndarray) -> np.ndarray:
            f1_half, _ = prob.load_blocks(s.t + half, u1, s.p)
            f1_half_box.append(f1_half)
            return f1_half - coupl_bulk

        bulk_half = cn_imex_step(
            prob.bulk_system(), bulk, half, f1_old - coupl_bulk, right_half
        )
        f1_half = f1_half_box[0]
        ddu1 = (bulk_half.w - s.w1) / half
    else:
        f1_half, _ = prob.load_blocks(s.t + half, s.u1, s.p)
        bulk_half = implicit_euler_step(
            prob.bulk_system(), bulk, half, f1_half - coupl_bulk
        )
        ddu1 = (bulk_half.w - s.w1) / half

    coupl_surf = (
        b.M22 @ s.pdd + b.A22 @ s.p + b.M21 @ ddu1 + b.A21 @ bulk_half.u
    )
    surf = StepState(s.p, s.r, s.t)

    if substepper == CN:
        g_old = prob.surf_load(s.t, s.p) + f2_old - coupl_surf
        surf_new = cn_imex_step(
            prob.surface_system(), surf, tau,
            g_old,
            lambda p1: prob.surf_load(s.t + tau, p1)
            + prob.load_blocks(s.t + tau, bulk_half.u, p1)[1]
            - coupl_surf,
        )
    else:
        g = (
            prob.surf_load(s.t + tau, s.p)
            + prob.load_blocks(s.t + tau, bulk_half.u, s.p)[1]
            - coupl_surf
        )
        surf_new = implicit_euler_step(prob.surface_system(), surf, tau, g)

    pdd_new = (surf_new.w - s.r) / tau
    coupl_bulk2 = b.M12 @ pdd_new + b.A12 @ surf_new.u
    bulk2 = StepState(bulk_half.u, bulk_half.w, s.t + half)

    if substepper == CN:
        bulk_new = cn_imex_step(
            prob.bulk_system(), bulk2, half,
            f1_half - coupl_bulk2,
            lambda u1: prob.load_blocks(s.t + tau, u1, surf_new.u)[0] - coupl_bulk2,
        )
    else:
        f1_new, _ = prob.load_blocks(s.t + tau, bulk_half.u, surf_new.u)
        bulk_new = implicit_euler_step(
            prob.bulk_system(), bulk2, half, f1_new - coupl_bulk2
        )

    return KineticState(
        u1=bulk_new.u, u2=surf_new.u, w1=bulk_new.w, w2=surf_new.w,
        p=surf_new.u, r=surf_new.w, pdd=pdd_new, t=s.t + tau,
    )


def energy_kinetic(prob: KineticProblem, s: KineticState) -> float:
    """Discrete energy: potential (bulk and surface stiffness) plus
    kinetic (bulk and surface mass) quadratic forms."""
    b = prob.blocks
    u, w = s.u, s.w
    return 0.5 * float(
        u @ (b.A_bulk @ u)
        + s.p @ (b.A_surf @ s.p)
        + w @ (b.M_bulk @ w)
        + s.r @ (b.M_surf @ s.r)
    )


def _energy_from_full(prob: KineticProblem, u: np.ndarray, w: np.ndarray) -> float:
    ni = prob.n_interior
    state = KineticState(
        u1=u[:ni], u2=u[ni:], w1=w[:ni], w2=w[ni:],
        p=u[ni:], r=w[ni:], pdd=np.zeros(prob.blocks.n_surf), t=0.0,
    )
    return energy_kinetic(prob, state)


def reference_solve(
    prob: KineticProblem,
    u0: np.ndarray,
    w0: np.ndarray,
    tau_ref: float,
    out_times: np.ndarray,
) -> Trajectory:
    """Monolithic Crank-Nicolson reference on the eliminated system.

    The constraint is resolved by identifying p with the bulk trace dofs,
    giving an unconstrained second-order system whose mass and stiffness
    are the bulk operators plus the surface ones embedded on the trailing
    block.  Loads combine bulk and surface sources the same way.
    """
    sys = prob.eliminated_system()
    ni = prob.n_interior

    def load(t: float, u: np.ndarray) -> np.ndarray:
        f = prob.bulk_load(t, u[:ni], u[ni:])
        f[ni:] += prob.surf_load(t, u[ni:])
        return f

    state = StepState(u0.copy(), w0.copy(), 0.0)
    return _march_cn(sys, state, tau_ref, out_times, load,
                     lambda u, w: _energy_from_full(prob, u, w), ni)


def _march_cn(sys, state, tau, out_times, load, energy, ni):
    dt_out = out_times[1] - out_times[0]
    per = steps_per_sample(tau, dt_out)
    bulk = [state.u.copy()]
    surf = [state.u[ni:].copy()]
    energies = [energy(state.u, state.w)]
    for k in range(len(out_times) - 1):
        for i in range(per):
            t = out_times[k] + i * tau
            f_left = load(t, state.u)
            state = cn_imex_step(
                sys, StepState(state.u, state.w, t), tau,
                f_left, lambda u1, t1=t + tau: load(t1, u1),
            )
        bulk.append(state.u.copy())
        surf.append(state.u[ni:].copy())
        energies.append(energy(state.u, state.w))
    return Trajectory(
        times=np.asarray(out_times, dtype=float),
        bulk=np.asarray(bulk),
        surf=np.asarray(surf),
        energy=np.asarray(energies),
    )


def run_scheme(
    prob: KineticProblem,
    scheme: str,
    init: KineticState,
    tau: float,
    out_times: np.ndarray,
) -> Trajectory:
    """Advance a splitting scheme and sample it on the output grid."""
    steppers = {
        "lie-euler": lambda st: lie_step(prob, st, tau, EULER),
        "lie-cn": lambda st: lie_step(prob, st, tau, CN),
        "strang-euler": lambda st: strang_step(prob, st, tau, EULER),
        "strang-cn": lambda st: strang_step(prob, st, tau, CN),
    }
    if scheme == "reference-cn":
        return reference_solve(prob, init.u, init.w, tau, out_times)
    if scheme not in steppers:
        raise ValueError(f"unknown kinetic scheme {scheme!r}")
    step = steppers[scheme]

    dt_out = out_times[1] - out_times[0]
    per = steps_per_sample(tau, dt_out)
    s = init
    bulk = [s.u]
    surf = [s.p.copy()]
    energies = [energy_kinetic(prob, s)]
    for _ in range(len(out_times) - 1):
        for _ in range(per):
            s = step(s)
        bulk.append(s.u)
        surf.append(s.p.copy())
        energies.append(energy_kinetic(prob, s))
    return Trajectory(
        times=np.asarray(out_times, dtype=float),
        bulk=np.asarray(bulk),
        surf=np.asarray(surf),
        energy=np.asarray(energies),
    )
