"""Acceptance suite.

Each criterion below runs at its stated tolerance and prints one
pass/fail line (visible with `pytest -s` or in failure reports).  The
convergence studies are shared per-session fixtures, so the whole suite
stays at desk scale (a few minutes).
"""
import numpy as np
import pytest

import dense_oracles as dox
from dynbc import acoustic, kinetic
from dynbc.assembly import (
    ACOUSTIC,
    KINETIC,
    BilinearParams,
    assemble_bulk,
    assemble_surface,
    build_block_system,
)
from dynbc.harness import (
    StudyConfig,
    acoustic_initial_values,
    allen_cahn,
    kinetic_initial_values,
    run_study,
)
from dynbc.linalg import as_csr
from dynbc.mesh import generate_disc_mesh
from dynbc.timestep import SecondOrderSystem, StepState, cn_imex_step, implicit_euler_step
from dynbc.trajectory import output_times

TAU_LIST = tuple(2.0**-k for k in range(4, 10))
TAU_REF = 2.0**-11


def report(label: str, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {label}: {'PASS' if ok else 'FAIL'} | {detail}")
    assert ok, f"{label}: {detail}"


@pytest.fixture(scope="session")
def kinetic_linear_study():
    return run_study(
        StudyConfig(
            problem=KINETIC,
            schemes=("lie-euler", "lie-cn", "strang-euler", "strang-cn"),
            h_target=0.09,
            tau_list=TAU_LIST,
            tau_ref=TAU_REF,
        )
    )


@pytest.fixture(scope="session")
def kinetic_semilinear_study():
    return run_study(
        StudyConfig(
            problem=KINETIC,
            schemes=("lie-euler", "lie-cn", "strang-cn"),
            h_target=0.09,
            tau_list=TAU_LIST,
            tau_ref=TAU_REF,
            nonlinearity="allen-cahn-bulk",
        )
    )


@pytest.fixture(scope="session")
def kinetic_fine_point():
    """Semi-linear kinetic errors at fixed tau = 2^-7 on the fine mesh."""
    return run_study(
        StudyConfig(
            problem=KINETIC,
            schemes=("lie-euler", "strang-cn"),
            h_target=0.02,
            tau_list=(2.0**-7,),
            tau_ref=TAU_REF,
            nonlinearity="allen-cahn-bulk",
        )
    )


@pytest.fixture(scope="session")
def acoustic_study():
    return run_study(
        StudyConfig(
            problem=ACOUSTIC,
            schemes=("lie-euler", "strang-cn"),
            h_target=0.09,
            tau_list=TAU_LIST,
            tau_ref=TAU_REF,
            nonlinearity="allen-cahn-surface",
        )
    )


# --- criterion 1: scalar-oracle integrator orders ------------------------


def _march_scalar(stepper: str, tau: float) -> float:
    sys = SecondOrderSystem(as_csr(np.array([[1.0]])), as_csr(np.array([[1.0]])))
    s = StepState(np.array([1.0]), np.array([0.0]), 0.0)
    zero = np.zeros(1)
    for _ in range(round(1.0 / tau)):
        if stepper == "euler":
            s = implicit_euler_step(sys, s, tau, zero)
        else:
            s = cn_imex_step(sys, s, tau, zero, lambda u1: zero)
    return abs(s.u[0] - np.cos(1.0))


def test_criterion_1_scalar_integrator_orders():
    taus = np.array([2.0**-k for k in range(4, 11)])
    for stepper, target in (("euler", 1.0), ("cn", 2.0)):
        errors = np.array([_march_scalar(stepper, tau) for tau in taus])
        slope = np.polyfit(np.log(taus), np.log(errors), 1)[0]
        report(
            f"criterion 1 [{stepper}]",
            abs(slope - target) <= 0.1,
            f"fitted order {slope:.3f}, target {target} +/- 0.1",
        )


# --- criterion 2: assembly oracles ---------------------------------------


def test_criterion_2_assembly_oracles():
    mesh = generate_disc_mesh(0.09)
    mass, stiff = assemble_bulk(mesh)
    ones_b = np.ones(mesh.n_vertices)
    area = ones_b @ (mass @ ones_b)
    report(
        "criterion 2 [bulk mass]",
        abs(area - np.pi) / np.pi < 0.01,
        f"1'M1 = {area:.6f} vs pi (defect {abs(area - np.pi) / np.pi:.2%})",
    )
    m_surf, _ = assemble_surface(mesh, BilinearParams(1.0, 1.0))
    ones_s = np.ones(mesh.n_boundary)
    perim = ones_s @ (m_surf @ ones_s)
    report(
        "criterion 2 [surface mass]",
        abs(perim - 2 * np.pi) / (2 * np.pi) < 0.01,
        f"1'M1 = {perim:.6f} vs 2*pi (defect {abs(perim - 2 * np.pi) / (2 * np.pi):.2%})",
    )
    stiff_resid = np.abs(stiff @ ones_b).max()
    report(
        "criterion 2 [bulk stiffness nullspace]",
        stiff_resid <= 1e-12,
        f"max |A_bulk 1| = {stiff_resid:.2e}",
    )
    _, beta_part = assemble_surface(mesh, BilinearParams(beta=1.0, kappa=0.0))
    surf_resid = np.abs(beta_part @ ones_s).max()
    report(
        "criterion 2 [surface stiffness nullspace]",
        surf_resid <= 1e-12,
        f"max |A_surf(beta) 1| = {surf_resid:.2e}",
    )


# --- criteria 3 and 5: kinetic order windows ------------------------------

KINETIC_WINDOWS = [
    ("lie-euler", "u", 0.80, 1.05),
    ("lie-euler", "p", 0.85, 1.05),
    ("lie-cn", "u", 0.90, 1.15),
    ("lie-cn", "p", 0.90, 1.15),
    ("strang-cn", "u", 0.90, 1.15),
    ("strang-cn", "p", 0.90, 1.15),
]


@pytest.mark.parametrize("scheme,var,lo,hi", KINETIC_WINDOWS)
def test_criterion_3_kinetic_linear_orders(kinetic_linear_study, scheme, var, lo, hi):
    avg, _ = kinetic_linear_study.orders[(scheme, var, "L2L2")]
    report(
        f"criterion 3 [{scheme} {var}]",
        lo <= avg <= hi,
        f"averaged L2(L2) order {avg:.4f}, window [{lo}, {hi}]",
    )


def test_criterion_3_order_ranking(kinetic_linear_study):
    """Qualitative table reproduction: the Euler-based splittings do not
    beat the Crank-Nicolson-based ones."""
    orders = kinetic_linear_study.orders
    lie_euler = orders[("lie-euler", "u", "L2L2")][0]
    lie_cn = orders[("lie-cn", "u", "L2L2")][0]
    report(
        "criterion 3 [ranking]",
        lie_euler <= lie_cn + 1e-9,
        f"lie-euler {lie_euler:.4f} <= lie-cn {lie_cn:.4f}",
    )


@pytest.mark.parametrize("scheme,var,lo,hi", KINETIC_WINDOWS)
def test_criterion_5_kinetic_semilinear_orders(
    kinetic_semilinear_study, scheme, var, lo, hi
):
    avg, _ = kinetic_semilinear_study.orders[(scheme, var, "L2L2")]
    report(
        f"criterion 5 [{scheme} {var}]",
        lo <= avg <= hi,
        f"averaged L2(L2) order {avg:.4f}, window [{lo}, {hi}]",
    )


# --- criterion 4: h-dependence flags --------------------------------------


def test_criterion_4_h_dependence(kinetic_semilinear_study, kinetic_fine_point):
    tau = 2.0**-7
    coarse = kinetic_semilinear_study.errors
    fine = kinetic_fine_point.errors
    lie_change = abs(
        fine[("lie-euler", tau, "u", "L2L2")] - coarse[("lie-euler", tau, "u", "L2L2")]
    ) / coarse[("lie-euler", tau, "u", "L2L2")]
    strang_change = abs(
        fine[("strang-cn", tau, "u", "L2L2")] - coarse[("strang-cn", tau, "u", "L2L2")]
    ) / coarse[("strang-cn", tau, "u", "L2L2")]
    report(
        "criterion 4 [lie-euler h-independent]",
        lie_change < 0.25,
        f"error change {lie_change:.1%} between h=0.09 and h=0.02 (< 25%)",
    )
    report(
        "criterion 4 [strang-cn h-dependent]",
        strang_change >= 0.75,
        f"error change {strang_change:.1%} between h=0.09 and h=0.02 (>= 75%)",
    )


# --- criterion 6: acoustic order windows -----------------------------------

ACOUSTIC_WINDOWS = [
    ("lie-euler", "u", 0.85, 1.10),
    ("lie-euler", "delta", 0.85, 1.10),
    ("strang-cn", "u", 1.75, 2.15),
    ("strang-cn", "delta", 1.75, 2.15),
]


@pytest.mark.parametrize("scheme,var,lo,hi", ACOUSTIC_WINDOWS)
def test_criterion_6_acoustic_orders(acoustic_study, scheme, var, lo, hi):
    avg, slope = acoustic_study.orders[(scheme, var, "L2L2")]
    report(
        f"criterion 6 [{scheme} {var}]",
        lo <= avg <= hi and lo <= slope <= hi,
        f"averaged {avg:.4f} / fitted {slope:.4f}, window [{lo}, {hi}]",
    )


# --- criterion 7: energy conservation and dissipation ----------------------


def test_criterion_7_reference_energy_conservation():
    mesh = generate_disc_mesh(0.09)
    times = output_times(1.0, 2.0**-4)

    blocks_k = build_block_system(mesh, BilinearParams(1.0, 1.0), KINETIC)
    prob_k = kinetic.KineticProblem(blocks_k)
    u0, w0 = kinetic_initial_values(mesh)
    ref_k = kinetic.reference_solve(prob_k, u0, w0, TAU_REF, times)
    drift_k = np.abs(ref_k.energy - ref_k.energy[0]).max() / ref_k.energy[0]
    report(
        "criterion 7 [kinetic reference conservation]",
        drift_k <= 1e-9,
        f"relative drift {drift_k:.2e} over [0, 1]",
    )

    blocks_a = build_block_system(mesh, BilinearParams(1.0, 1.0), ACOUSTIC)
    prob_a = acoustic.AcousticProblem(blocks_a)
    ua, wa, da, za = acoustic_initial_values(mesh)
    init_a = acoustic.AcousticState(u=ua, w=wa, delta=da, zeta=za, t=0.0)
    ref_a = acoustic.reference_solve(prob_a, init_a, TAU_REF, times)
    drift_a = np.abs(ref_a.energy - ref_a.energy[0]).max() / ref_a.energy[0]
    report(
        "criterion 7 [acoustic reference conservation]",
        drift_a <= 1e-9,
        f"relative drift {drift_a:.2e} over [0, 1]",
    )


def test_criterion_7_kinetic_lie_euler_energy_monotone():
    mesh = generate_disc_mesh(0.09)
    prob = kinetic.KineticProblem(build_block_system(mesh, BilinearParams(1.0, 1.0), KINETIC))
    u0, w0 = kinetic_initial_values(mesh)
    s = kinetic.consistent_init(prob, u0, w0)
    tau = 2.0**-6
    energies = [kinetic.energy_kinetic(prob, s)]
    for _ in range(round(1.0 / tau)):
        s = kinetic.lie_step(prob, s, tau, "euler")
        energies.append(kinetic.energy_kinetic(prob, s))
    worst = float(np.max(np.diff(energies)))
    report(
        "criterion 7 [kinetic lie-euler monotone]",
        worst <= 1e-10,
        f"max per-step energy increase {worst:.2e}",
    )


def test_criterion_7_acoustic_lie_euler_energy_monotone():
    mesh = generate_disc_mesh(0.09)
    prob = acoustic.AcousticProblem(
        build_block_system(mesh, BilinearParams(1.0, 1.0), ACOUSTIC)
    )
    ua, wa, da, za = acoustic_initial_values(mesh)
    s = acoustic.AcousticState(u=ua, w=wa, delta=da, zeta=za, t=0.0)
    tau = 2.0**-6
    energies = [acoustic.energy_acoustic(prob, s)]
    for _ in range(round(1.0 / tau)):
        s = acoustic.lie_euler_step(prob, s, tau)
        energies.append(acoustic.energy_acoustic(prob, s))
    worst = float(np.max(np.diff(energies)))
    report(
        "criterion 7 [acoustic lie-euler monotone]",
        worst <= 1e-10,
        f"max per-step energy increase {worst:.2e}",
    )


# --- criterion 8: dense-oracle one-step equivalence ------------------------


def test_criterion_8_dense_oracle_equivalence():
    mesh = generate_disc_mesh(0.45)
    assert mesh.n_vertices <= 40
    tau = 0.1
    rng = np.random.default_rng(21)

    blocks_k = build_block_system(mesh, BilinearParams(1.0, 1.0), KINETIC)
    prob_k = kinetic.KineticProblem(blocks_k, f_bulk=allen_cahn)
    u0, _ = kinetic_initial_values(mesh)
    w0 = 0.3 * rng.standard_normal(mesh.n_vertices)
    s0 = kinetic.consistent_init(prob_k, u0, w0)
    dstate = (s0.u1, s0.w1, s0.p, s0.r, s0.pdd, s0.t)
    kinetic_cases = [
        ("lie-euler", lambda: kinetic.lie_step(prob_k, s0, tau, "euler"),
         dox.kinetic_lie_euler_dense),
        ("lie-cn", lambda: kinetic.lie_step(prob_k, s0, tau, "cn"),
         dox.kinetic_lie_cn_dense),
        ("strang-euler", lambda: kinetic.strang_step(prob_k, s0, tau, "euler"),
         dox.kinetic_strang_euler_dense),
        ("strang-cn", lambda: kinetic.strang_step(prob_k, s0, tau, "cn"),
         dox.kinetic_strang_cn_dense),
    ]
    for name, step, oracle in kinetic_cases:
        s1 = step()
        expected = oracle(blocks_k, allen_cahn, None, dstate, tau)
        diff = max(
            np.abs(a - b).max()
            for a, b in zip((s1.u1, s1.w1, s1.p, s1.r, s1.pdd), expected)
        )
        report(
            f"criterion 8 [kinetic {name}]",
            diff <= 1e-12,
            f"one-step max difference {diff:.2e} on {mesh.n_vertices}-vertex mesh",
        )

    blocks_a = build_block_system(mesh, BilinearParams(1.0, 1.0), ACOUSTIC)
    prob_a = acoustic.AcousticProblem(blocks_a, f_surf=allen_cahn)
    ua, wa, da, _ = acoustic_initial_values(mesh)
    za = 0.2 * rng.standard_normal(mesh.n_boundary)
    sa = acoustic.AcousticState(u=ua, w=wa, delta=da, zeta=za, t=0.0)
    astate = (sa.u, sa.w, sa.delta, sa.zeta, sa.t)
    acoustic_cases = [
        ("lie-euler", lambda: acoustic.lie_euler_step(prob_a, sa, tau),
         dox.acoustic_lie_euler_dense),
        ("strang-cn", lambda: acoustic.strang_cn_step(prob_a, sa, tau),
         dox.acoustic_strang_cn_dense),
    ]
    for name, step, oracle in acoustic_cases:
        s1 = step()
        expected = oracle(blocks_a, None, allen_cahn, astate, tau)
        diff = max(
            np.abs(a - b).max()
            for a, b in zip((s1.u, s1.w, s1.delta, s1.zeta), expected)
        )
        report(
            f"criterion 8 [acoustic {name}]",
            diff <= 1e-12,
            f"one-step max difference {diff:.2e} on {mesh.n_vertices}-vertex mesh",
        )


# --- criterion 9: constraint preservation ----------------------------------


@pytest.mark.parametrize("scheme", ["lie-euler", "lie-cn", "strang-euler", "strang-cn"])
def test_criterion_9_constraint_preserved(scheme):
    mesh = generate_disc_mesh(0.09)
    prob = kinetic.KineticProblem(
        build_block_system(mesh, BilinearParams(1.0, 1.0), KINETIC),
        f_bulk=allen_cahn,
    )
    u0, w0 = kinetic_initial_values(mesh)
    s = kinetic.consistent_init(prob, u0, w0)
    composition, stepper = scheme.split("-")
    step = kinetic.lie_step if composition == "lie" else kinetic.strang_step
    tau = 2.0**-6
    violations = 0
    for _ in range(round(1.0 / tau)):
        s = step(prob, s, tau, stepper)
        if not (np.array_equal(s.u2, s.p) and np.array_equal(s.w2, s.r)):
            violations += 1
    report(
        f"criterion 9 [{scheme}]",
        violations == 0,
        f"{violations} constraint violations over a full run at tau=2^-6",
    )


# --- supplementary qualitative checks ---------------------------------------


def test_acoustic_mesh_dependence_qualitative():
    """Acoustic mirror of the mesh-dependence flags: the first-order
    splitting is nearly mesh-independent while Strang separates between
    the coarse and fine meshes, most visibly in the surface variable."""
    tau = 2.0**-7
    errors = {}
    for h in (0.09, 0.02):
        res = run_study(
            StudyConfig(
                problem=ACOUSTIC,
                schemes=("lie-euler", "strang-cn"),
                h_target=h,
                tau_list=(tau,),
                tau_ref=TAU_REF,
                nonlinearity="allen-cahn-surface",
            )
        )
        for scheme in ("lie-euler", "strang-cn"):
            for var in ("u", "delta"):
                errors[(h, scheme, var)] = res.errors[(scheme, tau, var, "L2L2")]

    def gap(scheme, var):
        coarse = errors[(0.09, scheme, var)]
        return abs(errors[(0.02, scheme, var)] - coarse) / coarse

    assert gap("lie-euler", "u") < 0.25
    assert gap("lie-euler", "delta") < 0.25
    assert gap("strang-cn", "delta") >= 0.75


def test_linear_study_errors_monotone_in_tau(kinetic_linear_study):
    errs = [
        kinetic_linear_study.errors[("lie-euler", tau, "u", "L2L2")]
        for tau in sorted(TAU_LIST, reverse=True)
    ]
    assert all(a >= b for a, b in zip(errs, errs[1:]))
