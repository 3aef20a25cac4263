"""P1 finite element assembly on the disc and its boundary polygon.

Bulk matrices are the usual consistent mass and stiffness on the
triangulation.  Surface matrices live on the closed boundary polygon,
where the tangential (Laplace-Beltrami) stiffness reduces to the 1D
stiffness along the loop.  The coupling matrix ties bulk trace dofs to
surface dofs; with boundary-last node ordering it is
``[0  M_surf  -M_surf]`` for the kinetic problem and ``[0  M_surf]`` for
the acoustic one.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .linalg import as_csr
from .mesh import Mesh

KINETIC = "kinetic"
ACOUSTIC = "acoustic"


@dataclass(frozen=True)
class BilinearParams:
    """Surface operator coefficients: diffusion beta, reaction kappa."""

    beta: float = 1.0
    kappa: float = 1.0

    def __post_init__(self) -> None:
        if self.beta < 0.0 or self.kappa < 0.0:
            raise ValueError("beta and kappa must be nonnegative")


@dataclass(frozen=True)
class BlockSystem:
    """All assembled operators for one mesh and parameter set.

    The 2x2 blocks split bulk dofs into interior (first n_bulk - n_surf)
    and trace (last n_surf) groups; reassembling
    ``[[M11, M12], [M21, M22]]`` recovers M_bulk entrywise.  stiff_surf
    is the beta=1, kappa=0 tangential stiffness kept for H1 norms;
    A_surf = beta*stiff_surf + kappa*M_surf.
    """

    M_bulk: sp.csr_matrix
    A_bulk: sp.csr_matrix
    M_surf: sp.csr_matrix
    A_surf: sp.csr_matrix
    stiff_surf: sp.csr_matrix
    B: sp.csr_matrix
    M11: sp.csr_matrix
    M12: sp.csr_matrix
    M21: sp.csr_matrix
    M22: sp.csr_matrix
    A11: sp.csr_matrix
    A12: sp.csr_matrix
    A21: sp.csr_matrix
    A22: sp.csr_matrix
    n_bulk: int
    n_surf: int
    kind: str
    params: BilinearParams


def assemble_bulk(mesh: Mesh) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Consistent P1 mass and stiffness matrices on the triangulation."""
    verts, tris = mesh.vertices, mesh.triangles
    p = verts[tris]  # (t, 3, 2)
    x, y = p[..., 0], p[..., 1]
    area = 0.5 * (
        (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0])
        - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0])
    )
    if np.any(area <= 1e-14):
        raise ValueError("degenerate triangle (area <= 1e-14)")

    # gradient coefficients: grad phi_i = (b_i, c_i) / (2*area)
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    k_loc = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (
        4.0 * area
    )[:, None, None]

    m_ref = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0
    m_loc = area[:, None, None] * m_ref

    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    n = mesh.n_vertices
    mass = sp.coo_matrix((m_loc.ravel(), (rows, cols)), shape=(n, n))
    stiff = sp.coo_matrix((k_loc.ravel(), (rows, cols)), shape=(n, n))
    return as_csr(mass), as_csr(stiff)


def assemble_surface(
    mesh: Mesh, params: BilinearParams
) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """1D P1 mass and operator matrices on the closed boundary polygon.

    Surface dof k corresponds to global node n_interior + k.  Returns
    (M_surf, A_surf) with A_surf = beta * tangential stiffness
    + kappa * M_surf.
    """
    m_surf, stiff = _surface_pieces(mesh)
    a_surf = as_csr(params.beta * stiff + params.kappa * m_surf)
    return m_surf, a_surf


def _surface_pieces(mesh: Mesh) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    loop = mesh.boundary_loop
    nb = mesh.n_boundary
    a = loop - mesh.n_interior
    b = np.roll(loop, -1) - mesh.n_interior
    lengths = np.linalg.norm(
        mesh.vertices[np.roll(loop, -1)] - mesh.vertices[loop], axis=1
    )
    if np.any(lengths <= 0.0):
        raise ValueError("zero-length boundary edge")

    rows = np.concatenate([a, a, b, b])
    cols = np.concatenate([a, b, a, b])
    m_vals = np.concatenate(
        [lengths / 3.0, lengths / 6.0, lengths / 6.0, lengths / 3.0]
    )
    s_vals = np.concatenate([1.0 / lengths, -1.0 / lengths, -1.0 / lengths, 1.0 / lengths])
    mass = sp.coo_matrix((m_vals, (rows, cols)), shape=(nb, nb))
    stiff = sp.coo_matrix((s_vals, (rows, cols)), shape=(nb, nb))
    return as_csr(mass), as_csr(stiff)


def assemble_coupling(mesh: Mesh, kind: str) -> sp.csr_matrix:
    """Coupling matrix tying bulk trace dofs to surface dofs.

    kinetic:  B = [0  M_surf  -M_surf]  acting on (u, p) stacked,
    acoustic: B = [0  M_surf]           acting on u alone.
    """
    m_surf, _ = _surface_pieces(mesh)
    ni = mesh.n_interior
    nb = mesh.n_boundary
    zero = sp.csr_matrix((nb, ni))
    if kind == KINETIC:
        return as_csr(sp.hstack([zero, m_surf, -m_surf]))
    if kind == ACOUSTIC:
        return as_csr(sp.hstack([zero, m_surf]))
    raise ValueError(f"unknown coupling kind {kind!r}")


def nodal_load(m: sp.spmatrix, g: np.ndarray) -> np.ndarray:
    """Discrete load M @ g for nodal values g of a source term."""
    if m.shape[1] != g.shape[0]:
        raise ValueError(f"dimension mismatch: {m.shape} with {g.shape}")
    return m @ g


def build_block_system(mesh: Mesh, params: BilinearParams, kind: str) -> BlockSystem:
    """Assemble every operator and the interior/trace block split."""
    m_bulk, a_bulk = assemble_bulk(mesh)
    m_surf, a_surf = assemble_surface(mesh, params)
    _, stiff_surf = _surface_pieces(mesh)
    coupling = assemble_coupling(mesh, kind)
    ni = mesh.n_interior

    def blocks(mat: sp.csr_matrix):
        return (
            as_csr(mat[:ni, :ni]),
            as_csr(mat[:ni, ni:]),
            as_csr(mat[ni:, :ni]),
            as_csr(mat[ni:, ni:]),
        )

    m11, m12, m21, m22 = blocks(m_bulk)
    a11, a12, a21, a22 = blocks(a_bulk)
    return BlockSystem(
        M_bulk=m_bulk,
        A_bulk=a_bulk,
        M_surf=m_surf,
        A_surf=a_surf,
        stiff_surf=stiff_surf,
        B=coupling,
        M11=m11,
        M12=m12,
        M21=m21,
        M22=m22,
        A11=a11,
        A12=a12,
        A21=a21,
        A22=a22,
        n_bulk=mesh.n_vertices,
        n_surf=mesh.n_boundary,
        kind=kind,
        params=params,
    )
