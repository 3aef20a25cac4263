"""Sparse matrix helpers shared by assembly and time stepping.

Matrices are stored as scipy CSR (sorted, deduplicated column indices per
row).  System matrices are constant in time for every scheme in this
package, so direct factorizations are computed once and reused for all
steps; conjugate gradients is available as a low-memory fallback.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

DIRECT = "direct-factorization"
CG = "conjugate-gradient"


@dataclass(frozen=True)
class LinearSolveOptions:
    method: str = DIRECT
    rel_tolerance: float = 1e-12
    max_iterations: int = 20_000

    def __post_init__(self) -> None:
        if self.method not in (DIRECT, CG):
            raise ValueError(f"unknown solve method {self.method!r}")
        if self.rel_tolerance <= 0.0:
            raise ValueError("rel_tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


class SolverError(RuntimeError):
    """Raised when a linear solve fails or does not converge."""


def as_csr(a) -> sp.csr_matrix:
    m = sp.csr_matrix(a)
    m.sort_indices()
    return m


def spmv(a: sp.spmatrix, x: np.ndarray) -> np.ndarray:
    """CSR matrix-vector product with an explicit dimension check."""
    if a.shape[1] != x.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {x.shape}")
    return a @ x


def add_scaled(
    a: sp.spmatrix, b: sp.spmatrix, alpha: float, beta: float
) -> sp.csr_matrix:
    """Return alpha*A + beta*B on the merged sparsity pattern."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return as_csr(alpha * a + beta * b)


def is_symmetric(a: sp.spmatrix, tol: float = 0.0) -> bool:
    d = (a - a.T).tocoo()
    if d.nnz == 0:
        return True
    return float(np.abs(d.data).max()) <= tol


def factorize(a: sp.spmatrix):
    """LU-factorize a square sparse matrix; returns a solve callable.

    Used for every constant system matrix, symmetric or not (the acoustic
    reference system carries a skew block and is not symmetric).
    """
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError(f"matrix must be square, got {a.shape}")
    lu = spla.splu(sp.csc_matrix(a))

    def solve(rhs: np.ndarray) -> np.ndarray:
        if rhs.shape[0] != n:
            raise ValueError(f"rhs length {rhs.shape[0]} != {n}")
        return lu.solve(rhs)

    return solve


def solve_spd(
    a: sp.spmatrix, b: np.ndarray, opts: LinearSolveOptions = LinearSolveOptions()
) -> np.ndarray:
    """Solve A x = b for symmetric positive definite A.

    Direct factorization by default; conjugate gradients when requested.
    The residual is verified against ``rel_tolerance * ||b||`` either way,
    so an indefinite or singular matrix surfaces as a SolverError.
    """
    a = as_csr(a)
    if a.shape[0] != a.shape[1] or a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} with rhs {b.shape}")
    if not is_symmetric(a, tol=1e-14 * _abs_max(a)):
        raise SolverError("matrix is not symmetric")

    bnorm = float(np.linalg.norm(b))
    if opts.method == DIRECT:
        try:
            solve = factorize(a)
        except RuntimeError as exc:  # singular factorization
            raise SolverError(f"factorization failed: {exc}") from exc
        x = solve(b)
        # one round of iterative refinement keeps the residual at the
        # requested tolerance even for stiff assembled systems
        res = np.linalg.norm(a @ x - b)
        if res > opts.rel_tolerance * bnorm:
            x = x + solve(b - a @ x)
    else:
        x, info = spla.cg(
            a, b, rtol=opts.rel_tolerance, atol=0.0, maxiter=opts.max_iterations
        )
        if info != 0:
            raise SolverError(f"CG did not converge within {opts.max_iterations}")

    if bnorm > 0.0:
        res = float(np.linalg.norm(a @ x - b))
        if res > 10.0 * opts.rel_tolerance * bnorm:
            raise SolverError(f"residual {res:.3e} exceeds tolerance")
    return x


def _abs_max(a: sp.spmatrix) -> float:
    return float(np.abs(a.data).max()) if a.nnz else 0.0


def export_coordinate_text(a: sp.spmatrix, path: str) -> None:
    """Write a MatrixMarket-style coordinate listing (1-based indices)."""
    coo = sp.coo_matrix(a)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}\n")
        for i, j, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{i + 1} {j + 1} {float(v)!r}\n")
