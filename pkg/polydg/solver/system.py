"""Global skeleton system: scatter-add of condensed cells and its sparse solve."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from loguru import logger
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, gmres, onenormest, spilu, splu
from scipy.sparse.linalg import norm as sparse_norm

from polydg.assembly.hybrid import CondensedElement
from polydg.errors import SolverError
from polydg.solver.skeleton import EdgeCoefficients, SkeletonSpace

__all__ = ["GlobalSolution", "SkeletonSystem", "assemble_global", "condition_estimate", "solve_global"]

SYMMETRY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SkeletonSystem:
    matrix: sparse.csr_matrix
    rhs: np.ndarray

    @property
    def n_free(self) -> int:
        return len(self.rhs)

    @property
    def is_symmetric(self) -> bool:
        if self.n_free == 0:
            return True
        scale = sparse_norm(self.matrix)
        return bool(sparse_norm(self.matrix - self.matrix.T) <= SYMMETRY_TOLERANCE * scale)


def assemble_global(
    elements: Sequence[CondensedElement],
    skeleton: SkeletonSpace,
    neumann: EdgeCoefficients | None = None,
) -> SkeletonSystem:
    """Σ_K S_K φ_K = Σ_K l_K + Neumann data, restricted to free rows, Dirichlet columns moved right."""
    n = skeleton.n_free
    rhs = np.zeros(n)
    rows, cols, vals = [], [], []
    for element in elements:
        dofs = skeleton.cell_dofs(element.cell)
        if len(np.unique(dofs)) != len(dofs) or element.schur.shape != (len(dofs), len(dofs)):
            raise SolverError(f"Trace numbering clash in cell {element.cell}")
        local_rows = skeleton.free_index[dofs]
        free_rows = local_rows >= 0
        free_cols = free_rows
        block = element.schur[free_rows]
        np.add.at(rhs, local_rows[free_rows], element.load[free_rows])
        rhs_shift = block[:, ~free_cols] @ skeleton.prescribed[dofs[~free_cols]]
        np.add.at(rhs, local_rows[free_rows], -rhs_shift)
        r, c = np.meshgrid(local_rows[free_rows], local_rows[free_cols], indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(block[:, free_cols].ravel())
    if neumann is not None:
        for e, values in zip(neumann.edges, neumann.values):
            index = skeleton.free_index[skeleton.edge_dofs(e)]
            if np.any(index < 0):
                raise SolverError(f"Neumann edge {e} has constrained trace DOFs")
            rhs[index] += values
    matrix = sparse.coo_matrix(
        (
            np.concatenate(vals) if vals else np.zeros(0),
            (
                np.concatenate(rows) if rows else np.zeros(0, dtype=int),
                np.concatenate(cols) if cols else np.zeros(0, dtype=int),
            ),
        ),
        shape=(n, n),
    ).tocsr()
    if not np.all(np.isfinite(matrix.data)) or not np.all(np.isfinite(rhs)):
        raise SolverError("Assembled skeleton system has non-finite entries")
    logger.debug(f"Assembled skeleton system: {n} unknowns, {matrix.nnz} nonzeros")
    return SkeletonSystem(matrix=matrix, rhs=rhs)


class GlobalSolution(NamedTuple):
    phi: np.ndarray
    residual: float
    """Relative residual ||A phi - b|| / ||b||."""
    method: str


def _relative_residual(matrix: sparse.csr_matrix, x: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(matrix @ x - b) / np.linalg.norm(b))


def _backward_error(matrix: sparse.csr_matrix, x: np.ndarray, b: np.ndarray, matrix_norm: float) -> float:
    return float(np.linalg.norm(matrix @ x - b) / (matrix_norm * np.linalg.norm(x) + np.linalg.norm(b)))


def _direct(matrix: sparse.csc_matrix, b: np.ndarray, refinements: int) -> np.ndarray:
    factor = splu(matrix)
    x = factor.solve(b)
    for _ in range(refinements):
        x = x + factor.solve(b - matrix @ x)
    return x


def _iterative(matrix: sparse.csc_matrix, b: np.ndarray, x0: np.ndarray | None, tol: float) -> np.ndarray:
    ilu = spilu(matrix, drop_tol=1e-6, fill_factor=20)
    preconditioner = LinearOperator(matrix.shape, ilu.solve)
    x, info = gmres(matrix, b, x0=x0, rtol=tol, restart=200, maxiter=50, M=preconditioner)
    if info < 0:
        raise RuntimeError(f"gmres breakdown (info={info})")
    return x


def solve_global(system: SkeletonSystem, tol: float = 1e-12, *, refinements: int = 2) -> GlobalSolution:
    """Sparse LU with iterative refinement, falling back to ILU-preconditioned GMRES.

    The contract is ||A phi - b|| <= tol ||b||. When round-off alone prevents it, a solution
    with normwise backward error below `tol` is accepted with a warning.
    """
    b = system.rhs
    if system.n_free == 0:
        return GlobalSolution(np.zeros(0), 0.0, "empty")
    if not np.any(b):
        return GlobalSolution(np.zeros_like(b), 0.0, "zero-rhs")
    matrix = system.matrix.tocsc()
    matrix_norm = float(sparse_norm(matrix, 1))

    candidate: np.ndarray | None = None
    for method in ("splu", "gmres"):
        try:
            if method == "splu":
                x = _direct(matrix, b, refinements)
            else:
                x = _iterative(matrix, b, candidate, tol)
        except (RuntimeError, ValueError) as e:
            logger.warning(f"Skeleton solve with {method} failed: {e}")
            continue
        if not np.all(np.isfinite(x)):
            logger.warning(f"Skeleton solve with {method} produced non-finite values")
            continue
        residual = _relative_residual(matrix, x, b)
        if residual <= tol:
            logger.debug(f"Skeleton solve ({method}): relative residual {residual:.3e}")
            return GlobalSolution(x, residual, method)
        backward = _backward_error(matrix, x, b, matrix_norm)
        if backward <= tol:
            logger.warning(
                f"Skeleton solve ({method}): relative residual {residual:.3e} above {tol:.1e}, "
                f"accepted at round-off level (backward error {backward:.3e})"
            )
            return GlobalSolution(x, residual, method)
        logger.warning(f"Skeleton solve ({method}) missed the tolerance: relative residual {residual:.3e}")
        candidate = x

    residual = float("nan") if candidate is None else _relative_residual(matrix, candidate, b)
    raise SolverError(
        "Skeleton system could not be solved to tolerance", residual, condition_estimate(matrix)
    )


def condition_estimate(matrix: sparse.csc_matrix) -> float:
    """1-norm condition estimate; only ||A||_1 when A cannot be factorized."""
    norm = float(onenormest(matrix))
    try:
        factor = splu(matrix)
    except RuntimeError:
        return norm
    inverse = LinearOperator(
        matrix.shape, matvec=factor.solve, rmatvec=lambda y: factor.solve(y, trans="T"), dtype=float
    )
    return norm * float(onenormest(inverse))
