"""Local hybridized saddle system and its static condensation onto the cell traces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from loguru import logger

from polydg.assembly.stabilization import StabilizationBlocks
from polydg.basis.monomials import basis_dimension
from polydg.errors import SingularLocalSystemError

__all__ = [
    "CondensedElement",
    "LocalHybridSystem",
    "LocalSpaces",
    "assemble_local_hybrid",
    "static_condense",
]


@dataclass(frozen=True)
class LocalSpaces:
    k: int
    kprime: int
    n_edges: int

    @property
    def n_u(self) -> int:
        return basis_dimension(self.k)

    @property
    def n_lambda(self) -> int:
        return self.n_edges * (self.kprime + 1)

    @property
    def n_phi(self) -> int:
        return self.n_lambda

    @property
    def n_w(self) -> int:
        """W^K has one block of k'+1 functions per sub-triangle, like Λ_K."""
        return self.n_edges * (self.kprime + 1)

    @property
    def size(self) -> int:
        return self.n_u + self.n_lambda


@dataclass(frozen=True)
class LocalHybridSystem:
    """K [u; λ] = rhs + coupling @ φ for the unknowns of one cell."""

    cell: int
    spaces: LocalSpaces
    matrix: np.ndarray
    rhs: np.ndarray
    coupling: np.ndarray
    """Columns act on the cell's trace DOFs φ; only the λ-test rows are nonzero."""

    def residual(self, u: np.ndarray, lam: np.ndarray, phi: np.ndarray) -> np.ndarray:
        return self.matrix @ np.concatenate([u, lam]) - self.rhs - self.coupling @ phi


def assemble_local_hybrid(
    spaces: LocalSpaces,
    stiffness: np.ndarray,
    coupling: np.ndarray,
    trace_mass: np.ndarray,
    blocks: StabilizationBlocks,
    load: np.ndarray,
    *,
    alpha: float = 1.0,
    t: float = 1.0,
) -> LocalHybridSystem:
    """Assemble â^K(u, λ; v, μ) = (∇u, ∇v) - <λ, v> + <μ, u> + α s_K(Du - γ*λ, tDv - γ*μ).

    The right-hand side is (f, v) + α s_K(f, tDv - γ*μ) + <μ, φ>; the φ part is kept
    separate in `coupling` for condensation.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    e = blocks.volume_matrix()
    g = blocks.trace_matrix()
    p = blocks.inverse_matrix()
    f = blocks.load.ravel()
    pe, pg = p @ e, p @ g

    n_u = spaces.n_u
    matrix = np.empty((spaces.size, spaces.size))
    matrix[:n_u, :n_u] = stiffness + alpha * t * (e.T @ pe)
    matrix[:n_u, n_u:] = -coupling.T - alpha * t * (e.T @ pg)
    matrix[n_u:, :n_u] = coupling - alpha * (g.T @ pe)
    matrix[n_u:, n_u:] = alpha * (g.T @ pg)

    pf = p @ f
    rhs = np.concatenate([load + alpha * t * (e.T @ pf), -alpha * (g.T @ pf)])
    trace_coupling = np.zeros((spaces.size, spaces.n_phi))
    trace_coupling[n_u:] = trace_mass
    return LocalHybridSystem(
        cell=blocks.cell, spaces=spaces, matrix=matrix, rhs=rhs, coupling=trace_coupling
    )


@dataclass(frozen=True)
class CondensedElement:
    """Static condensation of one cell: λ^K = -load_part + schur @ φ_K after elimination.

    `offset` and `response` are K⁻¹ rhs and K⁻¹ coupling, so that
    [u; λ] = offset + response @ φ_K.
    """

    cell: int
    spaces: LocalSpaces
    schur: np.ndarray
    """λ-part of K⁻¹ coupling: the flux response of the cell to its trace DOFs."""
    load: np.ndarray
    """Minus the λ-part of K⁻¹ rhs, so that the gluing reads Σ_K schur φ = Σ_K load (+ Neumann data)."""
    offset: np.ndarray
    response: np.ndarray

    def recover(self, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(u^K, λ^K) from the cell's trace coefficients."""
        state = self.offset + self.response @ phi
        return state[: self.spaces.n_u], state[self.spaces.n_u :]


def static_condense(system: LocalHybridSystem) -> CondensedElement:
    try:
        lu, piv = sla.lu_factor(system.matrix, check_finite=True)
    except ValueError as e:
        raise SingularLocalSystemError(system.cell, f"non-finite local matrix ({e})") from e
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= np.finfo(float).eps * pivots.max() * len(pivots):
        raise SingularLocalSystemError(
            system.cell,
            f"local system is singular (pivot ratio {pivots.min() / pivots.max():.3e}); "
            "the stabilizer may be too weak for this delta",
        )
    solved = sla.lu_solve((lu, piv), np.column_stack([system.rhs, system.coupling]))
    if not np.all(np.isfinite(solved)):
        raise SingularLocalSystemError(system.cell, "local solve produced non-finite values")
    offset, response = solved[:, 0], solved[:, 1:]
    n_u = system.spaces.n_u
    residual = np.linalg.norm(system.matrix @ solved - np.column_stack([system.rhs, system.coupling]))
    scale = np.linalg.norm(system.matrix) * np.linalg.norm(solved) + np.finfo(float).tiny
    if residual > 1e-10 * scale:
        logger.warning(f"Cell {system.cell}: local recovery residual {residual / scale:.3e}")
    return CondensedElement(
        cell=system.cell,
        spaces=system.spaces,
        schur=response[n_u:],
        load=-offset[n_u:],
        offset=offset,
        response=response,
    )
