"""Minus-one stabilization s_K(η, ζ) = ηᵀ S⁻¹ ζ on the auxiliary space W^K."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from polydg.basis.monomials import ScaledMonomialBasis, eval_cell_basis
from polydg.errors import SingularStabilizerError
from polydg.mesh.subtriangulation import CellSplit
from polydg.problem import ScalarField
from polydg.refstab.stabilizer import ReferenceStabilizer, push_forward

__all__ = ["StabilizationBlocks", "assemble_stabilization", "stabilization_form"]


@dataclass(frozen=True)
class StabilizationBlocks:
    """Per sub-triangle T_i blocks, stacked along the first axis.

    η(u, λ)_i = E_i u - G_i λ_i and f_i hold the moments of ∇u, λ and f against the
    basis φ_p of W_i. S is block diagonal, so s_K needs one small solve per triangle.
    """

    cell: int
    stiffness: np.ndarray
    """S_i, shape (N_K, q, q)."""
    inverses: np.ndarray
    """S_i^{-1} (pseudo-inverse if the reference space is rank-deficient), shape (N_K, q, q)."""
    volume: np.ndarray
    """E_i, shape (N_K, q, n_u)."""
    trace: np.ndarray
    """G_i, shape (N_K, q, q), acting on the flux DOFs of edge e_i."""
    load: np.ndarray
    """f_i, shape (N_K, q)."""

    @property
    def n_triangles(self) -> int:
        return self.stiffness.shape[0]

    @property
    def block_size(self) -> int:
        return self.stiffness.shape[1]

    def eta(self, u: np.ndarray, lam: np.ndarray) -> np.ndarray:
        """η(u, λ) for u in the cell basis and λ in the local flux DOFs."""
        lam = np.asarray(lam).reshape(self.n_triangles, self.block_size)
        return self.volume @ u - np.einsum("ipq,iq->ip", self.trace, lam)

    def zeta(self, v: np.ndarray, mu: np.ndarray, t: float = 1.0) -> np.ndarray:
        return t * (self.volume @ v) - np.einsum("ipq,iq->ip", self.trace, np.asarray(mu).reshape(self.n_triangles, -1))

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """γ = S⁻¹ rhs blockwise; `rhs` has shape (N_K, q) or (N_K, q, m)."""
        if rhs.ndim == 2:
            return np.einsum("ipq,iq->ip", self.inverses, rhs)
        return self.inverses @ rhs

    def inner(self, eta: np.ndarray, zeta: np.ndarray) -> float:
        return float(np.einsum("ip,ip->", eta, self.solve(zeta)))

    def volume_matrix(self) -> np.ndarray:
        """E = [E_0; E_1; ...], shape (N_K q, n_u)."""
        return self.volume.reshape(-1, self.volume.shape[2])

    def trace_matrix(self) -> np.ndarray:
        """G = blockdiag(G_i), shape (N_K q, N_K q)."""
        return sla.block_diag(*self.trace)

    def inverse_matrix(self) -> np.ndarray:
        return sla.block_diag(*self.inverses)


def stabilization_form(
    blocks: StabilizationBlocks,
    u: np.ndarray,
    lam: np.ndarray,
    v: np.ndarray,
    mu: np.ndarray,
    *,
    t: float = 1.0,
    with_load: bool = False,
) -> float:
    """s_K(Du - γ*λ [- f], tDv - γ*μ)."""
    eta = blocks.eta(u, lam)
    if with_load:
        eta = eta - blocks.load
    return blocks.inner(eta, blocks.zeta(v, mu, t))


def _invert_block(stiffness: np.ndarray, rank_deficient: bool, cell: int, i: int) -> np.ndarray:
    if rank_deficient:
        return sla.pinvh(stiffness)
    try:
        factor = sla.cho_factor(stiffness)
    except np.linalg.LinAlgError as e:
        raise SingularStabilizerError(f"S_{i} is not positive definite ({e})", cell=cell) from e
    return sla.cho_solve(factor, np.eye(len(stiffness)))


def assemble_stabilization(
    split: CellSplit,
    basis: ScaledMonomialBasis,
    stab: ReferenceStabilizer,
    source: ScalarField | None = None,
) -> StabilizationBlocks:
    n = split.n_triangles
    q = stab.dimension
    stiffness = np.empty((n, q, q))
    inverses = np.empty((n, q, q))
    volume = np.empty((n, q, basis.dimension))
    trace = np.empty((n, q, q))
    load = np.zeros((n, q))
    for i in range(n):
        try:
            data = push_forward(
                stab, split.jacobians[i], split.translations[i], edge_sign=int(split.edge_signs[i])
            )
        except SingularStabilizerError as e:
            raise SingularStabilizerError(str(e), cell=split.cell) from e
        _, grad_m = eval_cell_basis(basis, data.points)
        volume[i] = np.einsum("n,njd,npd->pj", data.weights, grad_m, data.gradients)
        if source is not None:
            load[i] = (data.weights * source(data.points)) @ data.values
        stiffness[i] = data.stiffness
        trace[i] = data.trace_coupling
        inverses[i] = _invert_block(data.stiffness, stab.rank_deficient, split.cell, i)
    return StabilizationBlocks(
        cell=split.cell, stiffness=stiffness, inverses=inverses, volume=volume, trace=trace, load=load
    )
