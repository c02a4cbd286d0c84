"""Per-cell recovery of (u, λ) from the skeleton trace and solution export."""

from __future__ import annotations

import functools
import os
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from polydg.assembly.hybrid import CondensedElement
from polydg.assembly.local import cell_basis
from polydg.basis.monomials import ScaledMonomialBasis
from polydg.mesh.model import BoundaryTag, PolygonalMesh
from polydg.solver.skeleton import SkeletonSpace
from polydg.utils.io import ensure_dir, sibling
from polydg.utils.parallel import map_cells

__all__ = ["DGSolution", "read_coefficients", "reconstruct", "save_solution"]


@dataclass(frozen=True)
class DGSolution:
    mesh: PolygonalMesh
    k: int
    kprime: int
    u: tuple[np.ndarray, ...]
    """Scaled-monomial coefficients of u^K per cell."""
    flux: tuple[np.ndarray, ...]
    """Coefficients of λ^K per cell, edge block by edge block in loop order."""
    trace: np.ndarray
    """Skeleton φ, shape (n_edges, k'+1)."""

    @property
    def dofs(self) -> int:
        """dim V_h."""
        return sum(len(u) for u in self.u)

    @functools.cached_property
    def bases(self) -> tuple[ScaledMonomialBasis, ...]:
        return tuple(cell_basis(self.mesh, c, self.k) for c in range(self.mesh.n_cells))

    def evaluate(self, c: int, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """u_h and ∇u_h of cell c at `points`."""
        values, gradients = self.bases[c].values(points), self.bases[c].gradients(points)
        return values @ self.u[c], np.einsum("nad,a->nd", gradients, self.u[c])

    def edge_flux(self, c: int, e: int) -> np.ndarray:
        position = int(np.flatnonzero(self.mesh.cell_edges[c] == e)[0])
        q = self.kprime + 1
        return self.flux[c][position * q : (position + 1) * q]

    def gluing_residual(self) -> np.ndarray:
        """Σ_K ∫_e λ^K ψ_q on every interior edge, shape (n_interior, k'+1)."""
        interior = self.mesh.edges_with_tag(BoundaryTag.INTERIOR)
        residual = np.zeros((len(interior), self.kprime + 1))
        for row, e in enumerate(interior):
            left, right = self.mesh.edge_cells[e]
            residual[row] = self.edge_flux(left, e) + self.edge_flux(right, e)
        return residual


def reconstruct(
    mesh: PolygonalMesh,
    elements: Sequence[CondensedElement],
    skeleton: SkeletonSpace,
    phi_free: np.ndarray,
    *,
    k: int,
    workers: int = 1,
) -> DGSolution:
    phi = skeleton.full_vector(phi_free)

    def recover(element: CondensedElement) -> tuple[np.ndarray, np.ndarray]:
        return element.recover(phi[skeleton.cell_dofs(element.cell)])

    pieces = map_cells(recover, elements, workers=workers)
    return DGSolution(
        mesh=mesh,
        k=k,
        kprime=skeleton.kprime,
        u=tuple(u for u, _ in pieces),
        flux=tuple(lam for _, lam in pieces),
        trace=phi.reshape(mesh.n_edges, skeleton.block),
    )


def _coefficient_frame(owner: str, blocks: Sequence[np.ndarray]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            owner: np.repeat(np.arange(len(blocks)), [len(b) for b in blocks]),
            "index": np.concatenate([np.arange(len(b)) for b in blocks]) if blocks else [],
            "value": np.concatenate(blocks) if blocks else [],
        }
    )


def save_solution(solution: DGSolution, path: os.PathLike | str) -> list[Path]:
    """Write u to `path` and λ, φ to the `.flux.csv` and `.trace.csv` siblings."""
    path = Path(path)
    ensure_dir(path.parent)
    outputs = [
        (path, _coefficient_frame("cell", solution.u)),
        (sibling(path, ".flux.csv"), _coefficient_frame("cell", solution.flux)),
        (sibling(path, ".trace.csv"), _coefficient_frame("edge", list(solution.trace))),
    ]
    for target, frame in outputs:
        frame.to_csv(target, index=False)
    return [target for target, _ in outputs]


def read_coefficients(path: os.PathLike | str) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")
