"""Trace unknowns on the mesh skeleton and edgewise projections of boundary data."""

from __future__ import annotations

import functools
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from loguru import logger

from polydg.assembly.local import edge_basis, edge_quadrature
from polydg.basis.legendre import eval_edge_basis
from polydg.mesh.model import BoundaryTag, PolygonalMesh
from polydg.problem import FluxData, ScalarField

__all__ = [
    "EdgeCoefficients",
    "SkeletonSpace",
    "apply_neumann",
    "build_skeleton_space",
    "project_on_edges",
]


@dataclass(frozen=True)
class EdgeCoefficients:
    """Coefficients in the orthonormal edge basis for a subset of edges."""

    edges: np.ndarray
    values: np.ndarray
    """Shape (len(edges), k'+1)."""

    def as_dict(self) -> dict[int, np.ndarray]:
        return {int(e): v for e, v in zip(self.edges, self.values)}


def project_on_edges(
    mesh: PolygonalMesh,
    edges: np.ndarray,
    kprime: int,
    integrand: Callable[[np.ndarray, np.ndarray], np.ndarray],
    *,
    npoints: int | None = None,
) -> EdgeCoefficients:
    """L2(e) projection coefficients c_q = int_e g mu_q for g = integrand(points, normals)."""
    npoints = kprime + 4 if npoints is None else npoints
    values = np.zeros((len(edges), kprime + 1))
    for row, e in enumerate(edges):
        points, weights, s = edge_quadrature(mesh, e, npoints)
        normals = np.broadcast_to(mesh.normals[e], points.shape)
        mu = eval_edge_basis(edge_basis(mesh, e, kprime), s)
        values[row] = (weights * integrand(points, normals)) @ mu
    return EdgeCoefficients(np.asarray(edges, dtype=int), values)


@dataclass(frozen=True)
class SkeletonSpace:
    """Trace DOFs numbered edge by edge: DOF q of edge e is e*(k'+1) + q.

    Interior and Neumann edges are free; Dirichlet edges carry the projection of g.
    """

    mesh: PolygonalMesh
    kprime: int
    free_index: np.ndarray
    """Row of each DOF in the free system, -1 for constrained DOFs."""
    prescribed: np.ndarray
    """Value of each DOF fixed by Dirichlet data, zero for free DOFs."""
    dirichlet: EdgeCoefficients

    @property
    def block(self) -> int:
        return self.kprime + 1

    @property
    def n_dofs(self) -> int:
        return len(self.free_index)

    @property
    def n_free(self) -> int:
        return int((self.free_index >= 0).sum())

    @functools.cached_property
    def free_dofs(self) -> np.ndarray:
        return np.flatnonzero(self.free_index >= 0)

    def edge_dofs(self, e: int) -> np.ndarray:
        return e * self.block + np.arange(self.block)

    def cell_dofs(self, c: int) -> np.ndarray:
        """Global DOFs of the cell's trace, in loop order."""
        edges = self.mesh.cell_edges[c]
        return (edges[:, None] * self.block + np.arange(self.block)[None, :]).ravel()

    def full_vector(self, free_values: np.ndarray) -> np.ndarray:
        phi = self.prescribed.copy()
        phi[self.free_dofs] = free_values
        return phi


def build_skeleton_space(mesh: PolygonalMesh, kprime: int, dirichlet: ScalarField) -> SkeletonSpace:
    if kprime < 0:
        raise ValueError(f"k' must be non-negative, got {kprime}")
    q = kprime + 1
    dirichlet_edges = mesh.edges_with_tag(BoundaryTag.DIRICHLET)
    data = project_on_edges(mesh, dirichlet_edges, kprime, lambda points, _: dirichlet(points))
    constrained = np.zeros(mesh.n_edges * q, dtype=bool)
    prescribed = np.zeros(mesh.n_edges * q)
    for e, values in zip(data.edges, data.values):
        constrained[e * q : (e + 1) * q] = True
        prescribed[e * q : (e + 1) * q] = values
    free_index = -np.ones(mesh.n_edges * q, dtype=int)
    free_index[~constrained] = np.arange(int((~constrained).sum()))
    space = SkeletonSpace(
        mesh=mesh, kprime=kprime, free_index=free_index, prescribed=prescribed, dirichlet=data
    )
    logger.debug(
        f"Skeleton space: {mesh.n_edges} edges, {len(dirichlet_edges)} Dirichlet, {space.n_free} free DOFs"
    )
    return space


def apply_neumann(mesh: PolygonalMesh, neumann: FluxData, kprime: int) -> EdgeCoefficients:
    """Projected flux data on Neumann edges; these coefficients are what λ^K equals there."""
    edges = mesh.edges_with_tag(BoundaryTag.NEUMANN)
    return project_on_edges(mesh, edges, kprime, neumann)
