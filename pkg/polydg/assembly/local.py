"""Cell-local stiffness, boundary coupling and load integrals."""

from __future__ import annotations

import numpy as np

from polydg.basis.legendre import EdgeLegendreBasis, eval_edge_basis
from polydg.basis.monomials import ScaledMonomialBasis, eval_cell_basis
from polydg.basis.quadrature import gauss_edge_rule, triangle_rule
from polydg.mesh.model import PolygonalMesh
from polydg.mesh.subtriangulation import CellSplit
from polydg.problem import ScalarField

__all__ = [
    "assemble_boundary_coupling",
    "assemble_volume_stiffness",
    "cell_basis",
    "cell_quadrature",
    "edge_basis",
    "edge_quadrature",
    "load_vector",
]


def cell_basis(mesh: PolygonalMesh, c: int, k: int) -> ScaledMonomialBasis:
    """Scaled monomials about the centroid, scaled by the diameter."""
    center = mesh.cell_centroids[c]
    return ScaledMonomialBasis((float(center[0]), float(center[1])), float(mesh.cell_diameters[c]), k)


def cell_quadrature(split: CellSplit, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Points (n, 2) and weights (n,) of a degree-exact rule on every sub-triangle of the cell."""
    rule = triangle_rule(degree)
    points = split.translations[:, None, :] + np.einsum("qd,ned->nqe", rule.points, split.jacobians)
    weights = 2.0 * split.areas[:, None] * rule.weights[None, :]
    return points.reshape(-1, 2), weights.ravel()


def edge_basis(mesh: PolygonalMesh, e: int, degree: int) -> EdgeLegendreBasis:
    """Orthonormal Legendre basis of the global edge e, oriented v0 -> v1."""
    p0, p1 = mesh.vertices[mesh.edges[e]]
    return EdgeLegendreBasis((float(p0[0]), float(p0[1])), (float(p1[0]), float(p1[1])), degree)


def edge_quadrature(
    mesh: PolygonalMesh, e: int, npoints: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gauss points on edge e (oriented v0 -> v1), weights and arc-length parameters s from v0."""
    rule = gauss_edge_rule(npoints)
    p0, p1 = mesh.vertices[mesh.edges[e]]
    t = 0.5 * (rule.points + 1.0)
    points = p0[None, :] + t[:, None] * (p1 - p0)[None, :]
    length = mesh.edge_lengths[e]
    return points, 0.5 * length * rule.weights, t * length


def assemble_volume_stiffness(split: CellSplit, basis: ScaledMonomialBasis) -> np.ndarray:
    """A_ij = int_K grad m_j . grad m_i, exact on the sub-triangulation."""
    points, weights = cell_quadrature(split, max(2 * basis.k - 2, 0))
    _, gradients = eval_cell_basis(basis, points)
    stiffness = np.einsum("n,nid,njd->ij", weights, gradients, gradients)
    return 0.5 * (stiffness + stiffness.T)


def assemble_boundary_coupling(
    mesh: PolygonalMesh, c: int, basis: ScaledMonomialBasis, kprime: int
) -> tuple[np.ndarray, np.ndarray]:
    """B_pj = int_{∂K} mu_p m_j and M_pq = int_{∂K} mu_p psi_q, edge block by edge block.

    Local flux and trace DOFs follow the cell loop; each edge block uses the orthonormal
    basis of the global edge, so both operators only couple DOFs of the same edge.
    """
    q = kprime + 1
    edges = mesh.cell_edges[c]
    coupling = np.zeros((len(edges) * q, basis.dimension))
    mass = np.zeros((len(edges) * q, len(edges) * q))
    npoints = (basis.k + kprime) // 2 + 2
    for i, e in enumerate(edges):
        points, weights, s = edge_quadrature(mesh, e, npoints)
        mu = eval_edge_basis(edge_basis(mesh, e, kprime), s)
        block = slice(i * q, (i + 1) * q)
        coupling[block] = np.einsum("n,np,nj->pj", weights, mu, basis.values(points))
        mass[block, block] = np.einsum("n,np,nq->pq", weights, mu, mu)
    return coupling, mass


def load_vector(split: CellSplit, basis: ScaledMonomialBasis, source: ScalarField) -> np.ndarray:
    """F_i = int_K f m_i with a degree 2k+2 rule per sub-triangle."""
    points, weights = cell_quadrature(split, 2 * basis.k + 2)
    values, _ = eval_cell_basis(basis, points)
    return values.T @ (weights * source(points))
