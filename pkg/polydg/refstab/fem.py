"""P1 finite elements on the reference triangle, constrained on the two legs away from e^."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from loguru import logger
from scipy import sparse
from scipy.sparse.linalg import splu

from polydg.basis.legendre import unit_interval_legendre
from polydg.basis.quadrature import gauss_edge_rule
from polydg.errors import LiftingError, ReferenceMeshTooLargeError

__all__ = [
    "ReferenceTriangleFEM",
    "barycentric_gradients",
    "build_reference_fem",
    "lift_neumann",
    "p1_gradients",
    "p1_stiffness",
    "structured_triangle_mesh",
    "subdivisions_for",
]

NODE_CAP = 2_000_000


@functools.cache
def structured_triangle_mesh(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Three-direction uniform mesh of conv{(0,0),(1,0),(0,1)} with m segments per side.

    Node (i, j) sits at (i/m, j/m) for i + j <= m; numbering runs row by row in j.
    """
    index = -np.ones((m + 1, m + 1), dtype=int)
    coords = []
    for j in range(m + 1):
        for i in range(m + 1 - j):
            index[i, j] = len(coords)
            coords.append((i / m, j / m))
    triangles = []
    for j in range(m):
        for i in range(m - j):
            triangles.append((index[i, j], index[i + 1, j], index[i, j + 1]))
            if i + j < m - 1:
                triangles.append((index[i + 1, j], index[i + 1, j + 1], index[i, j + 1]))
    nodes = np.array(coords)
    tris = np.array(triangles, dtype=int)
    nodes.setflags(write=False)
    tris.setflags(write=False)
    return nodes, tris


def barycentric_gradients(nodes: np.ndarray, triangles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = nodes[triangles]
    jac = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)
    det = np.linalg.det(jac)
    inv = np.linalg.inv(jac)
    # rows of J^{-1} are the gradients of lambda_1 and lambda_2
    g12 = inv
    g0 = -g12.sum(axis=1, keepdims=True)
    return np.concatenate([g0, g12], axis=1), 0.5 * np.abs(det)


def p1_stiffness(nodes: np.ndarray, triangles: np.ndarray) -> sparse.csr_matrix:
    grads, areas = barycentric_gradients(nodes, triangles)
    local = np.einsum("t,tid,tjd->tij", areas, grads, grads)
    rows = np.repeat(triangles, 3, axis=1).ravel()
    cols = np.tile(triangles, (1, 3)).ravel()
    n = len(nodes)
    return sparse.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def p1_gradients(nodes: np.ndarray, triangles: np.ndarray, nodal: np.ndarray) -> np.ndarray:
    """Piecewise-constant gradients of P1 functions, shape (n_triangles, n_functions, 2)."""
    grads, _ = barycentric_gradients(nodes, triangles)
    return np.einsum("tid,tif->tfd", grads, nodal[triangles])


def subdivisions_for(delta: float) -> int:
    return max(1, math.ceil(1.0 / delta - 1e-12))


@dataclass(frozen=True)
class ReferenceTriangleFEM:
    delta: float
    m: int
    nodes: np.ndarray
    triangles: np.ndarray
    free: np.ndarray
    """Indices of unconstrained nodes (interior nodes and the interior of e^)."""
    trace_nodes: np.ndarray
    """Nodes on e^ ordered by x, corners included."""
    stiffness: sparse.csr_matrix

    @property
    def mesh_size(self) -> float:
        return 1.0 / self.m

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @functools.cached_property
    def factor(self):
        if len(self.free) == 0:
            return None
        try:
            return splu(self.stiffness[self.free][:, self.free].tocsc())
        except RuntimeError as e:
            raise LiftingError(f"Constrained reference stiffness is singular (m={self.m}): {e}") from e

    def edge_load(self, degree: int) -> np.ndarray:
        """Matrix with entries int_e^ L_q N_n for the [0,1]-orthonormal Legendre L_q, shape (n_nodes, degree+1)."""
        return _edge_load(self, degree)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve the constrained system; `rhs` has one column per load, constrained rows ignored."""
        rhs = np.asarray(rhs, dtype=float)
        out = np.zeros_like(rhs)
        if self.factor is None:
            return out
        solution = self.factor.solve(np.ascontiguousarray(rhs[self.free]))
        if not np.all(np.isfinite(solution)):
            raise LiftingError("Reference lifting produced non-finite values")
        out[self.free] = solution
        return out


def _edge_load(fem: ReferenceTriangleFEM, degree: int) -> np.ndarray:
    rule = gauss_edge_rule(degree // 2 + 2)
    t = 0.5 * (rule.points + 1.0)
    w = 0.5 * rule.weights / fem.m
    load = np.zeros((fem.n_nodes, degree + 1))
    for i in range(fem.m):
        s = (i + t) / fem.m
        legendre = unit_interval_legendre(s, degree) * w[:, None]
        load[fem.trace_nodes[i]] += (1.0 - t) @ legendre
        load[fem.trace_nodes[i + 1]] += t @ legendre
    return load


def build_reference_fem(delta: float, *, node_cap: int = NODE_CAP) -> ReferenceTriangleFEM:
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"Reference mesh size must satisfy 0 < delta <= 1, got {delta}")
    m = subdivisions_for(delta)
    n_nodes = (m + 1) * (m + 2) // 2
    if n_nodes > node_cap:
        raise ReferenceMeshTooLargeError(
            f"delta={delta} needs {n_nodes} reference nodes, above the cap of {node_cap}"
        )
    nodes, triangles = structured_triangle_mesh(m)
    i = np.rint(nodes[:, 0] * m).astype(int)
    j = np.rint(nodes[:, 1] * m).astype(int)
    constrained = (i == 0) | (i + j == m)
    trace_nodes = np.flatnonzero(j == 0)
    trace_nodes = trace_nodes[np.argsort(i[trace_nodes])]
    fem = ReferenceTriangleFEM(
        delta=delta,
        m=m,
        nodes=nodes,
        triangles=triangles,
        free=np.flatnonzero(~constrained),
        trace_nodes=trace_nodes,
        stiffness=p1_stiffness(nodes, triangles),
    )
    logger.debug(f"Reference FEM delta={delta:g}: m={m}, {n_nodes} nodes, {len(fem.free)} free")
    return fem


def lift_neumann(fem: ReferenceTriangleFEM, coefficients: np.ndarray) -> np.ndarray:
    """Discrete lifting G(lambda): int grad(phi).grad(v) = int_e^ lambda v for all v in V_delta.

    `coefficients` are the coordinates of lambda in the [0,1]-orthonormal Legendre basis
    on e^; a 2D array lifts one function per column.
    """
    coefficients = np.asarray(coefficients, dtype=float)
    if not np.all(np.isfinite(coefficients)):
        raise LiftingError("Lifting data must be finite")
    degree = coefficients.shape[0] - 1
    return fem.solve(fem.edge_load(degree) @ coefficients)
