"""Shape-regularity diagnostics: diameters, inscribed radii, gamma constants."""

from __future__ import annotations

import itertools
from typing import NamedTuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field
from scipy.optimize import linprog

from polydg.errors import MeshError
from polydg.mesh.model import PolygonalMesh, polygon_centroid

__all__ = ["ChebyshevCenter", "MeshQualityReport", "chebyshev_center", "is_convex", "quality_report"]

MAX_ENUMERATED_EDGES = 16


class ChebyshevCenter(NamedTuple):
    center: np.ndarray
    radius: float
    approximate: bool


class MeshQualityReport(BaseModel):
    N_p: int = Field(description="Number of cells")
    N_e: int = Field(description="Number of skeleton edges")
    h: float = Field(description="Maximum cell diameter")
    h_min: float = Field(description="Minimum vertex distance within a cell")
    gamma0: float = Field(description="max_K h_K / rho_K over all cells")
    gamma1: float = Field(description="max_K h_K / h_min,K")
    gamma0_interior: float = Field(description="max_K h_K / rho_K over cells without boundary edges")
    min_edge: float = Field(description="Minimum skeleton edge length")
    approximate: bool = Field(False, description="Whether any rho_K came from the nonconvex fallback")

    def to_key_values(self) -> list[str]:
        return [f"{key}={value!r}" for key, value in self.model_dump().items()]


def _outward_constraints(polygon: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d = np.roll(polygon, -1, axis=0) - polygon
    normals = np.column_stack([d[:, 1], -d[:, 0]])
    normals /= np.linalg.norm(normals, axis=1)[:, None]
    return normals, np.einsum("ij,ij->i", normals, polygon)


def is_convex(polygon: np.ndarray, tol: float = 1e-12) -> bool:
    d = np.roll(polygon, -1, axis=0) - polygon
    dn = np.roll(d, -1, axis=0)
    cross = d[:, 0] * dn[:, 1] - d[:, 1] * dn[:, 0]
    scale = np.linalg.norm(d, axis=1) * np.linalg.norm(dn, axis=1)
    return bool(np.all(cross >= -tol * scale))


def _enumerate_vertices(normals: np.ndarray, offsets: np.ndarray, scale: float) -> ChebyshevCenter:
    """Solve max r s.t. n_e.x + r <= c_e by checking every vertex of the feasible set."""
    triples = np.array(list(itertools.combinations(range(len(normals)), 3)))
    a = np.concatenate([normals[triples], np.ones((len(triples), 3, 1))], axis=2)
    b = offsets[triples]
    det = np.linalg.det(a)
    ok = np.abs(det) > 1e-14
    solutions = np.linalg.solve(a[ok], b[ok][..., None])[..., 0]
    slack = offsets[None, :] - solutions[:, :2] @ normals.T - solutions[:, 2:3]
    feasible = np.all(slack >= -1e-12 * scale, axis=1) & (solutions[:, 2] >= 0.0)
    if not np.any(feasible):
        raise MeshError("Chebyshev center LP has no feasible vertex")
    candidates = solutions[feasible]
    best = int(np.argmax(candidates[:, 2]))
    return ChebyshevCenter(candidates[best, :2], float(candidates[best, 2]), False)


def _linprog_center(normals: np.ndarray, offsets: np.ndarray) -> ChebyshevCenter:
    a_ub = np.column_stack([normals, np.ones(len(normals))])
    result = linprog(
        c=[0.0, 0.0, -1.0],
        A_ub=a_ub,
        b_ub=offsets,
        bounds=[(None, None), (None, None), (0.0, None)],
        method="highs",
    )
    if not result.success:
        raise MeshError(f"Chebyshev center LP failed: {result.message}")
    return ChebyshevCenter(result.x[:2], float(result.x[2]), False)


def _segment_distances(points: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    a = polygon
    ab = np.roll(polygon, -1, axis=0) - a
    ap = points[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("pij,ij->pi", ap, ab) / np.einsum("ij,ij->i", ab, ab), 0.0, 1.0)
    closest = a[None] + t[..., None] * ab[None]
    return np.linalg.norm(points[:, None, :] - closest, axis=2).min(axis=1)


def _inside(points: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    x, y = points[:, 0:1], points[:, 1:2]
    xi, yi = polygon[:, 0], polygon[:, 1]
    xj, yj = np.roll(xi, -1), np.roll(yi, -1)
    crosses = ((yi > y) != (yj > y)) & (x < (xj - xi) * (y - yi) / (yj - yi + 1e-300) + xi)
    return crosses.sum(axis=1) % 2 == 1


def _sampled_center(polygon: np.ndarray, samples: int = 32) -> ChebyshevCenter:
    lo, hi = polygon.min(axis=0), polygon.max(axis=0)
    gx, gy = np.meshgrid(
        np.linspace(lo[0], hi[0], samples + 2)[1:-1], np.linspace(lo[1], hi[1], samples + 2)[1:-1]
    )
    candidates = np.vstack([polygon_centroid(polygon)[None], np.column_stack([gx.ravel(), gy.ravel()])])
    candidates = candidates[_inside(candidates, polygon)]
    if len(candidates) == 0:
        raise MeshError("No interior candidate point found for the inscribed ball")
    distances = _segment_distances(candidates, polygon)
    best = int(np.argmax(distances))
    return ChebyshevCenter(candidates[best], float(distances[best]), True)


def chebyshev_center(polygon: np.ndarray) -> ChebyshevCenter:
    """Center and radius of the largest ball inside a counterclockwise polygon.

    Exact for convex polygons; nonconvex polygons get a sampled maximin flagged approximate.
    """
    polygon = np.asarray(polygon, dtype=float)
    if not is_convex(polygon):
        return _sampled_center(polygon)
    normals, offsets = _outward_constraints(polygon)
    if len(polygon) > MAX_ENUMERATED_EDGES:
        return _linprog_center(normals, offsets)
    scale = float(np.ptp(polygon, axis=0).max())
    return _enumerate_vertices(normals, offsets, scale)


def _min_pair_distance(polygon: np.ndarray) -> float:
    d = polygon[:, None, :] - polygon[None, :, :]
    dist = np.sqrt((d**2).sum(-1))
    return float(dist[np.triu_indices(len(polygon), 1)].min())


def quality_report(mesh: PolygonalMesh) -> MeshQualityReport:
    diameters = mesh.cell_diameters
    radii = np.empty(mesh.n_cells)
    h_min = np.empty(mesh.n_cells)
    approximate = False
    for c in range(mesh.n_cells):
        polygon = mesh.cell_polygon(c)
        center = chebyshev_center(polygon)
        radii[c] = center.radius
        approximate |= center.approximate
        h_min[c] = _min_pair_distance(polygon)
    boundary_cells = np.unique(mesh.edge_cells[mesh.boundary_edges, 0])
    interior = np.setdiff1d(np.arange(mesh.n_cells), boundary_cells)
    ratios = diameters / radii
    report = MeshQualityReport(
        N_p=mesh.n_cells,
        N_e=mesh.n_edges,
        h=float(diameters.max()),
        h_min=float(h_min.min()),
        gamma0=float(ratios.max()),
        gamma1=float((diameters / h_min).max()),
        gamma0_interior=float(ratios[interior].max()) if len(interior) else float("nan"),
        min_edge=float(mesh.edge_lengths.min()),
        approximate=approximate,
    )
    logger.debug(f"Mesh quality: {report}")
    return report
