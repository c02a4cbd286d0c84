"""Polygonal mesh data model and its validation."""

from __future__ import annotations

import enum
import functools
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from loguru import logger

from polydg.errors import MeshError

__all__ = ["BOUNDARY_CONDITIONS", "BoundaryTag", "Point2", "PolygonalMesh", "build_mesh", "signed_area", "top_is_neumann"]


class Point2(NamedTuple):
    x: float
    y: float


class BoundaryTag(enum.StrEnum):
    INTERIOR = "interior"
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


BOUNDARY_CONDITIONS = frozenset({BoundaryTag.DIRICHLET, BoundaryTag.NEUMANN})


type EdgeKey = tuple[int, int]
type NeumannPredicate = Callable[[np.ndarray, np.ndarray, tuple[np.ndarray, np.ndarray]], bool]


def signed_area(polygon: np.ndarray) -> float:
    """Shoelace area; positive for counterclockwise loops."""
    x, y = polygon[:, 0], polygon[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_centroid(polygon: np.ndarray) -> np.ndarray:
    x, y = polygon[:, 0], polygon[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * cross.sum()
    return np.array([((x + xn) * cross).sum(), ((y + yn) * cross).sum()]) / (6.0 * area)


def top_is_neumann(
    p0: np.ndarray, p1: np.ndarray, bbox: tuple[np.ndarray, np.ndarray]
) -> bool:
    """Default tagging: the top side of the bounding box is Neumann, the rest Dirichlet."""
    top = bbox[1][1]
    tol = 1e-12 * max(1.0, abs(top))
    return abs(p0[1] - top) <= tol and abs(p1[1] - top) <= tol


@dataclass(frozen=True)
class PolygonalMesh:
    vertices: np.ndarray
    """Vertex coordinates, shape (V, 2)."""
    cells: tuple[np.ndarray, ...]
    """Counterclockwise vertex-index loops."""
    edges: np.ndarray
    """Edge endpoints (v0, v1), shape (E, 2); v0 -> v1 is the traversal in the left cell."""
    edge_cells: np.ndarray
    """(left, right) cell per edge, shape (E, 2); right is -1 on the boundary."""
    edge_tags: tuple[BoundaryTag, ...]
    cell_edges: tuple[np.ndarray, ...]
    """Edge index of loop edge i (from loop[i] to loop[i+1]) per cell."""
    cell_edge_signs: tuple[np.ndarray, ...]
    """+1 where the loop traverses the edge from v0 to v1, -1 otherwise."""

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def cell_polygon(self, c: int) -> np.ndarray:
        return self.vertices[self.cells[c]]

    @functools.cached_property
    def edge_lengths(self) -> np.ndarray:
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    @functools.cached_property
    def normals(self) -> np.ndarray:
        """Unit normals pointing out of the left cell, hence outward on the boundary."""
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return np.column_stack([d[:, 1], -d[:, 0]]) / self.edge_lengths[:, None]

    @functools.cached_property
    def cell_areas(self) -> np.ndarray:
        return np.array([signed_area(self.cell_polygon(c)) for c in range(self.n_cells)])

    @functools.cached_property
    def cell_centroids(self) -> np.ndarray:
        return np.array([polygon_centroid(self.cell_polygon(c)) for c in range(self.n_cells)])

    @functools.cached_property
    def cell_diameters(self) -> np.ndarray:
        return np.array([_diameter(self.cell_polygon(c)) for c in range(self.n_cells)])

    @property
    def boundary_edges(self) -> np.ndarray:
        return np.flatnonzero(self.edge_cells[:, 1] < 0)

    def edges_with_tag(self, tag: BoundaryTag) -> np.ndarray:
        return np.array([e for e, t in enumerate(self.edge_tags) if t == tag], dtype=int)

    def boundary_tag_map(self) -> dict[EdgeKey, BoundaryTag]:
        return {
            _key(*self.edges[e]): self.edge_tags[e]
            for e in self.boundary_edges
        }

    def with_vertices(self, vertices: np.ndarray) -> PolygonalMesh:
        """Same topology and boundary tags on moved vertices (revalidated)."""
        return build_mesh(vertices, self.cells, boundary_tags=self.boundary_tag_map())


def _diameter(polygon: np.ndarray) -> float:
    d = polygon[:, None, :] - polygon[None, :, :]
    return float(np.sqrt((d**2).sum(-1)).max())


def _key(a: int, b: int) -> EdgeKey:
    return (int(a), int(b)) if a < b else (int(b), int(a))


def _segments_cross(p: np.ndarray, q: np.ndarray, r: np.ndarray, s: np.ndarray) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(p, q, r), orient(p, q, s)
    d3, d4 = orient(r, s, p), orient(r, s, q)
    return d1 * d2 < 0 and d3 * d4 < 0


def _check_simple(polygon: np.ndarray, c: int) -> None:
    n = len(polygon)
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_cross(polygon[i], polygon[(i + 1) % n], polygon[j], polygon[(j + 1) % n]):
                raise MeshError(f"Cell {c} is not a simple polygon (edges {i} and {j} cross)")


def build_mesh(
    vertices: np.ndarray | Sequence[Point2],
    cells: Sequence[Sequence[int] | np.ndarray],
    *,
    boundary_tags: Mapping[EdgeKey, BoundaryTag] | None = None,
    is_neumann: NeumannPredicate = top_is_neumann,
    box_boundary: bool = True,
) -> PolygonalMesh:
    """Validate cell loops, derive the skeleton and tag boundary edges.

    Boundary edges listed in `boundary_tags` (keyed by sorted vertex pair) take that tag;
    the others are Neumann if `is_neumann` says so and Dirichlet otherwise. With
    `box_boundary`, every boundary edge must lie on the bounding box.
    """
    vertices = np.asarray(vertices, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(vertices)):
        raise MeshError("Vertex coordinates must be finite")
    loops = tuple(np.asarray(cell, dtype=int) for cell in cells)
    if not loops:
        raise MeshError("Mesh has no cells")

    incidences: dict[EdgeKey, list[tuple[int, int, int]]] = {}
    for c, loop in enumerate(loops):
        if len(loop) < 3 or len(set(loop.tolist())) != len(loop):
            raise MeshError(f"Cell {c} is not a simple polygon (repeated or too few vertices)")
        if loop.min() < 0 or loop.max() >= len(vertices):
            raise MeshError(f"Cell {c} references an unknown vertex")
        polygon = vertices[loop]
        if signed_area(polygon) <= 0.0:
            raise MeshError(f"Cell {c} has inconsistent orientation (not counterclockwise)")
        _check_simple(polygon, c)
        for i, (a, b) in enumerate(zip(loop, np.roll(loop, -1))):
            incidences.setdefault(_key(a, b), []).append((c, i, 1 if a < b else -1))

    lo, hi = vertices.min(axis=0), vertices.max(axis=0)
    scale = float(np.max(hi - lo))
    edges, edge_cells, tags = [], [], []
    cell_edges = [np.empty(len(loop), dtype=int) for loop in loops]
    cell_signs = [np.empty(len(loop), dtype=int) for loop in loops]
    boundary_tags = boundary_tags or {}

    for e, (key, uses) in enumerate(sorted(incidences.items())):
        if len(uses) > 2:
            raise MeshError(f"Edge {key} is shared by more than two cells")
        left_cell, left_i, left_dir = uses[0]
        v0, v1 = key if left_dir == 1 else key[::-1]
        right_cell = -1
        if len(uses) == 2:
            right_cell, _, right_dir = uses[1]
            if right_dir == left_dir:
                raise MeshError(f"Edge {key} is traversed in the same direction by cells {left_cell} and {right_cell}: inconsistent orientation")
            tag = BoundaryTag.INTERIOR
        else:
            p0, p1 = vertices[v0], vertices[v1]
            on_box = any(
                abs(p0[d] - bound[d]) <= 1e-12 * scale and abs(p1[d] - bound[d]) <= 1e-12 * scale
                for d in (0, 1)
                for bound in (lo, hi)
            )
            if box_boundary and not on_box:
                raise MeshError(f"Dangling edge {key}: used by one cell but not on the domain boundary")
            if key in boundary_tags:
                tag = BoundaryTag(boundary_tags[key])
                if tag not in BOUNDARY_CONDITIONS:
                    raise MeshError(f"Boundary edge {key} has tag {tag}; expected dirichlet or neumann")
            else:
                tag = BoundaryTag.NEUMANN if is_neumann(p0, p1, (lo, hi)) else BoundaryTag.DIRICHLET
        edges.append((v0, v1))
        edge_cells.append((left_cell, right_cell))
        tags.append(tag)
        for c, i, direction in uses:
            cell_edges[c][i] = e
            cell_signs[c][i] = 1 if (direction == 1) == (v0 < v1) else -1

    mesh = PolygonalMesh(
        vertices=vertices,
        cells=loops,
        edges=np.array(edges, dtype=int),
        edge_cells=np.array(edge_cells, dtype=int),
        edge_tags=tuple(tags),
        cell_edges=tuple(cell_edges),
        cell_edge_signs=tuple(cell_signs),
    )
    logger.debug(f"Built mesh with {mesh.n_cells} cells and {mesh.n_edges} edges")
    return mesh
