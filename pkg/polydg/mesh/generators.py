"""Mesh families on the unit square: regular hexagons, (centroidal) Voronoi cells, shrunk hexagons."""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np
from loguru import logger
from scipy import sparse
from scipy.sparse import csgraph
from scipy.spatial import Voronoi, cKDTree

from polydg.errors import MeshError
from polydg.mesh.model import (
    Point2,
    PolygonalMesh,
    build_mesh,
    polygon_centroid,
    signed_area,
)

__all__ = [
    "generate_hexagonal_mesh",
    "generate_voronoi_mesh",
    "shrink_vertical_edges",
    "mesh_from_polygons",
    "clip_to_unit_square",
    "merge_close_points",
    "single_cell_mesh",
]

SLIVER_FACTOR = 1e-3


def clip_to_unit_square(polygon: np.ndarray) -> np.ndarray:
    """Sutherland-Hodgman clipping of a convex polygon against [0, 1]^2."""
    # (axis, bound, keep_greater)
    for axis, bound, greater in ((0, 0.0, True), (0, 1.0, False), (1, 0.0, True), (1, 1.0, False)):
        if len(polygon) == 0:
            break
        inside = polygon[:, axis] >= bound if greater else polygon[:, axis] <= bound
        clipped = []
        for i in range(len(polygon)):
            p, q = polygon[i], polygon[(i + 1) % len(polygon)]
            p_in, q_in = inside[i], inside[(i + 1) % len(polygon)]
            if p_in:
                clipped.append(p)
            if p_in != q_in:
                t = (bound - p[axis]) / (q[axis] - p[axis])
                x = p + t * (q - p)
                x[axis] = bound
                clipped.append(x)
        polygon = np.array(clipped).reshape(-1, 2)
    return polygon


def merge_close_points(points: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Identify points closer than `tol`; returns unique coordinates and the index map."""
    pairs = cKDTree(points).query_pairs(tol, output_type="ndarray")
    graph = sparse.coo_matrix(
        (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(len(points), len(points))
    )
    n_unique, labels = csgraph.connected_components(graph, directed=False)
    # relabel by first occurrence so numbering follows the input order
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    relabel = np.empty(n_unique, dtype=int)
    relabel[order] = np.arange(n_unique)
    labels = relabel[labels]
    unique = points[np.sort(first)]
    return unique, labels


def _snap_to_box(points: np.ndarray, tol: float) -> np.ndarray:
    points = points.copy()
    points[np.abs(points) <= tol] = 0.0
    points[np.abs(points - 1.0) <= tol] = 1.0
    return points


def _merge_slivers(vertices: np.ndarray, loops: list[list[int]], threshold: float) -> list[list[int]]:
    """Merge cells thinner than `threshold` into the neighbor sharing their longest edge."""

    def thickness(loop: list[int]) -> float:
        polygon = vertices[loop]
        d = polygon[:, None, :] - polygon[None, :, :]
        return 2.0 * signed_area(polygon) / float(np.sqrt((d**2).sum(-1)).max())

    loops = [list(loop) for loop in loops]
    while True:
        slivers = [c for c, loop in enumerate(loops) if thickness(loop) < threshold]
        if not slivers:
            return loops
        c = slivers[0]
        sliver = loops[c]
        best: tuple[float, int, int, int] | None = None
        for i in range(len(sliver)):
            a, b = sliver[i], sliver[(i + 1) % len(sliver)]
            for d, other in enumerate(loops):
                if d == c:
                    continue
                for j in range(len(other)):
                    if other[j] == b and other[(j + 1) % len(other)] == a:
                        length = float(np.linalg.norm(vertices[a] - vertices[b]))
                        if best is None or length > best[0]:
                            best = (length, d, a, b)
        if best is None:
            raise MeshError(f"Sliver cell {c} has no neighbor to merge into")
        _, d, a, b = best
        # sliver walked from b around to a, then the neighbor from a around to b
        i = sliver.index(b)
        part = sliver[i:] + sliver[:i]
        other = loops[d]
        j = other.index(a)
        rest = other[j:] + other[:j]
        merged = part + rest[1:-1]
        if len(set(merged)) != len(merged):
            raise MeshError(f"Cannot merge sliver cell {c} into cell {d}")
        loops[d] = merged
        logger.debug(f"Merged sliver cell {c} into cell {d}")
        del loops[c]


def mesh_from_polygons(
    polygons: Sequence[np.ndarray], *, scale: float, sliver_threshold: float = 0.0
) -> PolygonalMesh:
    """Glue cell polygons given by coordinates into a conforming mesh of the unit square.

    Coincident vertices are identified within 1e-10 * `scale`, vertices near the square's
    sides are snapped onto them, and zero-length edges are dropped.
    """
    tol = 1e-10 * scale
    polygons = [p for p in polygons if len(p) >= 3 and abs(signed_area(p)) > tol * scale]
    points = _snap_to_box(np.concatenate(polygons), tol)
    vertices, labels = merge_close_points(points, tol)

    loops: list[list[int]] = []
    offset = 0
    for polygon in polygons:
        raw = labels[offset : offset + len(polygon)].tolist()
        offset += len(polygon)
        loop = [v for i, v in enumerate(raw) if v != raw[i - 1]] if len(raw) > 1 else raw
        if len(loop) >= 2 and loop[0] == loop[-1]:
            loop = loop[:-1]
        if len(loop) < 3:
            continue
        if signed_area(vertices[loop]) < 0:
            loop = loop[::-1]
        loops.append(loop)

    if sliver_threshold > 0:
        loops = _merge_slivers(vertices, loops, sliver_threshold)

    used = np.unique(np.concatenate([np.asarray(loop) for loop in loops]))
    renumber = -np.ones(len(vertices), dtype=int)
    renumber[used] = np.arange(len(used))
    return build_mesh(vertices[used], [renumber[loop] for loop in loops])


def generate_hexagonal_mesh(n: int) -> PolygonalMesh:
    """Tile [0,1]^2 with regular pointy-top hexagons, `n` across, clipped at the boundary.

    Hexagon width (flat to flat) is 1/n so that vertical edges fall on x = 0 and x = 1;
    the bottom row is centered on y = 0.
    """
    if n < 2:
        raise ValueError(f"Hexagonal mesh needs n >= 2, got {n}")
    w = 1.0 / n
    r = w / math.sqrt(3.0)
    # vertex offsets in units of (w/2, r/2), counterclockwise from the upper-right vertex
    offsets = ((1, 1), (0, 2), (-1, 1), (-1, -1), (0, -2), (1, -1))
    polygons = []
    j = 0
    while 1.5 * r * j - r < 1.0:
        columns = range(n) if j % 2 == 0 else range(n + 1)
        for i in columns:
            cx2 = 2 * i + 1 if j % 2 == 0 else 2 * i  # center x in units of w/2
            cy2 = 3 * j  # center y in units of r/2
            hexagon = np.array(
                [((cx2 + dx) * (w / 2.0), (cy2 + dy) * (r / 2.0)) for dx, dy in offsets]
            )
            clipped = clip_to_unit_square(hexagon)
            if len(clipped) >= 3:
                polygons.append(clipped)
        j += 1
    mesh = mesh_from_polygons(polygons, scale=1.0, sliver_threshold=SLIVER_FACTOR * 2.0 * r)
    logger.info(f"Generated hexagonal mesh n={n}: {mesh.n_cells} cells, {mesh.n_edges} edges")
    return mesh


def _voronoi_polygons(seeds: np.ndarray) -> list[np.ndarray]:
    mirrored = np.concatenate(
        [
            seeds,
            np.column_stack([-seeds[:, 0], seeds[:, 1]]),
            np.column_stack([2.0 - seeds[:, 0], seeds[:, 1]]),
            np.column_stack([seeds[:, 0], -seeds[:, 1]]),
            np.column_stack([seeds[:, 0], 2.0 - seeds[:, 1]]),
        ]
    )
    vor = Voronoi(mirrored)
    polygons = []
    for i, seed in enumerate(seeds):
        region = vor.regions[vor.point_region[i]]
        if -1 in region or not region:
            raise MeshError(f"Voronoi cell of seed {i} is unbounded")
        polygon = vor.vertices[region]
        angles = np.arctan2(polygon[:, 1] - seed[1], polygon[:, 0] - seed[0])
        polygons.append(clip_to_unit_square(polygon[np.argsort(angles)]))
    return polygons


def generate_voronoi_mesh(
    seeds: Sequence[Point2] | np.ndarray | None = None,
    *,
    count: int | None = None,
    seed: int = 0,
    lloyd_iterations: int = 0,
) -> PolygonalMesh:
    """Voronoi diagram of `seeds` (or `count` uniform random seeds) clipped to [0,1]^2.

    Seeds are mirrored across the four sides so that every cell of an original seed is
    bounded and ends exactly on the boundary. Lloyd iterations move seeds to cell
    centroids, approximating a centroidal Voronoi tessellation.
    """
    if seeds is None:
        if count is None:
            raise ValueError("Either seeds or count must be given")
        points = np.random.default_rng(seed).random((count, 2))
    else:
        points = np.asarray(seeds, dtype=float).reshape(-1, 2)
    if len(points) < 4:
        raise ValueError(f"Voronoi mesh needs at least 4 seeds, got {len(points)}")
    if np.any(points < 0.0) or np.any(points > 1.0):
        raise ValueError("Seeds must lie inside the unit square")
    if len(cKDTree(points).query_pairs(1e-12)) > 0:
        raise MeshError("Degenerate seed configuration: duplicate seeds")

    for iteration in range(lloyd_iterations):
        polygons = _voronoi_polygons(points)
        points = np.array([polygon_centroid(p) for p in polygons])
        logger.debug(f"Lloyd iteration {iteration + 1}/{lloyd_iterations}")

    polygons = _voronoi_polygons(points)
    scale = float(np.sqrt(1.0 / len(points)))
    mesh = mesh_from_polygons(polygons, scale=scale)
    logger.info(
        f"Generated Voronoi mesh with {len(points)} seeds, {lloyd_iterations} Lloyd iterations: "
        f"{mesh.n_cells} cells, {mesh.n_edges} edges"
    )
    return mesh


def shrink_vertical_edges(mesh: PolygonalMesh, s: float) -> PolygonalMesh:
    """Shrink every interior vertical edge to `s` times its length about its midpoint.

    Only edges whose endpoints are both interior vertices are moved, so the domain and
    the boundary edges are untouched.
    """
    if not 0.0 < s <= 1.0:
        raise ValueError(f"Shrink factor must satisfy 0 < s <= 1, got {s}")
    if s == 1.0:
        return mesh
    lo, hi = mesh.vertices.min(axis=0), mesh.vertices.max(axis=0)
    tol = 1e-12 * float(np.max(hi - lo))
    on_boundary = np.any(
        (np.abs(mesh.vertices - lo) <= tol) | (np.abs(mesh.vertices - hi) <= tol), axis=1
    )
    vertices = mesh.vertices.copy()
    moved = np.zeros(len(vertices), dtype=bool)
    count = 0
    for e, (v0, v1) in enumerate(mesh.edges):
        d = mesh.vertices[v1] - mesh.vertices[v0]
        if abs(d[0]) > 1e-12 * mesh.edge_lengths[e] or mesh.edge_cells[e, 1] < 0:
            continue
        if on_boundary[v0] or on_boundary[v1]:
            continue
        if moved[v0] or moved[v1]:
            raise MeshError(f"Vertex of edge {e} belongs to two vertical edges")
        mid = 0.5 * (mesh.vertices[v0] + mesh.vertices[v1])
        vertices[v0] = mid + s * (mesh.vertices[v0] - mid)
        vertices[v1] = mid + s * (mesh.vertices[v1] - mid)
        moved[[v0, v1]] = True
        count += 1
    if count == 0:
        raise MeshError("Mesh has no interior vertical edges to shrink")
    logger.info(f"Shrinking {count} vertical edges by s={s:g}")
    try:
        return mesh.with_vertices(vertices)
    except MeshError as e:
        raise MeshError(f"Shrinking by s={s:g} produced an invalid mesh: {e}") from e


def single_cell_mesh(shape: str = "square") -> PolygonalMesh:
    """The unit square or the regular hexagon of unit diameter as a one-cell mesh."""
    match shape:
        case "square":
            polygon = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        case "hexagon":
            angles = np.pi / 6.0 + np.arange(6) * np.pi / 3.0
            polygon = 0.5 * np.column_stack([np.cos(angles), np.sin(angles)]) + 0.5
        case _:
            raise ValueError(f"Unknown cell shape {shape!r}; expected square or hexagon")
    return build_mesh(polygon, [np.arange(len(polygon))], box_boundary=False)
