"""Splitting of star-shaped cells into triangles with a common apex."""

from __future__ import annotations

import functools
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from polydg.errors import NonStarShapedCellError
from polydg.mesh.model import PolygonalMesh
from polydg.mesh.quality import chebyshev_center

__all__ = ["CellSplit", "SubTriangulation", "split_cell", "subtriangulate"]


@dataclass(frozen=True)
class CellSplit:
    """Triangles T_i = conv(e_i, x_K) of one cell.

    F_i(x^) = translations[i] + jacobians[i] @ x^ maps (0,0) -> loop[i], (1,0) -> loop[i+1]
    and (0,1) -> x_K, so the reference edge y^ = 0 lands on e_i.
    """

    cell: int
    center: np.ndarray
    jacobians: np.ndarray
    """Shape (N_K, 2, 2)."""
    translations: np.ndarray
    """Shape (N_K, 2)."""
    edges: np.ndarray
    """Global edge index of e_i."""
    edge_signs: np.ndarray
    """+1 where e_i runs from the global edge's v0 to v1."""

    @property
    def n_triangles(self) -> int:
        return len(self.edges)

    @functools.cached_property
    def areas(self) -> np.ndarray:
        return 0.5 * np.linalg.det(self.jacobians)

    def triangle(self, i: int) -> np.ndarray:
        """Vertices (a, b, x_K) of T_i."""
        a = self.translations[i]
        return np.array([a, a + self.jacobians[i][:, 0], a + self.jacobians[i][:, 1]])

    def map_points(self, i: int, reference_points: np.ndarray) -> np.ndarray:
        return self.translations[i][None, :] + reference_points @ self.jacobians[i].T


@dataclass(frozen=True)
class SubTriangulation:
    cells: tuple[CellSplit, ...]

    def __getitem__(self, c: int) -> CellSplit:
        return self.cells[c]

    def __len__(self) -> int:
        return len(self.cells)


def split_cell(mesh: PolygonalMesh, c: int, center: np.ndarray | None = None) -> CellSplit:
    polygon = mesh.cell_polygon(c)
    if center is None:
        center = chebyshev_center(polygon).center
    a = polygon
    b = np.roll(polygon, -1, axis=0)
    jacobians = np.stack([np.column_stack([bi - ai, center - ai]) for ai, bi in zip(a, b)])
    split = CellSplit(
        cell=c,
        center=np.asarray(center, dtype=float),
        jacobians=jacobians,
        translations=a.copy(),
        edges=mesh.cell_edges[c],
        edge_signs=mesh.cell_edge_signs[c],
    )
    areas = split.areas
    if np.any(areas <= 0.0):
        raise NonStarShapedCellError(c, float(areas.min()))
    return split


def subtriangulate(mesh: PolygonalMesh, cells: Sequence[int] | None = None) -> SubTriangulation:
    """Split every cell about its Chebyshev center."""
    indices = range(mesh.n_cells) if cells is None else cells
    return SubTriangulation(tuple(split_cell(mesh, c) for c in indices))
