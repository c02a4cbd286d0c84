import numpy as np
import pytest

from polydg.errors import MeshError
from polydg.mesh.model import BoundaryTag, PolygonalMesh, build_mesh, signed_area


def test_grid_skeleton(grid2: PolygonalMesh) -> None:
    """A 2x2 grid has 12 edges, 4 of them interior."""
    assert grid2.n_cells == 4
    assert grid2.n_edges == 12
    assert len(grid2.boundary_edges) == 8
    assert grid2.cell_areas.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(grid2.cell_diameters, np.sqrt(2.0) / 2.0)


def test_normals_point_out_of_left_cell(grid2: PolygonalMesh) -> None:
    """Each edge normal points away from the centroid of its left cell."""
    for e in range(grid2.n_edges):
        midpoint = grid2.vertices[grid2.edges[e]].mean(axis=0)
        left = grid2.edge_cells[e, 0]
        assert np.dot(grid2.normals[e], midpoint - grid2.cell_centroids[left]) > 0.0


def test_cell_edge_signs_consistent(grid2: PolygonalMesh) -> None:
    """Loop edge i runs from loop[i] to loop[i+1], matching the recorded sign."""
    for c, loop in enumerate(grid2.cells):
        for i, (e, sign) in enumerate(zip(grid2.cell_edges[c], grid2.cell_edge_signs[c])):
            v0, v1 = grid2.edges[e]
            a, b = loop[i], loop[(i + 1) % len(loop)]
            assert (a, b) == ((v0, v1) if sign > 0 else (v1, v0))


def test_default_tags_top_is_neumann(grid2: PolygonalMesh) -> None:
    """Edges on y = 1 are Neumann, the rest of the boundary Dirichlet."""
    neumann = grid2.edges_with_tag(BoundaryTag.NEUMANN)
    assert len(neumann) == 2
    assert np.all(grid2.vertices[grid2.edges[neumann]][..., 1] == 1.0)
    assert len(grid2.edges_with_tag(BoundaryTag.DIRICHLET)) == 6
    assert len(grid2.edges_with_tag(BoundaryTag.INTERIOR)) == 4


def test_explicit_boundary_tags() -> None:
    """Tags given per vertex pair override the default predicate."""
    vertices = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    mesh = build_mesh(vertices, [[0, 1, 2, 3]], boundary_tags={(0, 1): BoundaryTag.NEUMANN})
    assert len(mesh.edges_with_tag(BoundaryTag.NEUMANN)) == 2


def test_interior_tag_on_boundary_edge_rejected() -> None:
    """Boundary edges only take dirichlet or neumann tags."""
    vertices = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(MeshError, match="expected dirichlet or neumann"):
        build_mesh(vertices, [[0, 1, 2, 3]], boundary_tags={(0, 1): BoundaryTag.INTERIOR})


def test_signed_area_orientation() -> None:
    """Counterclockwise loops have positive area."""
    square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    assert signed_area(square) == pytest.approx(1.0)
    assert signed_area(square[::-1]) == pytest.approx(-1.0)


@pytest.mark.parametrize(
    "cells, match",
    [
        ([[0, 3, 2, 1]], "orientation"),
        ([[0, 1]], "simple polygon"),
        ([[0, 1, 2, 7]], "unknown vertex"),
        ([[0, 2, 1, 3]], "orientation|simple"),
    ],
)
def test_invalid_cells(cells: list[list[int]], match: str) -> None:
    """Malformed cell loops raise MeshError."""
    vertices = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(MeshError, match=match):
        build_mesh(vertices, cells)


def test_dangling_edge() -> None:
    """A cell edge inside the box that no other cell uses is rejected."""
    vertices = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]])
    with pytest.raises(MeshError, match="Dangling"):
        build_mesh(vertices, [[0, 1, 4], [1, 2, 4], [2, 3, 4]])


def test_non_finite_vertex() -> None:
    """NaN coordinates are rejected."""
    with pytest.raises(MeshError):
        build_mesh(np.array([[0.0, 0.0], [1.0, 0.0], [np.nan, 1.0]]), [[0, 1, 2]])
