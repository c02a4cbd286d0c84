import numpy as np
import pytest

from polydg.errors import MeshError
from polydg.mesh.generators import (
    generate_hexagonal_mesh,
    generate_voronoi_mesh,
    merge_close_points,
    shrink_vertical_edges,
    single_cell_mesh,
)
from polydg.mesh.model import BoundaryTag
from polydg.mesh.quality import quality_report


@pytest.mark.parametrize("n", [2, 4, 8])
def test_hexagonal_mesh_covers_square(n: int) -> None:
    """Hexagonal cells tile the unit square."""
    mesh = generate_hexagonal_mesh(n)
    assert mesh.cell_areas.sum() == pytest.approx(1.0, rel=1e-12)
    assert np.all(mesh.cell_areas > 0.0)
    assert mesh.vertices.min() >= 0.0 and mesh.vertices.max() <= 1.0


def test_hexagonal_mesh_rejects_small_n() -> None:
    """At least two hexagons are needed across."""
    with pytest.raises(ValueError):
        generate_hexagonal_mesh(1)


@pytest.mark.parametrize("lloyd_iterations", [0, 5])
def test_voronoi_mesh(lloyd_iterations: int) -> None:
    """Voronoi cells tile the square, one per seed."""
    mesh = generate_voronoi_mesh(count=32, seed=3, lloyd_iterations=lloyd_iterations)
    assert mesh.n_cells == 32
    assert mesh.cell_areas.sum() == pytest.approx(1.0, rel=1e-10)
    assert len(mesh.edges_with_tag(BoundaryTag.NEUMANN)) > 0


def test_voronoi_mesh_is_deterministic() -> None:
    """The same seed gives the same mesh."""
    a = generate_voronoi_mesh(count=16, seed=7)
    b = generate_voronoi_mesh(count=16, seed=7)
    np.testing.assert_array_equal(a.vertices, b.vertices)


def test_lloyd_improves_shape_regularity() -> None:
    """Centroidal iterations reduce the worst diameter-to-inradius ratio."""
    raw = quality_report(generate_voronoi_mesh(count=64, seed=1))
    cvt = quality_report(generate_voronoi_mesh(count=64, seed=1, lloyd_iterations=30))
    assert cvt.gamma0 < raw.gamma0


def test_voronoi_duplicate_seeds() -> None:
    """Coincident seeds are a degenerate configuration."""
    seeds = np.array([[0.2, 0.2], [0.2, 0.2], [0.8, 0.8], [0.3, 0.7], [0.7, 0.3]])
    with pytest.raises(MeshError, match="duplicate"):
        generate_voronoi_mesh(seeds)


def test_voronoi_seed_outside() -> None:
    """Seeds must lie in the unit square."""
    with pytest.raises(ValueError):
        generate_voronoi_mesh(np.array([[0.1, 0.1], [0.9, 0.1], [0.5, 0.9], [1.5, 0.5]]))


@pytest.mark.parametrize("s", [0.5, 2.0**-8])
def test_shrink_vertical_edges(s: float) -> None:
    """Interior vertical edges shrink by s; area and boundary are unchanged."""
    mesh = generate_hexagonal_mesh(4)
    shrunk = shrink_vertical_edges(mesh, s)
    assert shrunk.cell_areas.sum() == pytest.approx(1.0, rel=1e-12)
    assert shrunk.n_edges == mesh.n_edges
    d = mesh.vertices[mesh.edges[:, 1]] - mesh.vertices[mesh.edges[:, 0]]
    on_box = np.any((mesh.vertices < 1e-12) | (mesh.vertices > 1.0 - 1e-12), axis=1)
    vertical = (np.abs(d[:, 0]) < 1e-12) & ~on_box[mesh.edges].any(axis=1)
    assert vertical.any()
    np.testing.assert_allclose(shrunk.edge_lengths[vertical], s * mesh.edge_lengths[vertical], rtol=1e-9)
    np.testing.assert_array_equal(
        shrunk.vertices[shrunk.edges[shrunk.boundary_edges]], mesh.vertices[mesh.edges[mesh.boundary_edges]]
    )


def test_shrink_identity_and_bounds() -> None:
    """s = 1 is the identity; s outside (0, 1] is rejected."""
    mesh = generate_hexagonal_mesh(4)
    assert shrink_vertical_edges(mesh, 1.0) is mesh
    with pytest.raises(ValueError):
        shrink_vertical_edges(mesh, 0.0)


def test_shrink_without_vertical_edges() -> None:
    """A mesh with no interior vertical edge cannot be shrunk."""
    with pytest.raises(MeshError, match="no interior vertical edges"):
        shrink_vertical_edges(single_cell_mesh("square"), 0.5)


def test_merge_close_points() -> None:
    """Points within the tolerance share one label; numbering follows input order."""
    points = np.array([[0.0, 0.0], [1.0, 0.0], [1e-14, 0.0], [1.0, 1e-14], [2.0, 0.0]])
    unique, labels = merge_close_points(points, 1e-12)
    assert len(unique) == 3
    np.testing.assert_array_equal(labels, [0, 1, 0, 1, 2])


@pytest.mark.parametrize("shape, n_edges", [("square", 4), ("hexagon", 6)])
def test_single_cell_mesh(shape: str, n_edges: int) -> None:
    """Single-cell meshes for the local diagnostics."""
    mesh = single_cell_mesh(shape)
    assert mesh.n_cells == 1
    assert mesh.n_edges == n_edges
    assert mesh.cell_diameters[0] == pytest.approx(np.sqrt(2.0) if shape == "square" else 1.0)
