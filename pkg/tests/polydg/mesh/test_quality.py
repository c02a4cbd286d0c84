import math

import numpy as np
import pytest

from polydg.errors import NonStarShapedCellError
from polydg.mesh.generators import generate_hexagonal_mesh, generate_voronoi_mesh
from polydg.mesh.model import PolygonalMesh, build_mesh
from polydg.mesh.quality import chebyshev_center, is_convex, quality_report
from polydg.mesh.subtriangulation import split_cell, subtriangulate
from polydg.utils import parse_key_values


def test_chebyshev_center_square() -> None:
    """The unit square's largest inscribed disk has radius 1/2."""
    center = chebyshev_center(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
    np.testing.assert_allclose(center.center, [0.5, 0.5], atol=1e-12)
    assert center.radius == pytest.approx(0.5)
    assert not center.approximate


def test_chebyshev_center_many_edges() -> None:
    """Polygons with many edges go through the linear program."""
    angles = 2.0 * np.pi * np.arange(24) / 24
    polygon = np.column_stack([np.cos(angles), np.sin(angles)])
    center = chebyshev_center(polygon)
    np.testing.assert_allclose(center.center, [0.0, 0.0], atol=1e-9)
    assert center.radius == pytest.approx(math.cos(np.pi / 24), rel=1e-9)


def test_chebyshev_center_nonconvex_is_approximate() -> None:
    """L-shaped polygons get a sampled center strictly inside."""
    polygon = np.array([[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]])
    assert not is_convex(polygon)
    center = chebyshev_center(polygon)
    assert center.approximate
    assert 0.0 < center.radius <= 0.59


def test_quality_report_grid(grid2: PolygonalMesh) -> None:
    """Shape constants of the 2x2 square grid."""
    report = quality_report(grid2)
    assert (report.N_p, report.N_e) == (4, 12)
    assert report.h == pytest.approx(math.sqrt(2.0) / 2.0)
    assert report.gamma0 == pytest.approx(2.0 * math.sqrt(2.0))
    assert report.gamma1 == pytest.approx(math.sqrt(2.0))
    assert report.min_edge == pytest.approx(0.5)
    assert math.isnan(report.gamma0_interior)


def test_quality_report_key_values() -> None:
    """The report prints as parseable key=value lines."""
    report = quality_report(generate_hexagonal_mesh(4))
    values = parse_key_values(report.to_key_values())
    assert int(values["N_p"]) == report.N_p
    assert float(values["gamma0"]) == report.gamma0
    assert float(values["gamma0_interior"]) < float(values["gamma0"]) + 1e-12


def test_subtriangulation_covers_cells() -> None:
    """Sub-triangles of each cell cover it and map the reference edge onto e_i."""
    mesh = generate_hexagonal_mesh(4)
    splits = subtriangulate(mesh)
    assert len(splits) == mesh.n_cells
    for c, split in enumerate(splits.cells):
        assert split.areas.sum() == pytest.approx(mesh.cell_areas[c], rel=1e-12)
        polygon = mesh.cell_polygon(c)
        for i in range(split.n_triangles):
            a, b, apex = split.triangle(i)
            np.testing.assert_allclose(a, polygon[i])
            np.testing.assert_allclose(b, polygon[(i + 1) % len(polygon)])
            np.testing.assert_allclose(apex, split.center)


def test_split_cell_rejects_outside_center(grid2: PolygonalMesh) -> None:
    """A center outside the kernel gives a non-positive sub-triangle."""
    with pytest.raises(NonStarShapedCellError) as info:
        split_cell(grid2, 0, center=np.array([2.0, 0.25]))
    assert info.value.cell == 0


@pytest.mark.parametrize("angle", [0.3, 2.0])
def test_quality_report_rigid_motion_invariant(angle: float) -> None:
    """Rotating and translating a mesh leaves its quality report unchanged."""
    mesh = generate_voronoi_mesh(count=24, seed=2, lloyd_iterations=5)
    rotation = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    moved = build_mesh(
        mesh.vertices @ rotation.T + np.array([3.0, -1.5]),
        mesh.cells,
        boundary_tags=mesh.boundary_tag_map(),
        box_boundary=False,
    )
    before, after = quality_report(mesh), quality_report(moved)
    assert (after.N_p, after.N_e, after.approximate) == (before.N_p, before.N_e, before.approximate)
    for field in ("h", "h_min", "gamma0", "gamma1", "gamma0_interior", "min_edge"):
        assert getattr(after, field) == pytest.approx(getattr(before, field), rel=1e-12)
