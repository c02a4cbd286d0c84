import math

import numpy as np
import pytest

from polydg.mesh.generators import generate_voronoi_mesh, single_cell_mesh
from polydg.mesh.subtriangulation import split_cell
from polydg.norms.dual import (
    build_probe,
    dual_seminorm,
    edge_functional,
    gradient_functional,
    source_functional,
    stabilizer_spectral_bounds,
)


@pytest.fixture(scope="module")
def square_probe():
    return build_probe(split_cell(single_cell_mesh("square"), 0))


def test_probe_mesh(square_probe) -> None:
    """Sub-triangle meshes are merged into one conforming P1 mesh."""
    n = square_probe.subdivisions
    # four sub-triangles share their legs and apex
    assert square_probe.n_nodes == 4 * (n + 1) * (n + 2) // 2 - 4 * (n + 1) + 1
    assert square_probe.moments.sum() == pytest.approx(1.0)
    assert square_probe.trace_nodes.shape == (4, n + 1)


def test_dual_norm_of_linear_gradient(square_probe) -> None:
    """|Du|_{-1,K} = |u|_{1,K} when u lies in the probe space."""
    estimate = dual_seminorm(square_probe, gradient_functional(lambda p: np.tile([1.0, 0.0], (len(p), 1)), 0))
    assert estimate.value == pytest.approx(1.0, rel=1e-10)
    assert estimate.coarse == pytest.approx(1.0, rel=1e-10)
    assert estimate.extrapolated == pytest.approx(1.0, rel=1e-10)


def test_dual_norm_bounded_by_seminorm(square_probe) -> None:
    """|Du|_{-1,K} <= |u|_{1,K} for u = x^2 + xy."""
    estimate = dual_seminorm(
        square_probe, gradient_functional(lambda p: np.column_stack([2 * p[:, 0] + p[:, 1], p[:, 0]]), 2)
    )
    # |u|_1^2 = int (2x + y)^2 + x^2 over the unit square
    seminorm = math.sqrt(4.0 / 3.0 + 1.0 + 1.0 / 3.0 + 1.0 / 3.0)
    assert estimate.value <= seminorm * (1.0 + 1e-12)
    assert estimate.value == pytest.approx(seminorm, rel=1e-2)


def test_constants_are_invisible(square_probe) -> None:
    """The mean-value constraint removes the constant load."""
    estimate = dual_seminorm(square_probe, source_functional(lambda p: np.ones(len(p)), 0))
    assert estimate.value == pytest.approx(0.0, abs=1e-10)


def test_edge_functional_of_harmonic_flux() -> None:
    """For harmonic u = x, the boundary flux functional equals Du."""
    mesh = single_cell_mesh("hexagon")
    probe = build_probe(split_cell(mesh, 0), 4)
    edges = mesh.cell_edges[0]
    coefficients = mesh.normals[edges][:, 0] * np.sqrt(mesh.edge_lengths[edges])
    estimate = dual_seminorm(probe, edge_functional(coefficients, 0))
    assert estimate.value == pytest.approx(math.sqrt(mesh.cell_areas[0]), rel=1e-10)


def test_probe_needs_subdivisions() -> None:
    """At least one subdivision per sub-triangle."""
    split = split_cell(single_cell_mesh("square"), 0)
    with pytest.raises(ValueError):
        build_probe(split, 0)
    assert build_probe(split, 1).coarsened() is None


@pytest.mark.parametrize("shape", ["square", "hexagon"])
@pytest.mark.parametrize("kprime", [0, 1, 2, 3])
def test_spectral_bounds(shape: str, kprime: int) -> None:
    """s_K is equivalent to the dual seminorm with constants of moderate size."""
    bounds = stabilizer_spectral_bounds(single_cell_mesh(shape), 0, kprime)
    n_edges = 4 if shape == "square" else 6
    assert bounds.dimension == n_edges * (kprime + 1) - 1
    assert bounds.M <= 1.05
    assert bounds.rho * math.log(kprime + 2) >= 1e-2
    assert bounds.rho <= bounds.M


@pytest.mark.slow
@pytest.mark.parametrize("kprime", [4, 6, 8])
def test_spectral_bounds_high_degree(kprime: int) -> None:
    """On the unit square the lower bound decays at most like 1/log(k')."""
    bounds = stabilizer_spectral_bounds(single_cell_mesh("square"), 0, kprime)
    assert bounds.M <= 1.05
    assert bounds.rho * math.log(kprime + 2) >= 1e-2


def test_spectral_bounds_on_voronoi_cell() -> None:
    """The bounds also hold on an irregular cell."""
    mesh = generate_voronoi_mesh(count=12, seed=9, lloyd_iterations=5)
    bounds = stabilizer_spectral_bounds(mesh, 4, 1)
    assert 0.0 < bounds.rho <= bounds.M <= 1.05
