from pathlib import Path

import numpy as np
import pytest

from polydg.basis.monomials import basis_dimension
from polydg.mesh.generators import generate_hexagonal_mesh, generate_voronoi_mesh
from polydg.mesh.model import BoundaryTag
from polydg.norms.errors import compute_errors
from polydg.problem import cosine_problem, polynomial_problem
from polydg.solver.driver import solve_problem
from polydg.solver.solution import read_coefficients, save_solution

QUADRATIC = [0.5, 1.0, -0.5, 2.0, -1.0, 0.7]


@pytest.mark.parametrize("t", [1, -1])
@pytest.mark.parametrize("k, kprime", [(2, 2), (3, 2)])
def test_patch_test_hexagons(k: int, kprime: int, t: int) -> None:
    """Quadratic solutions are reproduced to round-off."""
    mesh = generate_hexagonal_mesh(3)
    problem = polynomial_problem(QUADRATIC)
    outcome = solve_problem(mesh, problem, k=k, kprime=kprime, t=t)
    errors = compute_errors(outcome.solution, problem.exact, problem.exact_gradient)
    assert errors.e_u_1 <= 1e-9
    assert errors.e_u_0 <= 1e-9
    assert outcome.residual <= 1e-12
    assert outcome.system.is_symmetric


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_patch_test_degree_k(k: int) -> None:
    """Solutions in P_k are reproduced with k' = k under mixed boundary conditions."""
    mesh = generate_hexagonal_mesh(5)
    coefficients = np.random.default_rng(k).uniform(-1.0, 1.0, basis_dimension(k))
    problem = polynomial_problem(coefficients, center=(0.4, 0.55))
    outcome = solve_problem(mesh, problem, k=k)
    assert mesh.edges_with_tag(BoundaryTag.NEUMANN).size > 0
    errors = compute_errors(outcome.solution, problem.exact, problem.exact_gradient)
    assert errors.e_u_1 <= 1e-9


def test_patch_test_voronoi() -> None:
    """Voronoi cells pass the patch test as well."""
    mesh = generate_voronoi_mesh(count=24, seed=11, lloyd_iterations=10)
    problem = polynomial_problem(QUADRATIC, center=(0.3, 0.2), scale=0.5)
    outcome = solve_problem(mesh, problem, k=2)
    errors = compute_errors(outcome.solution, problem.exact, problem.exact_gradient)
    assert errors.e_u_1 <= 1e-9


def test_fluxes_glue_and_match_neumann_data() -> None:
    """Interior fluxes cancel; Neumann fluxes equal the projected data."""
    mesh = generate_hexagonal_mesh(3)
    problem = polynomial_problem(QUADRATIC)
    solution = solve_problem(mesh, problem, k=2).solution
    assert np.abs(solution.gluing_residual()).max() <= 1e-10
    for e in mesh.edges_with_tag(BoundaryTag.NEUMANN):
        left = mesh.edge_cells[e, 0]
        p0, p1 = mesh.vertices[mesh.edges[e]]
        midpoint = 0.5 * (p0 + p1)[None, :]
        flux = problem.neumann(midpoint, mesh.normals[e][None, :])[0]
        # constant mode of an edge-linear flux is its mean times sqrt(|e|)
        assert solution.edge_flux(left, e)[0] == pytest.approx(flux * np.sqrt(mesh.edge_lengths[e]), abs=1e-10)


def test_workers_do_not_change_the_result() -> None:
    """Threaded per-cell work gives the same coefficients."""
    mesh = generate_hexagonal_mesh(4)
    serial = solve_problem(mesh, cosine_problem(), k=1).solution
    threaded = solve_problem(mesh, cosine_problem(), k=1, workers=4).solution
    for a, b in zip(serial.u, threaded.u):
        np.testing.assert_array_equal(a, b)


def test_cosine_error_decreases() -> None:
    """Refining the hexagons reduces the H1 error of the oscillatory solution."""
    problem = cosine_problem()
    errors = [
        compute_errors(solve_problem(generate_hexagonal_mesh(n), problem, k=2).solution, problem.exact, problem.exact_gradient).e_u_1
        for n in (8, 16)
    ]
    assert errors[1] < 0.5 * errors[0]


@pytest.mark.parametrize("kwargs", [dict(k=0), dict(k=1, t=0.5), dict(k=2, kprime=-1)])
def test_invalid_parameters(kwargs: dict) -> None:
    """k >= 1, t = ±1 and k' >= 0 are enforced."""
    with pytest.raises(ValueError):
        solve_problem(generate_hexagonal_mesh(2), cosine_problem(), **kwargs)


def test_save_solution(tmp_path: Path) -> None:
    """Cell, flux and trace coefficients are written to sibling CSV files."""
    mesh = generate_hexagonal_mesh(2)
    solution = solve_problem(mesh, cosine_problem(), k=1).solution
    paths = save_solution(solution, tmp_path / "out" / "solution.csv")
    assert [p.name for p in paths] == ["solution.csv", "solution.flux.csv", "solution.trace.csv"]
    frame = read_coefficients(paths[0])
    assert list(frame.columns) == ["cell", "index", "value"]
    assert len(frame) == solution.dofs
    np.testing.assert_array_equal(frame["value"].to_numpy()[:3], solution.u[0])
    assert len(read_coefficients(paths[2])) == mesh.n_edges * 2
