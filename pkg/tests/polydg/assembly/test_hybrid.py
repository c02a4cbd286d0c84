import numpy as np
import pytest

from polydg.assembly.hybrid import LocalSpaces, static_condense
from polydg.errors import SingularLocalSystemError
from polydg.mesh.generators import generate_hexagonal_mesh, generate_voronoi_mesh, single_cell_mesh
from polydg.problem import cosine_problem, polynomial_problem

from tests.polydg.helpers import exact_local_state, local_system

# u* = 1 + x - 2y + 0.5x^2 + xy - y^2 + 0.3x^3 - 0.2y^3 in scaled monomials about (0.4, 0.6)
CUBIC = [1.0, 1.0, -2.0, 0.5, 1.0, -1.0, 0.3, 0.0, 0.0, -0.2]


def test_local_spaces() -> None:
    """Dimensions of the local unknowns."""
    spaces = LocalSpaces(k=3, kprime=2, n_edges=5)
    assert (spaces.n_u, spaces.n_lambda, spaces.n_w, spaces.size) == (10, 15, 15, 25)


@pytest.mark.parametrize("t", [1.0, -1.0])
@pytest.mark.parametrize("alpha", [0.0, 1.0, 10.0])
def test_exact_polynomial_satisfies_local_system(alpha: float, t: float) -> None:
    """The hybrid formulation is consistent: exact data leave no residual."""
    mesh = generate_voronoi_mesh(count=20, seed=5, lloyd_iterations=20)
    problem = polynomial_problem(CUBIC, center=(0.4, 0.6))
    c = 7
    system = local_system(mesh, c, problem, 3, 3, alpha=alpha, t=t)
    u, lam, phi = exact_local_state(mesh, c, problem, 3, 3)
    residual = system.residual(u, lam, phi)
    scale = np.abs(system.matrix).max() * max(np.abs(u).max(), np.abs(lam).max())
    assert np.abs(residual).max() <= 1e-10 * scale


def test_condensation_recovers_exact_state() -> None:
    """Recovery from the exact trace returns the exact cell solution and flux."""
    mesh = single_cell_mesh("hexagon")
    problem = polynomial_problem(CUBIC[:6])
    system = local_system(mesh, 0, problem, 2, 2)
    element = static_condense(system)
    u_exact, lam_exact, phi = exact_local_state(mesh, 0, problem, 2, 2)
    u, lam = element.recover(phi)
    np.testing.assert_allclose(u, u_exact, atol=1e-9)
    np.testing.assert_allclose(lam, lam_exact, atol=1e-9)
    np.testing.assert_allclose(element.schur @ phi - element.load, lam, atol=1e-12)


def test_condensation_solves_local_system() -> None:
    """offset + response @ phi solves K x = rhs + coupling @ phi for any trace."""
    mesh = generate_hexagonal_mesh(4)
    system = local_system(mesh, 6, cosine_problem(), 2, 1)
    element = static_condense(system)
    phi = np.random.default_rng(0).standard_normal(system.spaces.n_phi)
    u, lam = element.recover(phi)
    residual = system.residual(u, lam, phi)
    assert np.linalg.norm(residual) <= 1e-11 * np.linalg.norm(system.matrix) * np.linalg.norm(np.concatenate([u, lam]))


def test_negative_alpha() -> None:
    """alpha must be non-negative."""
    mesh = single_cell_mesh("square")
    with pytest.raises(ValueError, match="alpha"):
        local_system(mesh, 0, cosine_problem(), 1, 1, alpha=-1.0)


def test_singular_local_system() -> None:
    """A zero matrix cannot be condensed."""
    mesh = single_cell_mesh("square")
    system = local_system(mesh, 0, cosine_problem(), 1, 1)
    broken = type(system)(
        cell=system.cell,
        spaces=system.spaces,
        matrix=np.zeros_like(system.matrix),
        rhs=system.rhs,
        coupling=system.coupling,
    )
    with pytest.raises(SingularLocalSystemError, match="Cell 0"):
        static_condense(broken)
