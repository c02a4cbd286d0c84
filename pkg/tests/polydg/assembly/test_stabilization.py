import numpy as np
import pytest
from pytest_mock import MockerFixture

from polydg.assembly.local import cell_basis
from polydg.assembly.stabilization import assemble_stabilization, stabilization_form
from polydg.basis.monomials import basis_dimension
from polydg.errors import SingularStabilizerError
from polydg.mesh.generators import generate_voronoi_mesh, single_cell_mesh
from polydg.mesh.subtriangulation import split_cell
from polydg.refstab.stabilizer import build_reference_stabilizer, get_reference_stabilizer


@pytest.fixture(scope="module")
def blocks():
    mesh = generate_voronoi_mesh(count=16, seed=4, lloyd_iterations=10)
    return assemble_stabilization(split_cell(mesh, 2), cell_basis(mesh, 2, 2), get_reference_stabilizer(2))


def test_blocks_shapes(blocks) -> None:
    """One k'+1 block per sub-triangle."""
    n = blocks.n_triangles
    assert blocks.stiffness.shape == (n, 3, 3)
    assert blocks.volume.shape == (n, 3, basis_dimension(2))
    assert blocks.trace_matrix().shape == (3 * n, 3 * n)
    np.testing.assert_allclose(blocks.stiffness @ blocks.inverses, np.broadcast_to(np.eye(3), (n, 3, 3)), atol=1e-9)


def test_stabilization_symmetric_and_nonnegative(blocks) -> None:
    """For t = 1, s_K is a symmetric non-negative form."""
    rng = np.random.default_rng(1)
    n_u, n_lambda = basis_dimension(2), 3 * blocks.n_triangles
    u, v = rng.standard_normal((2, n_u))
    lam, mu = rng.standard_normal((2, n_lambda))
    forward = stabilization_form(blocks, u, lam, v, mu)
    backward = stabilization_form(blocks, v, mu, u, lam)
    assert forward == pytest.approx(backward, rel=1e-10)
    assert stabilization_form(blocks, u, lam, u, lam) >= 0.0


def test_stabilization_is_linear(blocks) -> None:
    """s_K is linear in its first argument."""
    rng = np.random.default_rng(2)
    n_u, n_lambda = basis_dimension(2), 3 * blocks.n_triangles
    u1, u2, v = rng.standard_normal((3, n_u))
    l1, l2, mu = rng.standard_normal((3, n_lambda))
    combined = stabilization_form(blocks, 2.0 * u1 - u2, 2.0 * l1 - l2, v, mu)
    separate = 2.0 * stabilization_form(blocks, u1, l1, v, mu) - stabilization_form(blocks, u2, l2, v, mu)
    assert combined == pytest.approx(separate, rel=1e-10, abs=1e-12)


def test_skew_sign_changes_test_side(blocks) -> None:
    """t = -1 negates only the Dv part of the test function."""
    rng = np.random.default_rng(3)
    u, v = rng.standard_normal((2, basis_dimension(2)))
    lam = rng.standard_normal(3 * blocks.n_triangles)
    zero = np.zeros_like(lam)
    assert stabilization_form(blocks, u, lam, v, zero, t=-1.0) == pytest.approx(
        -stabilization_form(blocks, u, lam, v, zero), rel=1e-12
    )


def test_rank_deficient_blocks_use_pseudo_inverse() -> None:
    """Coarse reference meshes still give finite blocks."""
    mesh = single_cell_mesh("square")
    stab = build_reference_stabilizer(2, 0.5)
    blocks = assemble_stabilization(split_cell(mesh, 0), cell_basis(mesh, 0, 2), stab)
    assert np.all(np.isfinite(blocks.inverses))
    s = blocks.stiffness[0]
    np.testing.assert_allclose(s @ blocks.inverses[0] @ s, s, atol=1e-10 * np.abs(s).max())


def test_singular_block_reports_cell(mocker: MockerFixture) -> None:
    """A failed Cholesky factorization names the cell."""
    mesh = single_cell_mesh("square")
    mocker.patch("polydg.assembly.stabilization.sla.cho_factor", side_effect=np.linalg.LinAlgError("not pd"))
    with pytest.raises(SingularStabilizerError, match="Cell 0"):
        assemble_stabilization(split_cell(mesh, 0), cell_basis(mesh, 0, 1), get_reference_stabilizer(1))


def test_stabilization_cauchy_schwarz(blocks) -> None:
    """|s_K(F, G)| <= s_K(F, F)^1/2 s_K(G, G)^1/2 on random inputs."""
    rng = np.random.default_rng(4)
    n_u, n_lambda = basis_dimension(2), 3 * blocks.n_triangles
    for _ in range(100):
        u, v = rng.standard_normal((2, n_u))
        lam, mu = rng.standard_normal((2, n_lambda))
        bound = np.sqrt(stabilization_form(blocks, u, lam, u, lam) * stabilization_form(blocks, v, mu, v, mu))
        assert abs(stabilization_form(blocks, u, lam, v, mu)) <= bound * (1.0 + 1e-12) + 1e-12
