"""Shared builders for the polydg tests."""

import numpy as np

from polydg.assembly.hybrid import LocalHybridSystem, LocalSpaces, assemble_local_hybrid
from polydg.assembly.local import (
    assemble_boundary_coupling,
    assemble_volume_stiffness,
    cell_basis,
    load_vector,
)
from polydg.assembly.stabilization import assemble_stabilization
from polydg.mesh.model import PolygonalMesh, build_mesh
from polydg.mesh.subtriangulation import split_cell
from polydg.problem import PoissonProblem
from polydg.refstab.stabilizer import get_reference_stabilizer
from polydg.solver.skeleton import project_on_edges


def square_grid(n: int) -> PolygonalMesh:
    """n x n squares on the unit square."""
    x = np.linspace(0.0, 1.0, n + 1)
    vertices = np.array([(xi, yj) for yj in x for xi in x])
    cells = [
        [j * (n + 1) + i, j * (n + 1) + i + 1, (j + 1) * (n + 1) + i + 1, (j + 1) * (n + 1) + i]
        for j in range(n)
        for i in range(n)
    ]
    return build_mesh(vertices, cells)


def local_system(
    mesh: PolygonalMesh, c: int, problem: PoissonProblem, k: int, kprime: int, *, alpha: float = 1.0, t: float = 1.0
) -> LocalHybridSystem:
    split = split_cell(mesh, c)
    basis = cell_basis(mesh, c, k)
    stab = get_reference_stabilizer(kprime)
    coupling, mass = assemble_boundary_coupling(mesh, c, basis, kprime)
    return assemble_local_hybrid(
        LocalSpaces(k=k, kprime=kprime, n_edges=split.n_triangles),
        assemble_volume_stiffness(split, basis),
        coupling,
        mass,
        assemble_stabilization(split, basis, stab, problem.source),
        load_vector(split, basis, problem.source),
        alpha=alpha,
        t=t,
    )


def exact_local_state(
    mesh: PolygonalMesh, c: int, problem: PoissonProblem, k: int, kprime: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cell coefficients of u*, its outward flux and its trace, for polynomial u* of degree <= k."""
    basis = cell_basis(mesh, c, k)
    # least squares on points of the cell recovers u* exactly in the scaled monomials
    points = mesh.cell_centroids[c] + 0.2 * mesh.cell_diameters[c] * (
        np.random.default_rng(0).random((4 * basis.dimension, 2)) - 0.5
    )
    u, *_ = np.linalg.lstsq(basis.values(points), problem.exact(points), rcond=None)
    edges = mesh.cell_edges[c]
    outward = np.where(mesh.edge_cells[edges, 0] == c, 1.0, -1.0)
    flux = project_on_edges(mesh, edges, kprime, problem.neumann).values * outward[:, None]
    trace = project_on_edges(mesh, edges, kprime, lambda p, _: problem.exact(p)).values
    return u, flux.ravel(), trace.ravel()


# An h-convergence series with its rates against dofs
DOFS = [7500, 15000, 30000, 60000, 120000, 240000]
ERRORS = [2.616061e-01, 1.866574e-01, 1.300656e-01, 9.189962e-02, 6.488821e-02, 4.594882e-02]
RATES = [0.974007, 1.042306, 1.002218, 1.004205, 0.995857]
