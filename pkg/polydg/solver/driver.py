"""End-to-end solve: reference stabilizer, per-cell condensation, skeleton solve, recovery."""

from __future__ import annotations

import os
import time
from dataclasses import dataclass

import numpy as np
from loguru import logger

from polydg.assembly.hybrid import (
    CondensedElement,
    LocalSpaces,
    assemble_local_hybrid,
    static_condense,
)
from polydg.assembly.local import (
    assemble_boundary_coupling,
    assemble_volume_stiffness,
    cell_basis,
    load_vector,
)
from polydg.assembly.stabilization import assemble_stabilization
from polydg.mesh.model import PolygonalMesh
from polydg.mesh.subtriangulation import split_cell
from polydg.problem import PoissonProblem
from polydg.refstab.stabilizer import ReferenceStabilizer, get_reference_stabilizer
from polydg.solver.skeleton import SkeletonSpace, apply_neumann, build_skeleton_space
from polydg.solver.solution import DGSolution, reconstruct
from polydg.solver.system import SkeletonSystem, assemble_global, solve_global
from polydg.utils.logging import log_and_reraise, tlog
from polydg.utils.parallel import map_cells

__all__ = ["SolveOutcome", "condense_cell", "solve_problem"]


def condense_cell(
    mesh: PolygonalMesh,
    c: int,
    problem: PoissonProblem,
    stab: ReferenceStabilizer,
    *,
    k: int,
    alpha: float = 1.0,
    t: float = 1.0,
) -> CondensedElement:
    split = split_cell(mesh, c)
    basis = cell_basis(mesh, c, k)
    spaces = LocalSpaces(k=k, kprime=stab.kprime, n_edges=split.n_triangles)
    coupling, trace_mass = assemble_boundary_coupling(mesh, c, basis, stab.kprime)
    system = assemble_local_hybrid(
        spaces,
        assemble_volume_stiffness(split, basis),
        coupling,
        trace_mass,
        assemble_stabilization(split, basis, stab, problem.source),
        load_vector(split, basis, problem.source),
        alpha=alpha,
        t=t,
    )
    return static_condense(system)


@dataclass(frozen=True)
class SolveOutcome:
    solution: DGSolution
    skeleton: SkeletonSpace
    system: SkeletonSystem
    residual: float
    method: str
    seconds: float


@log_and_reraise
def solve_problem(
    mesh: PolygonalMesh,
    problem: PoissonProblem,
    *,
    k: int,
    kprime: int | None = None,
    alpha: float = 1.0,
    t: float = 1.0,
    delta: float | None = None,
    tol: float = 1e-12,
    workers: int = 1,
    cache_dir: os.PathLike | str | None = None,
) -> SolveOutcome:
    """Solve `problem` on `mesh` with cell degree k and flux/trace degree k' (default k)."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    kprime = k if kprime is None else kprime
    if kprime < 0:
        raise ValueError(f"k' must be non-negative, got {kprime}")
    if t not in (1, -1, 1.0, -1.0):
        raise ValueError(f"t must be 1 or -1, got {t}")
    started = time.perf_counter()
    with tlog.context(
        "solve", n_cells=mesh.n_cells, k=k, kprime=kprime, alpha=alpha, t=t, problem=problem.name
    ) as ctx:
        stab = get_reference_stabilizer(kprime, delta, cache_dir=cache_dir)
        elements = map_cells(
            lambda c: condense_cell(mesh, c, problem, stab, k=k, alpha=alpha, t=t),
            range(mesh.n_cells),
            workers=workers,
        )
        skeleton = build_skeleton_space(mesh, kprime, problem.dirichlet)
        system = assemble_global(elements, skeleton, apply_neumann(mesh, problem.neumann, kprime))
        result = solve_global(system, tol)
        solution = reconstruct(mesh, elements, skeleton, result.phi, k=k, workers=workers)
        seconds = time.perf_counter() - started
        gluing = solution.gluing_residual()
        ctx.update(
            free_dofs=skeleton.n_free,
            residual=result.residual,
            method=result.method,
            symmetric=system.is_symmetric,
            gluing=float(np.abs(gluing).max()) if gluing.size else 0.0,
        )
    logger.info(
        f"Solved {problem.name} on {mesh.n_cells} cells (k={k}, k'={kprime}): "
        f"{skeleton.n_free} trace DOFs, residual {result.residual:.2e} ({result.method}), {seconds:.2f}s"
    )
    return SolveOutcome(
        solution=solution,
        skeleton=skeleton,
        system=system,
        residual=result.residual,
        method=result.method,
        seconds=seconds,
    )
