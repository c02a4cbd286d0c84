"""Relative broken H1 / L2 errors and estimated convergence rates."""

from __future__ import annotations

import functools
import math
from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel, Field

from polydg.basis.quadrature import QuadratureRule, triangle_rule
from polydg.mesh.subtriangulation import split_cell
from polydg.problem import ScalarField, VectorField
from polydg.solver.solution import DGSolution
from polydg.utils.parallel import map_cells

__all__ = ["ErrorReport", "compute_errors", "estimated_convergence_rate"]


class ErrorReport(BaseModel):
    e_u_1: float = Field(description="Relative broken H1 error (L2 part included)")
    e_u_0: float = Field(description="Relative L2 error")
    dofs: int = Field(description="dim V_h")
    h: float = Field(description="Mesh size (maximum cell diameter)")
    k: int
    kprime: int
    seminorm: float = Field(description="Relative broken H1 seminorm error")


@functools.cache
def _refined_rule(degree: int) -> QuadratureRule:
    """`triangle_rule(degree)` repeated on the four midpoint children of the reference triangle."""
    rule = triangle_rule(degree)
    children = [
        (np.array([0.0, 0.0]), np.eye(2) * 0.5),
        (np.array([0.5, 0.0]), np.eye(2) * 0.5),
        (np.array([0.0, 0.5]), np.eye(2) * 0.5),
        (np.array([0.5, 0.5]), -np.eye(2) * 0.5),
    ]
    points = np.vstack([a + rule.points @ j.T for a, j in children])
    weights = np.concatenate([0.25 * rule.weights] * 4)
    return QuadratureRule(points, weights, degree)


def _cell_integrals(
    solution: DGSolution,
    c: int,
    exact: ScalarField,
    gradient: VectorField,
    wavenumber: float,
) -> np.ndarray:
    """[|e|_0^2, |∇e|_0^2, |u|_0^2, |∇u|_0^2] on cell c."""
    split = split_cell(solution.mesh, c)
    degree = 2 * solution.k + 6
    if solution.mesh.cell_diameters[c] * wavenumber > 2.0:
        rule = _refined_rule(degree)
    else:
        rule = triangle_rule(degree)
    points = split.translations[:, None, :] + np.einsum("qd,ned->nqe", rule.points, split.jacobians)
    points = points.reshape(-1, 2)
    weights = (2.0 * split.areas[:, None] * rule.weights[None, :]).ravel()
    uh, grad_uh = solution.evaluate(c, points)
    u, grad_u = exact(points), gradient(points)
    return np.array(
        [
            weights @ (u - uh) ** 2,
            weights @ ((grad_u - grad_uh) ** 2).sum(axis=1),
            weights @ u**2,
            weights @ (grad_u**2).sum(axis=1),
        ]
    )


def compute_errors(
    solution: DGSolution,
    exact: ScalarField,
    gradient: VectorField,
    *,
    wavenumber: float = 8.0 * math.pi,
    workers: int = 1,
) -> ErrorReport:
    """Relative errors of u_h against u, integrated with a degree 2k+6 rule per sub-triangle.

    Sub-triangles of cells with h_K * wavenumber > 2 are refined once into four.
    """
    parts = map_cells(
        lambda c: _cell_integrals(solution, c, exact, gradient, wavenumber),
        range(solution.mesh.n_cells),
        workers=workers,
    )
    err0, err1, norm0, norm1 = np.sum(parts, axis=0)
    if norm0 + norm1 <= 0.0:
        raise ValueError("Relative errors are undefined for a vanishing exact solution")
    return ErrorReport(
        e_u_1=math.sqrt((err0 + err1) / (norm0 + norm1)),
        e_u_0=math.sqrt(err0 / norm0) if norm0 > 0 else math.inf,
        seminorm=math.sqrt(err1 / norm1) if norm1 > 0 else math.inf,
        dofs=solution.dofs,
        h=float(solution.mesh.cell_diameters.max()),
        k=solution.k,
        kprime=solution.kprime,
    )


def estimated_convergence_rate(
    errors: Sequence[float],
    *,
    h: Sequence[float] | None = None,
    dofs: Sequence[float] | None = None,
) -> list[float | None]:
    """ecr_i = log(e_{i-1}/e_i) / log(h_{i-1}/h_i), with h ∝ dofs^(-1/2) when only dofs are given.

    The first entry is None, as there is nothing to compare it with.
    """
    if (h is None) == (dofs is None):
        raise ValueError("Pass exactly one of h or dofs")
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        raise ValueError("No errors to compute rates from")
    if np.any(~np.isfinite(errors)) or np.any(errors <= 0.0):
        raise ValueError(f"Errors must be finite and positive, got {errors.tolist()}")
    sizes = np.asarray(h, dtype=float) if h is not None else np.asarray(dofs, dtype=float) ** -0.5
    if sizes.shape != errors.shape or np.any(sizes <= 0.0):
        raise ValueError("Mesh sizes / dofs must be positive and match the errors")
    rates: list[float | None] = [None]
    for i in range(1, len(errors)):
        rates.append(float(np.log(errors[i - 1] / errors[i]) / np.log(sizes[i - 1] / sizes[i])))
    return rates
