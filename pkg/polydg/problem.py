"""Poisson problems -Δu = f with Dirichlet data g and Neumann data g_N."""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from polydg.basis.monomials import ScaledMonomialBasis, multi_indices

__all__ = ["PoissonProblem", "cosine_problem", "polynomial_problem"]

type ScalarField = Callable[[np.ndarray], np.ndarray]
"""Maps points of shape (n, 2) to values of shape (n,)."""
type VectorField = Callable[[np.ndarray], np.ndarray]
"""Maps points of shape (n, 2) to values of shape (n, 2)."""
type FluxData = Callable[[np.ndarray, np.ndarray], np.ndarray]
"""Maps points (n, 2) and outward unit normals (n, 2) to values (n,)."""


@dataclass(frozen=True)
class PoissonProblem:
    name: str
    source: ScalarField
    dirichlet: ScalarField
    neumann: FluxData
    exact: ScalarField | None = None
    exact_gradient: VectorField | None = None

    @property
    def has_exact_solution(self) -> bool:
        return self.exact is not None and self.exact_gradient is not None


def _flux_of(gradient: VectorField) -> FluxData:
    def flux(points: np.ndarray, normals: np.ndarray) -> np.ndarray:
        return np.einsum("nd,nd->n", gradient(points), normals)

    return flux


def cosine_problem(wavenumber: float = 8.0 * math.pi) -> PoissonProblem:
    """u = cos(ax)cos(ay)/(2a^2) with a = 8π by default, so f = cos(ax)cos(ay)."""
    a = wavenumber
    scale = 1.0 / (2.0 * a**2)

    def exact(p: np.ndarray) -> np.ndarray:
        return scale * np.cos(a * p[:, 0]) * np.cos(a * p[:, 1])

    def gradient(p: np.ndarray) -> np.ndarray:
        cx, cy = np.cos(a * p[:, 0]), np.cos(a * p[:, 1])
        sx, sy = np.sin(a * p[:, 0]), np.sin(a * p[:, 1])
        return -a * scale * np.column_stack([sx * cy, cx * sy])

    def source(p: np.ndarray) -> np.ndarray:
        return np.cos(a * p[:, 0]) * np.cos(a * p[:, 1])

    return PoissonProblem(
        name=f"cosine(a={a:g})",
        source=source,
        dirichlet=exact,
        neumann=_flux_of(gradient),
        exact=exact,
        exact_gradient=gradient,
    )


def polynomial_problem(
    coefficients: Sequence[float], center: tuple[float, float] = (0.5, 0.5), scale: float = 1.0
) -> PoissonProblem:
    """u* = sum_a c_a m_a for scaled monomials about `center`; f = -Δu*, g_N = ∇u*·n."""
    coefficients = np.asarray(coefficients, dtype=float)
    k = 0
    while len(multi_indices(k)) < len(coefficients):
        k += 1
    if len(multi_indices(k)) != len(coefficients):
        raise ValueError(f"{len(coefficients)} coefficients do not fill a complete P_k basis")
    basis = ScaledMonomialBasis(center, scale, k)
    indices = multi_indices(k)
    laplacian = np.zeros_like(coefficients)
    position = {alpha: i for i, alpha in enumerate(indices)}
    for i, (a, b) in enumerate(indices):
        if a >= 2:
            laplacian[position[(a - 2, b)]] += a * (a - 1) * coefficients[i] / scale**2
        if b >= 2:
            laplacian[position[(a, b - 2)]] += b * (b - 1) * coefficients[i] / scale**2

    def exact(p: np.ndarray) -> np.ndarray:
        return basis.values(p) @ coefficients

    def gradient(p: np.ndarray) -> np.ndarray:
        return np.einsum("nad,a->nd", basis.gradients(p), coefficients)

    def source(p: np.ndarray) -> np.ndarray:
        return -(basis.values(p) @ laplacian)

    return PoissonProblem(
        name=f"polynomial(k={k})",
        source=source,
        dirichlet=exact,
        neumann=_flux_of(gradient),
        exact=exact,
        exact_gradient=gradient,
    )
