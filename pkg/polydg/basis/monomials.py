"""Scaled monomial bases on polygonal cells."""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

__all__ = ["ScaledMonomialBasis", "multi_indices", "eval_cell_basis", "basis_dimension"]


def basis_dimension(k: int) -> int:
    return (k + 1) * (k + 2) // 2


@functools.cache
def multi_indices(k: int) -> tuple[tuple[int, int], ...]:
    """Multi-indices with |alpha| <= k in graded lexicographic order."""
    return tuple((d - j, j) for d in range(k + 1) for j in range(d + 1))


@dataclass(frozen=True)
class ScaledMonomialBasis:
    center: tuple[float, float]
    h: float
    k: int

    @property
    def dimension(self) -> int:
        return basis_dimension(self.k)

    @property
    def indices(self) -> tuple[tuple[int, int], ...]:
        return multi_indices(self.k)

    def values(self, points: np.ndarray) -> np.ndarray:
        return eval_cell_basis(self, points)[0]

    def gradients(self, points: np.ndarray) -> np.ndarray:
        return eval_cell_basis(self, points)[1]


def eval_cell_basis(
    basis: ScaledMonomialBasis, points: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate m_alpha and grad m_alpha at `points` of shape (n, 2).

    Returns values of shape (n, n_u) and gradients of shape (n, n_u, 2).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    k = basis.k
    xi = (points[:, 0] - basis.center[0]) / basis.h
    eta = (points[:, 1] - basis.center[1]) / basis.h
    # powers[:, p] = xi**p, with a leading zero column for the derivative shift
    px = np.concatenate([np.zeros((len(xi), 1)), xi[:, None] ** np.arange(k + 1)], axis=1)
    py = np.concatenate([np.zeros((len(eta), 1)), eta[:, None] ** np.arange(k + 1)], axis=1)
    a = np.array([i for i, _ in basis.indices])
    b = np.array([j for _, j in basis.indices])
    values = px[:, a + 1] * py[:, b + 1]
    dx = a * px[:, a] * py[:, b + 1] / basis.h
    dy = b * px[:, a + 1] * py[:, b] / basis.h
    return values, np.stack([dx, dy], axis=-1)
