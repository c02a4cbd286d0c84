"""L2(e)-orthonormal Legendre bases on straight edges."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["EdgeLegendreBasis", "eval_edge_basis", "legendre_table", "unit_interval_legendre"]


def legendre_table(xi: np.ndarray, degree: int) -> np.ndarray:
    """P_0..P_degree at xi in [-1, 1], shape (n, degree+1), by the three-term recursion."""
    xi = np.asarray(xi, dtype=float)
    table = np.empty((xi.size, degree + 1))
    table[:, 0] = 1.0
    if degree >= 1:
        table[:, 1] = xi
    for n in range(1, degree):
        table[:, n + 1] = ((2 * n + 1) * xi * table[:, n] - n * table[:, n - 1]) / (n + 1)
    return table


def unit_interval_legendre(t: np.ndarray, degree: int) -> np.ndarray:
    """Legendre functions orthonormal on [0, 1]."""
    scale = np.sqrt(2.0 * np.arange(degree + 1) + 1.0)
    return legendre_table(2.0 * np.asarray(t) - 1.0, degree) * scale


@dataclass(frozen=True)
class EdgeLegendreBasis:
    p0: tuple[float, float]
    p1: tuple[float, float]
    degree: int

    @property
    def length(self) -> float:
        return float(np.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1]))

    @property
    def dimension(self) -> int:
        return self.degree + 1

    def at_points(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at physical points lying on the edge."""
        p0 = np.asarray(self.p0)
        tangent = (np.asarray(self.p1) - p0) / self.length
        s = (np.atleast_2d(points) - p0) @ tangent
        return eval_edge_basis(self, s)


def eval_edge_basis(basis: EdgeLegendreBasis, s: np.ndarray) -> np.ndarray:
    """Values of sqrt((2i+1)/L) P_i(2s/L - 1) at arc-length parameters s, shape (n, k'+1)."""
    length = basis.length
    s = np.atleast_1d(np.asarray(s, dtype=float))
    return unit_interval_legendre(s / length, basis.degree) / np.sqrt(length)

