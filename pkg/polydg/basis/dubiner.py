"""Orthonormal polynomial basis on the reference triangle (collapsed-coordinate Jacobi products)."""

from __future__ import annotations

import functools

import numpy as np
from scipy import special

from polydg.basis.quadrature import triangle_rule

__all__ = ["dubiner_values"]


def _raw_values(points: np.ndarray, degree: int) -> np.ndarray:
    x, y = points[:, 0], points[:, 1]
    one_minus_y = 1.0 - y
    safe = np.where(one_minus_y > 1e-300, one_minus_y, 1.0)
    a = np.where(one_minus_y > 1e-300, 2.0 * x / safe - 1.0, 0.0)
    b = 2.0 * y - 1.0
    columns = []
    for p in range(degree + 1):
        pa = special.eval_legendre(p, a) * one_minus_y**p
        for q in range(degree + 1 - p):
            columns.append(pa * special.eval_jacobi(q, 2 * p + 1, 0, b))
    return np.column_stack(columns)


@functools.cache
def _norms(degree: int) -> np.ndarray:
    rule = triangle_rule(2 * degree)
    raw = _raw_values(rule.points, degree)
    return np.sqrt(rule.weights @ raw**2)


def dubiner_values(points: np.ndarray, degree: int) -> np.ndarray:
    """L2(T^)-orthonormal basis of P_degree at `points`, shape (n, (d+1)(d+2)/2)."""
    return _raw_values(np.atleast_2d(points), degree) / _norms(degree)
