"""Gauss rules on [-1, 1] and collapsed (Duffy) Gauss rules on the reference triangle."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "QuadratureRule",
    "gauss_edge_rule",
    "triangle_rule",
    "segment_points",
    "triangle_points",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    """Nodes: shape (n,) on an interval, (n, 2) on a triangle."""
    weights: np.ndarray
    degree: int
    """Polynomial exactness degree."""

    def __len__(self) -> int:
        return len(self.weights)

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Contract the leading axis of `values` with the weights."""
        return np.tensordot(self.weights, values, axes=(0, 0))


@functools.cache
def gauss_edge_rule(npoints: int) -> QuadratureRule:
    """Gauss-Legendre rule with `npoints` nodes on [-1, 1], exact to degree 2n-1."""
    if npoints < 1:
        raise ValueError(f"Gauss rule needs at least one point, got {npoints}")
    x, w = special.roots_legendre(npoints)
    return QuadratureRule(_frozen(np.asarray(x)), _frozen(np.asarray(w)), 2 * npoints - 1)


@functools.cache
def triangle_rule(degree: int) -> QuadratureRule:
    """Collapsed tensor Gauss rule on conv{(0,0), (1,0), (0,1)} exact to `degree`.

    x = u(1-v), y = v with Jacobian (1-v); x^a y^b becomes a polynomial of degree
    a+b+1 in v, so ceil((d+2)/2) points per direction suffice.
    """
    if degree < 0:
        raise ValueError(f"Exactness degree must be non-negative, got {degree}")
    n = max(1, math.ceil((degree + 2) / 2))
    t, w = special.roots_legendre(n)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    u, v = np.meshgrid(t, t, indexing="ij")
    wu, wv = np.meshgrid(w, w, indexing="ij")
    points = np.column_stack([(u * (1.0 - v)).ravel(), v.ravel()])
    weights = (wu * wv * (1.0 - v)).ravel()
    return QuadratureRule(_frozen(points), _frozen(weights), degree)


def segment_points(
    rule: QuadratureRule, p0: np.ndarray, p1: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Map an edge rule onto the segment p0-p1.

    Returns physical points, weights scaled to the segment length and the arc-length
    parameters s in [0, L] of the points.
    """
    p0, p1 = np.asarray(p0, dtype=float), np.asarray(p1, dtype=float)
    length = float(np.linalg.norm(p1 - p0))
    t = 0.5 * (rule.points + 1.0)
    points = p0[None, :] + t[:, None] * (p1 - p0)[None, :]
    return points, 0.5 * length * rule.weights, t * length


def triangle_points(
    rule: QuadratureRule, v0: np.ndarray, v1: np.ndarray, v2: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Map a reference-triangle rule onto the triangle (v0, v1, v2)."""
    v0 = np.asarray(v0, dtype=float)
    jac = np.column_stack([np.asarray(v1) - v0, np.asarray(v2) - v0])
    points = v0[None, :] + rule.points @ jac.T
    return points, abs(np.linalg.det(jac)) * rule.weights
