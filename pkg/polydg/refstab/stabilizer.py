"""Reference auxiliary space W^ = G(P_k'(e^)) and its push-forward to physical triangles."""

from __future__ import annotations

import functools
import os
from dataclasses import dataclass

import numpy as np
from loguru import logger

from polydg.basis.dubiner import dubiner_values
from polydg.basis.quadrature import QuadratureRule, triangle_rule
from polydg.errors import SingularStabilizerError
from polydg.refstab.fem import (
    ReferenceTriangleFEM,
    build_reference_fem,
    lift_neumann,
    p1_gradients,
)

__all__ = [
    "PhysicalTriangleData",
    "ReferenceStabilizer",
    "build_reference_stabilizer",
    "default_delta",
    "get_reference_stabilizer",
    "push_forward",
]

RANK_TOLERANCE = 1e-10
_PROJECTION_BATCH = 1024


def default_delta(kprime: int) -> float:
    """delta = min(k'^-2, 1/(k'+2)); the floor keeps k'+1 free nodes on e^."""
    if kprime <= 0:
        return 0.5
    return min(1.0 / kprime**2, 1.0 / (kprime + 2))


@dataclass(frozen=True)
class ReferenceStabilizer:
    kprime: int
    delta: float
    m: int
    projection_degree: int
    """Degree D of the polynomial projections cached at the volume rule."""
    nodal: np.ndarray
    """Nodal vectors of phi^_p, shape (n_nodes, k'+1)."""
    stiffness: np.ndarray
    """S^_pq = int grad phi^_q . grad phi^_p."""
    metric_stiffness: np.ndarray
    """R[a, b, p, q] = int d_a phi^_p d_b phi^_q, shape (2, 2, k'+1, k'+1)."""
    edge_moments: np.ndarray
    """int_e^ lambda_q phi^_p, equal to the stiffness by the Galerkin identity."""
    values: np.ndarray
    """L2 projection of phi^_p onto P_D at the volume rule nodes, shape (nq, k'+1)."""
    gradients: np.ndarray
    """L2 projection of grad phi^_p onto P_D^2 at the volume rule nodes, shape (nq, k'+1, 2)."""
    trace_values: np.ndarray
    """phi^_p at the nodes of e^ (x = i/m), shape (m+1, k'+1)."""
    rank_deficient: bool = False

    @property
    def dimension(self) -> int:
        return self.kprime + 1

    @property
    def rule(self) -> QuadratureRule:
        return triangle_rule(2 * self.projection_degree)

    @functools.cached_property
    def fem(self) -> ReferenceTriangleFEM:
        return build_reference_fem(self.delta)


def _project_onto_polynomials(
    fem: ReferenceTriangleFEM, nodal: np.ndarray, degree: int, rule: QuadratureRule
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the L2(T^) projections of P1 functions and their gradients at `rule` nodes.

    The moments against the orthonormal Dubiner basis are integrated exactly, fine
    triangle by fine triangle.
    """
    local = triangle_rule(degree + 1)
    bary = np.column_stack([1.0 - local.points.sum(axis=1), local.points])
    grads = p1_gradients(fem.nodes, fem.triangles, nodal)
    n_basis = (degree + 1) * (degree + 2) // 2
    moments = np.zeros((n_basis, nodal.shape[1]))
    grad_moments = np.zeros((n_basis, nodal.shape[1], 2))
    for start in range(0, len(fem.triangles), _PROJECTION_BATCH):
        tris = fem.triangles[start : start + _PROJECTION_BATCH]
        corners = fem.nodes[tris]
        det = np.abs(np.linalg.det(np.stack([corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0]], axis=2)))
        points = np.einsum("lk,ckd->cld", bary, corners)
        weights = local.weights[None, :] * det[:, None]
        psi = dubiner_values(points.reshape(-1, 2), degree).reshape(len(tris), len(local), n_basis)
        values = np.einsum("lk,ckf->clf", bary, nodal[tris])
        moments += np.einsum("cl,clb,clf->bf", weights, psi, values)
        grad_moments += np.einsum("cl,clb,cfd->bfd", weights, psi, grads[start : start + _PROJECTION_BATCH])
    psi_rule = dubiner_values(rule.points, degree)
    return psi_rule @ moments, np.einsum("qb,bfd->qfd", psi_rule, grad_moments)


def build_reference_stabilizer(
    kprime: int, delta: float | None = None, *, projection_degree: int | None = None
) -> ReferenceStabilizer:
    """Solve the k'+1 liftings of the edge Legendre functions and cache their stiffness data."""
    if kprime < 0:
        raise ValueError(f"k' must be non-negative, got {kprime}")
    delta = default_delta(kprime) if delta is None else delta
    degree = kprime + 1 if projection_degree is None else projection_degree
    fem = build_reference_fem(delta)
    nodal = lift_neumann(fem, np.eye(kprime + 1))

    grads = p1_gradients(fem.nodes, fem.triangles, nodal)
    areas = 0.5 / fem.m**2
    metric = areas * np.einsum("tpa,tqb->abpq", grads, grads)
    stiffness = metric[0, 0] + metric[1, 1]
    stiffness = 0.5 * (stiffness + stiffness.T)
    edge_moments = nodal.T @ fem.edge_load(kprime)

    eigenvalues = np.linalg.eigvalsh(stiffness)
    rank_deficient = bool(eigenvalues[0] <= RANK_TOLERANCE * eigenvalues[-1])
    if rank_deficient:
        logger.warning(
            f"Reference stabilizer k'={kprime}, delta={delta:g} (m={fem.m}) is rank-deficient: "
            f"only {len(fem.trace_nodes) - 2} free nodes on the reference edge; "
            "the physical blocks will use pseudo-inverses"
        )

    values, gradients = _project_onto_polynomials(fem, nodal, degree, triangle_rule(2 * degree))
    stab = ReferenceStabilizer(
        kprime=kprime,
        delta=delta,
        m=fem.m,
        projection_degree=degree,
        nodal=nodal,
        stiffness=stiffness,
        metric_stiffness=metric,
        edge_moments=edge_moments,
        values=values,
        gradients=gradients,
        trace_values=nodal[fem.trace_nodes],
        rank_deficient=rank_deficient,
    )
    logger.info(
        f"Built reference stabilizer k'={kprime}, delta={delta:g}, m={fem.m}, "
        f"lambda_min(S^)={eigenvalues[0]:.3e}"
    )
    return stab


@functools.lru_cache(maxsize=32)
def _cached_stabilizer(kprime: int, delta: float, projection_degree: int, cache_dir: str | None) -> ReferenceStabilizer:
    if cache_dir is None:
        return build_reference_stabilizer(kprime, delta, projection_degree=projection_degree)
    from polydg.refstab.cache import load_or_build

    return load_or_build(kprime, delta, projection_degree, cache_dir)


def get_reference_stabilizer(
    kprime: int,
    delta: float | None = None,
    *,
    projection_degree: int | None = None,
    cache_dir: os.PathLike | str | None = None,
) -> ReferenceStabilizer:
    """Memoized `build_reference_stabilizer`, optionally backed by the binary file cache."""
    delta = default_delta(kprime) if delta is None else float(delta)
    degree = kprime + 1 if projection_degree is None else projection_degree
    return _cached_stabilizer(kprime, delta, degree, None if cache_dir is None else str(cache_dir))


@dataclass(frozen=True)
class PhysicalTriangleData:
    """Reference caches transported to T = F(T^) by an affine map."""

    points: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    gradients: np.ndarray
    stiffness: np.ndarray
    """Physical stiffness S_i of W_i."""
    trace_coupling: np.ndarray
    """G_pq = int_{e_i} mu_q phi_p for the global edge basis mu_q."""


def push_forward(
    stab: ReferenceStabilizer,
    jacobian: np.ndarray,
    translation: np.ndarray,
    *,
    edge_sign: int = 1,
) -> PhysicalTriangleData:
    """Map the reference caches through F(x^) = translation + jacobian @ x^.

    Values are unchanged, gradients pick up J^{-T}, volume weights |det J|. The trace
    coupling follows from the Galerkin identity: sqrt(|e|) S^ diag(sign^q), where
    `edge_sign` is -1 when F runs along the global edge backwards.
    """
    jacobian = np.asarray(jacobian, dtype=float)
    det = float(np.linalg.det(jacobian))
    scale = float(np.abs(jacobian).max())
    if not np.isfinite(det) or abs(det) <= 1e-14 * scale**2:
        raise SingularStabilizerError(f"Singular Jacobian (det={det:.3e}) in push-forward")
    inverse = np.linalg.inv(jacobian)
    rule = stab.rule
    metric = inverse @ inverse.T
    stiffness = abs(det) * np.einsum("ab,abpq->pq", metric, stab.metric_stiffness)
    edge_length = float(np.linalg.norm(jacobian[:, 0]))
    signs = float(edge_sign) ** np.arange(stab.dimension)
    return PhysicalTriangleData(
        points=np.asarray(translation)[None, :] + rule.points @ jacobian.T,
        weights=abs(det) * rule.weights,
        values=stab.values,
        gradients=stab.gradients @ inverse,
        stiffness=0.5 * (stiffness + stiffness.T),
        trace_coupling=np.sqrt(edge_length) * stab.stiffness * signs[None, :],
    )
