"""Dual seminorm |F|_{-1,K} on an auxiliary P1 mesh of a cell, and spectral bounds of s_K."""

from __future__ import annotations

import functools
import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla
from loguru import logger
from scipy import sparse
from scipy.sparse.linalg import splu

from polydg.assembly.local import cell_basis
from polydg.assembly.stabilization import assemble_stabilization
from polydg.basis.legendre import EdgeLegendreBasis
from polydg.basis.quadrature import gauss_edge_rule, triangle_rule
from polydg.errors import PolyDGError
from polydg.mesh.generators import merge_close_points
from polydg.mesh.model import PolygonalMesh
from polydg.mesh.subtriangulation import CellSplit, split_cell
from polydg.problem import ScalarField, VectorField
from polydg.refstab.fem import barycentric_gradients, p1_stiffness, structured_triangle_mesh
from polydg.refstab.stabilizer import get_reference_stabilizer

__all__ = [
    "DualNormEstimate",
    "DualNormProbe",
    "SpectralBounds",
    "build_probe",
    "dual_seminorm",
    "edge_functional",
    "edge_loads",
    "gradient_functional",
    "source_functional",
    "stabilizer_spectral_bounds",
]

DEFAULT_SUBDIVISIONS = 8

type Functional = Callable[[DualNormProbe], np.ndarray]
"""Maps a probe to the load vector <F, N_n> over its hat functions."""


@dataclass(frozen=True)
class DualNormProbe:
    """P1 space on the sub-triangulation of a cell, each T_i meshed with the structured pattern."""

    split: CellSplit
    subdivisions: int
    nodes: np.ndarray
    triangles: np.ndarray
    trace_nodes: np.ndarray
    """Probe nodes along e_i, ordered from loop[i] to loop[i+1], shape (N_K, subdivisions+1)."""
    stiffness: sparse.csr_matrix
    moments: np.ndarray
    """int_K N_n, the mean-value constraint row."""

    @property
    def cell(self) -> int:
        return self.split.cell

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @functools.cached_property
    def _bordered(self):
        n = self.n_nodes
        matrix = sparse.bmat(
            [
                [self.stiffness, sparse.csr_matrix(self.moments[:, None])],
                [sparse.csr_matrix(self.moments[None, :]), None],
            ]
        ).tocsc()
        try:
            return splu(matrix)
        except RuntimeError as e:
            raise PolyDGError(f"Mean-zero Riesz problem on cell {self.cell} is singular ({e}), n={n}") from e

    def riesz(self, loads: np.ndarray) -> np.ndarray:
        """Mean-zero z with int ∇z·∇g = <F, g> for all mean-zero g; one column per load."""
        loads = np.asarray(loads, dtype=float)
        padded = np.concatenate([loads, np.zeros((1,) + loads.shape[1:])], axis=0)
        return self._bordered.solve(padded)[: self.n_nodes]

    def energy(self, z: np.ndarray) -> np.ndarray:
        return np.einsum("n...,n...->...", z, self.stiffness @ z)

    def coarsened(self) -> DualNormProbe | None:
        if self.subdivisions < 2:
            return None
        return build_probe(self.split, self.subdivisions // 2)


def build_probe(split: CellSplit, subdivisions: int = DEFAULT_SUBDIVISIONS) -> DualNormProbe:
    if subdivisions < 1:
        raise ValueError(f"Probe needs at least one subdivision, got {subdivisions}")
    ref_nodes, ref_triangles = structured_triangle_mesh(subdivisions)
    n_ref = len(ref_nodes)
    points = np.concatenate(
        [split.translations[i][None, :] + ref_nodes @ split.jacobians[i].T for i in range(split.n_triangles)]
    )
    scale = float(np.abs(split.jacobians).max())
    nodes, labels = merge_close_points(points, 1e-10 * scale)
    labels = labels.reshape(split.n_triangles, n_ref)
    triangles = np.concatenate([labels[i][ref_triangles] for i in range(split.n_triangles)])
    # the first subdivisions+1 reference nodes are the row y^ = 0, i.e. e_i
    trace_nodes = labels[:, : subdivisions + 1]
    _, areas = barycentric_gradients(nodes, triangles)
    moments = np.zeros(len(nodes))
    np.add.at(moments, triangles, np.repeat(areas[:, None] / 3.0, 3, axis=1))
    return DualNormProbe(
        split=split,
        subdivisions=subdivisions,
        nodes=nodes,
        triangles=triangles,
        trace_nodes=trace_nodes,
        stiffness=p1_stiffness(nodes, triangles),
        moments=moments,
    )


def _fine_quadrature(probe: DualNormProbe, degree: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rule = triangle_rule(degree)
    corners = probe.nodes[probe.triangles]
    jac = np.stack([corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0]], axis=2)
    points = corners[:, 0][:, None, :] + np.einsum("qd,ted->tqe", rule.points, jac)
    weights = np.abs(np.linalg.det(jac))[:, None] * rule.weights[None, :]
    bary = np.column_stack([1.0 - rule.points.sum(axis=1), rule.points])
    return points, weights, bary


def gradient_functional(field: VectorField, degree: int) -> Functional:
    """<F, g> = int_K field·∇g, e.g. F = Du for field = ∇u."""

    def loads(probe: DualNormProbe) -> np.ndarray:
        points, weights, _ = _fine_quadrature(probe, degree)
        values = field(points.reshape(-1, 2)).reshape(points.shape)
        integrals = np.einsum("tq,tqd->td", weights, values)
        grads, _ = barycentric_gradients(probe.nodes, probe.triangles)
        out = np.zeros(probe.n_nodes)
        np.add.at(out, probe.triangles, np.einsum("tad,td->ta", grads, integrals))
        return out

    return loads


def source_functional(source: ScalarField, degree: int) -> Functional:
    """<F, g> = int_K f g."""

    def loads(probe: DualNormProbe) -> np.ndarray:
        points, weights, bary = _fine_quadrature(probe, degree + 1)
        values = source(points.reshape(-1, 2)).reshape(weights.shape)
        out = np.zeros(probe.n_nodes)
        np.add.at(out, probe.triangles, np.einsum("tq,tq,qa->ta", weights, values, bary))
        return out

    return loads


def edge_loads(probe: DualNormProbe, kprime: int) -> np.ndarray:
    """<γ*μ, N_n> = int_{∂K} μ N_n for every local flux basis function μ, shape (n_nodes, N_K (k'+1))."""
    split = probe.split
    n = probe.subdivisions
    q = kprime + 1
    rule = gauss_edge_rule(kprime // 2 + 2)
    t = 0.5 * (rule.points + 1.0)
    out = np.zeros((probe.n_nodes, split.n_triangles * q))
    for i in range(split.n_triangles):
        a = split.translations[i]
        b = a + split.jacobians[i][:, 0]
        p0, p1 = (a, b) if split.edge_signs[i] > 0 else (b, a)
        basis = EdgeLegendreBasis((float(p0[0]), float(p0[1])), (float(p1[0]), float(p1[1])), kprime)
        weights = 0.5 * rule.weights * basis.length / n
        for s in range(n):
            x = (s + t) / n
            mu = basis.at_points(a[None, :] + x[:, None] * (b - a)[None, :])
            nodes = probe.trace_nodes[i]
            out[nodes[s], i * q : (i + 1) * q] += ((1.0 - t) * weights) @ mu
            out[nodes[s + 1], i * q : (i + 1) * q] += (t * weights) @ mu
    return out


def edge_functional(coefficients: np.ndarray, kprime: int) -> Functional:
    """<γ*λ, g> = int_{∂K} λ g for λ given by its local flux coefficients."""

    def loads(probe: DualNormProbe) -> np.ndarray:
        return edge_loads(probe, kprime) @ coefficients

    return loads


class DualNormEstimate(NamedTuple):
    value: float
    """|F|_{-1,K} on the probe."""
    coarse: float | None
    """The same on the once-coarsened probe."""
    extrapolated: float
    """Richardson estimate assuming O(h^2) convergence of the squared value."""


def dual_seminorm(probe: DualNormProbe, functional: Functional) -> DualNormEstimate:
    def evaluate(p: DualNormProbe) -> float:
        z = p.riesz(functional(p))
        return math.sqrt(max(float(p.energy(z)), 0.0))

    value = evaluate(probe)
    coarse_probe = probe.coarsened()
    if coarse_probe is None:
        return DualNormEstimate(value, None, value)
    coarse = evaluate(coarse_probe)
    extrapolated = math.sqrt(max((4.0 * value**2 - coarse**2) / 3.0, 0.0))
    return DualNormEstimate(value, coarse, extrapolated)


class SpectralBounds(NamedTuple):
    rho: float
    """min over mean-zero λ of s_K(γ*λ, γ*λ) / |γ*λ|²_{-1,K}."""
    M: float
    """The corresponding max."""
    dimension: int


def stabilizer_spectral_bounds(
    mesh: PolygonalMesh,
    c: int,
    kprime: int,
    probe: DualNormProbe | None = None,
    *,
    delta: float | None = None,
) -> SpectralBounds:
    """Extreme generalized eigenvalues of s_K against the probe dual seminorm on mean-zero Λ_K.

    The default probe refines the reference mesh of the stabilizer twice, so it contains W^K.
    """
    stab = get_reference_stabilizer(kprime, delta)
    split = split_cell(mesh, c) if probe is None else probe.split
    if probe is None:
        probe = build_probe(split, 2 * stab.m)
    blocks = assemble_stabilization(split, cell_basis(mesh, c, 1), stab)
    g = blocks.trace_matrix()
    stabilizer = g.T @ blocks.inverse_matrix() @ g

    loads = edge_loads(probe, kprime)
    representers = probe.riesz(loads)
    gram = representers.T @ (probe.stiffness @ representers)

    q = kprime + 1
    lengths = np.linalg.norm(split.jacobians[:, :, 0], axis=1)
    means = np.zeros(split.n_triangles * q)
    means[::q] = np.sqrt(lengths)
    basis = sla.null_space(means[None, :])
    a = basis.T @ stabilizer @ basis
    b = basis.T @ gram @ basis
    eigenvalues = sla.eigh(0.5 * (a + a.T), 0.5 * (b + b.T), eigvals_only=True)
    bounds = SpectralBounds(float(eigenvalues[0]), float(eigenvalues[-1]), basis.shape[1])
    logger.info(
        f"Spectral bounds on cell {c} (k'={kprime}, probe n={probe.subdivisions}): "
        f"rho={bounds.rho:.4e}, M={bounds.M:.4e}"
    )
    return bounds
