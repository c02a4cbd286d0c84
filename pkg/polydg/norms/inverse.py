"""Numerical growth of ||p||_{0,I} / ||p||_{H^1_0(I)'} over polynomials of degree k on I = (0, 1)."""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np
import scipy.linalg as sla
from loguru import logger
from pydantic import BaseModel, Field
from scipy import sparse
from scipy.optimize import curve_fit
from scipy.sparse.linalg import splu

from polydg.basis.legendre import unit_interval_legendre
from polydg.basis.quadrature import gauss_edge_rule

__all__ = ["NegativeInverseReport", "negative_inverse_ratio", "verify_negative_inverse"]


def _elements_for(k: int) -> int:
    return 64 * (k + 1) ** 2


def negative_inverse_ratio(k: int, elements: int | None = None) -> float:
    """max over p in P_k of ||p||_0 / ||p||_{-1}, with the dual norm taken over P1 ∩ H^1_0."""
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    n = _elements_for(k) if elements is None else elements
    h = 1.0 / n
    interior = n - 1
    main = np.full(interior, 2.0 / h)
    off = np.full(interior - 1, -1.0 / h)
    stiffness = sparse.diags([off, main, off], [-1, 0, 1], format="csc")

    rule = gauss_edge_rule(k // 2 + 2)
    t = 0.5 * (rule.points + 1.0)
    w = 0.5 * rule.weights * h
    x = (np.arange(n)[:, None] + t[None, :]) * h
    legendre = unit_interval_legendre(x.ravel(), k).reshape(n, len(t), k + 1) * w[None, :, None]
    loads = np.zeros((n + 1, k + 1))
    loads[:-1] += np.einsum("q,nqj->nj", 1.0 - t, legendre)
    loads[1:] += np.einsum("q,nqj->nj", t, legendre)
    loads = loads[1:-1]

    # orthonormal p: the mass matrix is the identity
    gram = loads.T @ splu(stiffness).solve(loads)
    smallest = float(sla.eigvalsh(0.5 * (gram + gram.T))[0])
    return 1.0 / math.sqrt(smallest)


class NegativeInverseReport(BaseModel):
    ks: list[int]
    ratios: list[float]
    slope: float = Field(description="Least-squares slope of log(ratio) against log(k)")
    exponent: float = Field(description="p in the fitted law ratio ≈ C (k + a)^p")
    offset: float = Field(description="a in the fitted law")
    constant: float = Field(description="C in the fitted law")

    def to_key_values(self) -> list[str]:
        lines = [f"ratio_k{k}={ratio!r}" for k, ratio in zip(self.ks, self.ratios)]
        lines += [f"slope={self.slope!r}", f"exponent={self.exponent!r}", f"offset={self.offset!r}"]
        return lines


def _shifted_power_law(k: np.ndarray, log_c: float, a: float, p: float) -> np.ndarray:
    return log_c + p * np.log(k + a)


def verify_negative_inverse(ks: Sequence[int] = range(2, 17)) -> NegativeInverseReport:
    ks = [int(k) for k in ks]
    if len(ks) < 3 or min(ks) < 1:
        raise ValueError("Need at least three degrees k >= 1 to fit a growth exponent")
    ratios = [negative_inverse_ratio(k) for k in ks]
    log_k, log_r = np.log(ks), np.log(ratios)
    slope = float(np.polyfit(log_k, log_r, 1)[0])
    params, _ = curve_fit(
        _shifted_power_law,
        np.asarray(ks, dtype=float),
        log_r,
        p0=(log_r[0] - 2.0 * np.log(ks[0] + 1.0), 1.0, 2.0),
        bounds=([-np.inf, 0.0, 0.5], [np.inf, 10.0, 4.0]),
    )
    report = NegativeInverseReport(
        ks=ks,
        ratios=ratios,
        slope=slope,
        exponent=float(params[2]),
        offset=float(params[1]),
        constant=float(np.exp(params[0])),
    )
    logger.info(f"Negative inverse estimate: slope {slope:.3f}, fitted exponent {report.exponent:.3f}")
    return report
