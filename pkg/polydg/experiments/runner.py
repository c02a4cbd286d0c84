"""Convergence and robustness studies on the manufactured cosine problem."""

from __future__ import annotations

import functools
import math
import time
from pathlib import Path

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field

from polydg.errors import PolyDGError
from polydg.experiments.config import ExperimentConfig
from polydg.experiments.outputs import ResultRow, ResultsTable, emit_outputs, emit_ratios
from polydg.mesh.generators import (
    generate_hexagonal_mesh,
    generate_voronoi_mesh,
    shrink_vertical_edges,
)
from polydg.mesh.model import PolygonalMesh
from polydg.mesh.quality import quality_report
from polydg.norms.errors import compute_errors
from polydg.problem import cosine_problem
from polydg.solver.driver import solve_problem
from polydg.utils.logging import tlog

__all__ = [
    "StudyResult",
    "k_ratios",
    "run_delta_sensitivity",
    "run_edge_shrink",
    "run_h_convergence",
    "run_k_robustness",
    "run_study",
]


class StudyResult(BaseModel):
    kind: str
    tables: list[ResultsTable]
    ratios: list[tuple[int, float]] = Field(
        default_factory=list, description="log(e_k/e_{k+1}) / log(e_{k+1}/e_{k+2}) per k"
    )

    @property
    def failed_rows(self) -> int:
        return sum(table.failed_rows for table in self.tables)


def mesh_id(config: ExperimentConfig, size: int) -> str:
    family = config.mesh
    if family.family == "hexa":
        return f"hexa-n{size}"
    return f"{family.family}-{size}-seed{family.seed}"


@functools.cache
def _family_mesh(family: str, size: int, seed: int, lloyd_iterations: int) -> PolygonalMesh:
    if family == "hexa":
        return generate_hexagonal_mesh(size)
    return generate_voronoi_mesh(count=size, seed=seed, lloyd_iterations=lloyd_iterations)


def family_mesh(config: ExperimentConfig, size: int) -> PolygonalMesh:
    family = config.mesh
    return _family_mesh(family.family, size, family.seed, family.iterations)


def _solve_row(
    config: ExperimentConfig,
    label: str,
    mesh: PolygonalMesh,
    k: int,
    *,
    delta_rule: str | None = None,
) -> ResultRow:
    """Solve one configuration; domain failures turn into a failed row."""
    method = config.method
    kprime = method.kprime_for(k)
    problem = cosine_problem(config.wavenumber)
    started = time.perf_counter()
    try:
        outcome = solve_problem(
            mesh,
            problem,
            k=k,
            kprime=kprime,
            alpha=method.alpha,
            t=method.t,
            delta=method.delta_for(kprime, delta_rule),
            tol=method.tol,
            workers=method.workers,
            cache_dir=config.cache_dir,
        )
        errors = compute_errors(
            outcome.solution,
            problem.exact,
            problem.exact_gradient,
            wavenumber=config.wavenumber,
            workers=method.workers,
        )
    except (PolyDGError, np.linalg.LinAlgError) as e:
        logger.warning(f"Row {label} (k={k}) failed: {e}")
        tlog("row_failed", str(e), type="error", metadata=dict(mesh=label, k=k))
        return ResultRow(mesh=label, error=f"{type(e).__name__}: {e}")
    seconds = time.perf_counter() - started
    tlog("row", errors, metadata=dict(mesh=label, k=k, seconds=seconds))
    logger.info(f"{label} k={k}: dofs={errors.dofs}, e_u_1={errors.e_u_1:.6e}, e_u_0={errors.e_u_0:.6e}")
    return ResultRow(
        mesh=label,
        dofs=errors.dofs,
        e_u_1=errors.e_u_1,
        e_u_0=errors.e_u_0,
        seconds=seconds if config.timings else None,
    )


def run_h_convergence(config: ExperimentConfig) -> StudyResult:
    """One table per k with one row per refinement level, rates against dofs."""
    tables = []
    for k in config.ks:
        rows = [
            _solve_row(config, mesh_id(config, size), family_mesh(config, size), k)
            for size in config.mesh.sizes
        ]
        tables.append(ResultsTable(name=f"{config.name}-k{k}", rows=rows).with_rates())
    return StudyResult(kind=config.kind, tables=tables)


def k_ratios(ks: list[int], errors: list[float | None]) -> list[tuple[int, float]]:
    ratios = []
    for i in range(len(ks) - 2):
        e0, e1, e2 = errors[i : i + 3]
        if not (e0 and e1 and e2) or e1 == e2:
            continue
        ratios.append((ks[i], math.log(e0 / e1) / math.log(e1 / e2)))
    return ratios


def run_k_robustness(config: ExperimentConfig) -> StudyResult:
    """Errors for every k on the first (fixed) mesh of the family, plus successive decay ratios."""
    size = config.mesh.sizes[0]
    mesh = family_mesh(config, size)
    rows = [_solve_row(config, f"{mesh_id(config, size)}-k{k}", mesh, k) for k in config.ks]
    table = ResultsTable(name=config.name, rows=rows)
    return StudyResult(
        kind=config.kind, tables=[table], ratios=k_ratios(list(config.ks), [row.e_u_1 for row in rows])
    )


def run_delta_sensitivity(config: ExperimentConfig) -> StudyResult:
    """One table per δ rule, one row per k, on the first mesh of the family."""
    size = config.mesh.sizes[0]
    mesh = family_mesh(config, size)
    tables = []
    for rule in config.delta_rules:
        rows = [
            _solve_row(config, f"{mesh_id(config, size)}-k{k}", mesh, k, delta_rule=rule)
            for k in config.ks
        ]
        tables.append(ResultsTable(name=f"{config.name}-{rule.replace(':', '')}", rows=rows))
    return StudyResult(kind=config.kind, tables=tables)


def run_edge_shrink(config: ExperimentConfig) -> StudyResult:
    """For every (k, s): the hexagonal levels with interior vertical edges shrunk by s."""
    tables = []
    for k in config.ks:
        for s in config.shrink_factors:
            rows = []
            for size in config.mesh.sizes:
                label = f"{mesh_id(config, size)}-s{s:g}"
                try:
                    mesh = shrink_vertical_edges(family_mesh(config, size), s)
                except (PolyDGError, np.linalg.LinAlgError) as e:
                    logger.warning(f"Could not shrink {label}: {e}")
                    rows.append(ResultRow(mesh=label, error=f"{type(e).__name__}: {e}"))
                    continue
                logger.info(f"{label}: min edge {quality_report(mesh).min_edge:.3e}")
                rows.append(_solve_row(config, label, mesh, k))
            exponent = round(-math.log2(s)) if s < 1 else 0
            tables.append(
                ResultsTable(name=f"{config.name}-k{k}-s{exponent}", rows=rows).with_rates()
            )
    return StudyResult(kind=config.kind, tables=tables)


RUNNERS = {
    "h_convergence": run_h_convergence,
    "k_robustness": run_k_robustness,
    "delta_sensitivity": run_delta_sensitivity,
    "edge_shrink": run_edge_shrink,
}


def run_study(config: ExperimentConfig) -> tuple[StudyResult, list[Path]]:
    """Run the configured study, logging events to `<output>/events.jsonl`, and write its tables."""
    folder = config.output_folder
    with tlog.log_to(folder / "events.jsonl"):
        with tlog.context("study", kind=config.kind, name=config.name) as ctx:
            result = RUNNERS[config.kind](config)
            ctx.update(failed_rows=result.failed_rows)
    written: list[Path] = []
    for table in result.tables:
        written.extend(emit_outputs(table, folder))
    if config.kind == "k_robustness":
        written.append(emit_ratios(result.ratios, folder / f"{config.name}.ratios.csv"))
    return result, written
