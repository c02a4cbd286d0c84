import math
from pathlib import Path
from typing import Annotated, Optional

import numpy as np
import typer

from polydg.assembly.local import cell_quadrature
from polydg.experiments.config import ExperimentConfig, MethodConfig
from polydg.experiments.runner import run_study
from polydg.mesh.generators import (
    generate_hexagonal_mesh,
    generate_voronoi_mesh,
    shrink_vertical_edges,
    single_cell_mesh,
)
from polydg.mesh.io import load_mesh, save_mesh
from polydg.mesh.quality import quality_report
from polydg.mesh.subtriangulation import split_cell
from polydg.norms.dual import build_probe, dual_seminorm, gradient_functional, stabilizer_spectral_bounds
from polydg.norms.errors import compute_errors
from polydg.norms.inverse import verify_negative_inverse
from polydg.problem import cosine_problem
from polydg.solver.driver import solve_problem
from polydg.solver.solution import save_solution
from polydg.utils.logging import logger
from polydg.utils.paths import CACHE_DIR, CONFIGS_DIR

app = typer.Typer(help="Hybridized polygonal DG for the Poisson problem with minus-one stabilization.")
mesh_app = typer.Typer(help="Generate, inspect and distort polygonal meshes.")
diag_app = typer.Typer(help="Numerical checks of the stabilization theory.")
app.add_typer(mesh_app, name="mesh")
app.add_typer(diag_app, name="diag")

STUDY_KINDS = {
    "h": "h_convergence",
    "k": "k_robustness",
    "delta": "delta_sensitivity",
    "shrink": "edge_shrink",
}


def _print_key_values(values: dict) -> None:
    for key, value in values.items():
        print(f"{key}={value!r}")


@mesh_app.command("gen")
def mesh_gen(
    output: Annotated[Path, typer.Option("-o", "--output", help="Where to write the mesh")],
    family: Annotated[
        str, typer.Option(help="Mesh family: hexa, voro or cvt")
    ] = "hexa",
    n: Annotated[
        int, typer.Option(help="Hexagons per side (hexa) or number of seeds (voro, cvt)")
    ] = 8,
    seed: Annotated[int, typer.Option(help="Random seed for Voronoi seeds")] = 0,
    lloyd: Annotated[
        Optional[int], typer.Option(help="Lloyd iterations (default 0 for voro, 50 for cvt)")
    ] = None,
) -> None:
    """Generate a mesh of the unit square."""
    match family:
        case "hexa":
            mesh = generate_hexagonal_mesh(n)
        case "voro" | "cvt":
            iterations = lloyd if lloyd is not None else (50 if family == "cvt" else 0)
            mesh = generate_voronoi_mesh(count=n, seed=seed, lloyd_iterations=iterations)
        case _:
            raise typer.BadParameter(f"Unknown mesh family {family!r}")
    save_mesh(mesh, output)
    logger.info(f"Written mesh to {output}")


@mesh_app.command("check")
def mesh_check(
    mesh_file: Annotated[Path, typer.Argument(help="Mesh file to inspect")],
) -> None:
    """Print shape-regularity diagnostics as key=value lines."""
    for line in quality_report(load_mesh(mesh_file)).to_key_values():
        print(line)


@mesh_app.command("shrink")
def mesh_shrink(
    mesh_file: Annotated[Path, typer.Argument(help="Mesh file to distort")],
    s: Annotated[float, typer.Option(help="Shrink factor in (0, 1]")],
    output: Annotated[Path, typer.Option("-o", "--output", help="Where to write the mesh")],
) -> None:
    """Shrink the interior vertical edges of a mesh."""
    save_mesh(shrink_vertical_edges(load_mesh(mesh_file), s), output)
    logger.info(f"Written mesh to {output}")


@app.command()
def solve(
    mesh_file: Annotated[Path, typer.Option("--mesh", help="Mesh file")],
    k: Annotated[int, typer.Option(help="Polynomial degree of the cell space")],
    output: Annotated[Path, typer.Option("-o", "--output", help="CSV file for the u coefficients")],
    kprime: Annotated[str, typer.Option(help="Flux/trace degree rule: k or k-1")] = "k",
    alpha: Annotated[float, typer.Option(help="Stabilization parameter")] = 1.0,
    t: Annotated[int, typer.Option(help="Sign of the test-side stabilization, 1 or -1")] = 1,
    delta_rule: Annotated[
        str, typer.Option(help="Reference mesh size rule: ksq, kinv or const:<real>")
    ] = "ksq",
    tol: Annotated[float, typer.Option(help="Relative residual tolerance")] = 1e-12,
    workers: Annotated[Optional[int], typer.Option(help="Threads for per-cell work")] = None,
) -> None:
    """Solve the manufactured cosine problem on a mesh and write the solution coefficients."""
    method = MethodConfig(
        kprime=kprime, alpha=alpha, t=t, delta=delta_rule, tol=tol,
        **({} if workers is None else dict(workers=workers)),
    )
    kp = method.kprime_for(k)
    mesh = load_mesh(mesh_file)
    problem = cosine_problem()
    outcome = solve_problem(
        mesh,
        problem,
        k=k,
        kprime=kp,
        alpha=method.alpha,
        t=method.t,
        delta=method.delta_for(kp),
        tol=method.tol,
        workers=method.workers,
        cache_dir=CACHE_DIR,
    )
    written = save_solution(outcome.solution, output)
    errors = compute_errors(outcome.solution, problem.exact, problem.exact_gradient, workers=method.workers)
    _print_key_values(
        dict(
            dofs=errors.dofs,
            free_trace_dofs=outcome.skeleton.n_free,
            residual=outcome.residual,
            method=outcome.method,
            symmetric=outcome.system.is_symmetric,
            e_u_1=errors.e_u_1,
            e_u_0=errors.e_u_0,
        )
    )
    logger.info(f"Written solution to {', '.join(str(p) for p in written)}")


@diag_app.command("infsup")
def diag_infsup(
    k: Annotated[int, typer.Option(help="Degree of the monomial used for the |Du|_-1 check")] = 1,
    kprime: Annotated[int, typer.Option(help="Flux degree k'")] = 1,
    cell: Annotated[str, typer.Option(help="Cell shape: square or hexagon")] = "square",
    delta: Annotated[Optional[float], typer.Option(help="Reference mesh size (default rule if unset)")] = None,
) -> None:
    """Spectral bounds of s_K against the dual seminorm on one cell."""
    if k < 1:
        raise typer.BadParameter(f"k must be at least 1, got {k}")
    mesh = single_cell_mesh(cell)
    bounds = stabilizer_spectral_bounds(mesh, 0, kprime, delta=delta)

    # |Du|_{-1,K} <= |u|_{1,K} for u = x^k
    def gradient(p: np.ndarray) -> np.ndarray:
        return np.column_stack([k * p[:, 0] ** (k - 1), np.zeros(len(p))])

    split = split_cell(mesh, 0)
    dual = dual_seminorm(build_probe(split), gradient_functional(gradient, 2 * k))
    points, weights = cell_quadrature(split, 2 * k)
    seminorm = math.sqrt(float(weights @ np.sum(gradient(points) ** 2, axis=1)))
    _print_key_values(
        dict(
            cell=cell,
            kprime=kprime,
            dimension=bounds.dimension,
            rho=bounds.rho,
            M=bounds.M,
            rho_log=bounds.rho * math.log(kprime + 2),
            dual_Du=dual.value,
            dual_Du_extrapolated=dual.extrapolated,
            seminorm_u=seminorm,
        )
    )


@diag_app.command("inverse")
def diag_inverse(
    kmax: Annotated[int, typer.Option(help="Largest polynomial degree")] = 16,
    kmin: Annotated[int, typer.Option(help="Smallest polynomial degree")] = 2,
) -> None:
    """Growth of ||p||_0 / ||p||_{H^1_0'} over P_k on the unit interval."""
    for line in verify_negative_inverse(range(kmin, kmax + 1)).to_key_values():
        print(line)


@app.command()
def study(
    kind: Annotated[str, typer.Argument(help="Study kind: h, k, delta or shrink")],
    config_file: Annotated[
        Optional[Path], typer.Option("--config", help="YAML study configuration; defaults to the shipped one for KIND")
    ] = None,
    seed: Annotated[Optional[int], typer.Option(help="Override the mesh seed")] = None,
) -> None:
    """Run a convergence or robustness study and write its CSV tables."""
    if kind not in STUDY_KINDS:
        raise typer.BadParameter(f"Unknown study kind {kind!r}; expected one of {', '.join(STUDY_KINDS)}")
    if config_file is None:
        config_file = CONFIGS_DIR / f"{STUDY_KINDS[kind]}.yaml"
    config = ExperimentConfig.from_yaml(config_file)
    if config.kind != STUDY_KINDS[kind]:
        raise typer.BadParameter(f"{config_file} configures {config.kind}, not {STUDY_KINDS[kind]}")
    if seed is not None:
        config = config.model_copy(update=dict(mesh=config.mesh.model_copy(update=dict(seed=seed))))
    result, written = run_study(config)
    for path in written:
        print(path)
    if result.failed_rows:
        logger.warning(f"{result.failed_rows} row(s) failed; see {config.output_folder / 'events.jsonl'}")
        raise typer.Exit(code=2)
