"""Declarative study configurations, loaded from flat YAML files."""

from __future__ import annotations

import math
import os
from collections.abc import Callable
from pathlib import Path
from typing import Literal, Self

import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from polydg.errors import ConfigError
from polydg.refstab.stabilizer import default_delta
from polydg.utils.paths import CACHE_DIR, OUTPUT_DIR, default_workers

__all__ = [
    "ExperimentConfig",
    "MeshFamilyConfig",
    "MethodConfig",
    "parse_delta_rule",
    "parse_kprime_rule",
]

type ExperimentKind = Literal["h_convergence", "k_robustness", "delta_sensitivity", "edge_shrink"]

DEFAULT_DELTA_RULES = ["ksq", "kinv", "const:0.25", "const:0.125"]
DEFAULT_SHRINK_FACTORS = [1.0, 2.0**-4, 2.0**-8, 2.0**-16, 2.0**-32]
DEFAULT_LLOYD_ITERATIONS = 50


def parse_delta_rule(rule: str) -> Callable[[int], float]:
    """Map a δ rule (`ksq`, `kinv` or `const:<x>`) to a function of k'."""
    rule = rule.strip()
    if rule == "ksq":
        return default_delta
    if rule == "kinv":
        return lambda kprime: 1.0 / max(kprime, 1)
    if rule.startswith("const:"):
        try:
            value = float(rule.removeprefix("const:"))
        except ValueError as e:
            raise ConfigError(f"Invalid constant delta in rule {rule!r}") from e
        if not 0.0 < value <= 1.0:
            raise ConfigError(f"Constant delta must lie in (0, 1], got {value}")
        return lambda kprime: value
    raise ConfigError(f"Unknown delta rule {rule!r}; expected ksq, kinv or const:<real>")


def parse_kprime_rule(rule: str) -> Callable[[int], int]:
    match rule.strip():
        case "k":
            return lambda k: k
        case "k-1":
            return lambda k: k - 1
        case _:
            raise ConfigError(f"Unknown k' rule {rule!r}; expected k or k-1")


class MeshFamilyConfig(BaseModel):
    family: Literal["hexa", "voro", "cvt"] = Field("hexa", description="Mesh family")
    sizes: list[int] = Field(
        default_factory=lambda: [8, 16, 32, 64],
        description="Hexagons per side (hexa) or number of seeds (voro, cvt), one per refinement level",
    )
    seed: int = Field(0, description="Random seed for Voronoi seeds")
    lloyd_iterations: int | None = Field(
        None, description="Lloyd iterations (default 0 for voro, 50 for cvt)"
    )

    @property
    def iterations(self) -> int:
        if self.lloyd_iterations is not None:
            return self.lloyd_iterations
        return DEFAULT_LLOYD_ITERATIONS if self.family == "cvt" else 0

    @model_validator(mode="after")
    def check_sizes(self) -> Self:
        if not self.sizes:
            raise ValueError("At least one mesh size is required")
        minimum = 2 if self.family == "hexa" else 4
        if min(self.sizes) < minimum:
            raise ValueError(f"{self.family} mesh sizes must be at least {minimum}")
        if self.lloyd_iterations is not None and self.lloyd_iterations < 0:
            raise ValueError("lloyd_iterations must be non-negative")
        return self


class MethodConfig(BaseModel):
    kprime: Literal["k", "k-1"] = Field("k", description="Degree rule of the flux/trace spaces")
    alpha: float = Field(1.0, description="Stabilization parameter α > 0")
    t: Literal[1, -1] = Field(1, description="Sign of the test-side stabilization")
    delta: str = Field("ksq", description="Reference mesh size rule: ksq, kinv or const:<real>")
    tol: float = Field(1e-12, description="Relative residual tolerance of the skeleton solve")
    workers: int = Field(default_factory=default_workers, description="Threads for per-cell work")

    @model_validator(mode="after")
    def check_method(self) -> Self:
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0.0 < self.tol < 1.0:
            raise ValueError(f"tol must lie in (0, 1), got {self.tol}")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        parse_delta_rule(self.delta)
        return self

    def kprime_for(self, k: int) -> int:
        return parse_kprime_rule(self.kprime)(k)

    def delta_for(self, kprime: int, rule: str | None = None) -> float:
        return parse_delta_rule(rule or self.delta)(kprime)


class ExperimentConfig(BaseModel):
    name: str = Field(description="Name of the study; used for the output folder and file names")
    kind: ExperimentKind
    mesh: MeshFamilyConfig = Field(default_factory=MeshFamilyConfig)
    ks: list[int] = Field(default_factory=lambda: [1, 2, 3], description="Polynomial degrees k")
    method: MethodConfig = Field(default_factory=MethodConfig)
    wavenumber: float = Field(8.0 * math.pi, description="a in u = cos(ax)cos(ay)/(2a^2)")
    delta_rules: list[str] = Field(
        default_factory=lambda: list(DEFAULT_DELTA_RULES), description="δ rules compared by delta_sensitivity"
    )
    shrink_factors: list[float] = Field(
        default_factory=lambda: list(DEFAULT_SHRINK_FACTORS), description="Edge shrink factors s for edge_shrink"
    )
    timings: bool = Field(False, description="Record wall time in the seconds column; tables are then no longer reproducible")
    output_dir: Path = Field(default_factory=lambda: OUTPUT_DIR, description="Parent folder of the study outputs")
    cache_dir: Path | None = Field(default_factory=lambda: CACHE_DIR, description="Reference stabilizer cache")

    @model_validator(mode="after")
    def check_experiment(self) -> Self:
        if not self.ks or min(self.ks) < 1:
            raise ValueError("All polynomial degrees k must be at least 1")
        for rule in self.delta_rules:
            parse_delta_rule(rule)
        if any(not 0.0 < s <= 1.0 for s in self.shrink_factors):
            raise ValueError("Shrink factors must lie in (0, 1]")
        if self.kind == "edge_shrink" and self.mesh.family != "hexa":
            raise ValueError("edge_shrink needs the hexa mesh family")
        return self

    @property
    def output_folder(self) -> Path:
        return self.output_dir / self.name

    @classmethod
    def from_yaml(cls, yaml_file: os.PathLike | str) -> Self:
        with open(yaml_file, "r") as f:
            data = yaml.safe_load(f)
        try:
            return cls.model_validate(data or {})
        except (ValidationError, ConfigError) as e:
            raise ConfigError(f"Invalid configuration {yaml_file}: {e}") from e
