"""Line-oriented text format for polygonal meshes.

    polymesh 1
    vertices N
    x y                      (N lines, full precision)
    cells M
    v0 v1 v2 ...             (M lines, counterclockwise, 0-based)
    boundary B               (optional)
    v0 v1 tag                (B lines, tag in {dirichlet, neumann})
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from loguru import logger

from polydg.errors import MeshError
from polydg.mesh.model import BOUNDARY_CONDITIONS, BoundaryTag, PolygonalMesh, build_mesh
from polydg.utils import format_float

__all__ = ["load_mesh", "save_mesh", "MESH_FORMAT"]

MESH_FORMAT = "polymesh"
MESH_VERSION = 1


def save_mesh(mesh: PolygonalMesh, path: os.PathLike | str) -> Path:
    path = Path(path)
    lines = [f"{MESH_FORMAT} {MESH_VERSION}", f"vertices {len(mesh.vertices)}"]
    lines += [f"{format_float(x)} {format_float(y)}" for x, y in mesh.vertices]
    lines.append(f"cells {mesh.n_cells}")
    lines += [" ".join(str(int(v)) for v in loop) for loop in mesh.cells]
    boundary = mesh.boundary_edges
    lines.append(f"boundary {len(boundary)}")
    lines += [f"{mesh.edges[e, 0]} {mesh.edges[e, 1]} {mesh.edge_tags[e]}" for e in boundary]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    logger.debug(f"Wrote mesh with {mesh.n_cells} cells to {path}")
    return path


def _section(lines: list[str], pos: int, name: str) -> tuple[int, int]:
    if pos >= len(lines):
        raise MeshError(f"Parse error: expected section '{name}', got end of file")
    parts = lines[pos].split()
    if len(parts) != 2 or parts[0] != name:
        raise MeshError(f"Parse error on line {pos + 1}: expected '{name} <count>', got {lines[pos]!r}")
    try:
        count = int(parts[1])
    except ValueError as e:
        raise MeshError(f"Parse error on line {pos + 1}: bad count {parts[1]!r}") from e
    if pos + 1 + count > len(lines):
        raise MeshError(f"Parse error: section '{name}' is truncated")
    return count, pos + 1


def load_mesh(path: os.PathLike | str, format: str = MESH_FORMAT) -> PolygonalMesh:
    if format != MESH_FORMAT:
        raise ValueError(f"Unsupported mesh format {format!r}")
    lines = [line.strip() for line in Path(path).read_text().splitlines()]
    lines = [line for line in lines if line and not line.startswith("#")]
    if not lines or lines[0].split() != [MESH_FORMAT, str(MESH_VERSION)]:
        raise MeshError(f"Parse error: missing '{MESH_FORMAT} {MESH_VERSION}' header in {path}")

    try:
        n_vertices, pos = _section(lines, 1, "vertices")
        vertices = np.array([[float(t) for t in line.split()] for line in lines[pos : pos + n_vertices]])
        if vertices.shape != (n_vertices, 2):
            raise MeshError("Parse error: vertex lines must hold exactly two numbers")
        n_cells, pos = _section(lines, pos + n_vertices, "cells")
        cells = [[int(t) for t in line.split()] for line in lines[pos : pos + n_cells]]
        pos += n_cells
        tags: dict[tuple[int, int], BoundaryTag] = {}
        if pos < len(lines):
            n_boundary, pos = _section(lines, pos, "boundary")
            for line in lines[pos : pos + n_boundary]:
                v0, v1, tag = line.split()
                a, b = int(v0), int(v1)
                boundary_tag = BoundaryTag(tag.lower())
                if boundary_tag not in BOUNDARY_CONDITIONS:
                    raise MeshError(f"Parse error: boundary edge {a} {b} tagged {tag!r}; expected dirichlet or neumann")
                tags[(min(a, b), max(a, b))] = boundary_tag
    except ValueError as e:
        raise MeshError(f"Parse error in {path}: {e}") from e

    mesh = build_mesh(vertices, cells, boundary_tags=tags)
    logger.debug(f"Loaded mesh with {mesh.n_cells} cells from {path}")
    return mesh
