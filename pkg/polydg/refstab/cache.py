"""Binary on-disk cache for reference stabilizers.

A cache file holds one JSON header line (format version, parameters, array names and
shapes) followed by the arrays as raw little-endian float64, in header order.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np
from loguru import logger

from polydg.refstab.fem import subdivisions_for
from polydg.refstab.stabilizer import ReferenceStabilizer, build_reference_stabilizer
from polydg.utils.io import ensure_dir

__all__ = ["cache_path", "load_or_build", "read_stabilizer", "write_stabilizer"]

FORMAT_VERSION = 1
_ARRAYS = (
    "nodal",
    "stiffness",
    "metric_stiffness",
    "edge_moments",
    "values",
    "gradients",
    "trace_values",
)


def cache_path(cache_dir: os.PathLike | str, kprime: int, delta: float, projection_degree: int) -> Path:
    m = subdivisions_for(delta)
    return Path(cache_dir) / f"refstab_k{kprime}_m{m}_d{projection_degree}.bin"


def write_stabilizer(stab: ReferenceStabilizer, path: os.PathLike | str) -> Path:
    path = Path(path)
    ensure_dir(path.parent)
    arrays = {name: np.ascontiguousarray(getattr(stab, name), dtype="<f8") for name in _ARRAYS}
    header = {
        "version": FORMAT_VERSION,
        "kprime": stab.kprime,
        "delta": stab.delta,
        "m": stab.m,
        "projection_degree": stab.projection_degree,
        "rank_deficient": stab.rank_deficient,
        "arrays": [{"name": name, "shape": list(a.shape)} for name, a in arrays.items()],
    }
    tmp = path.with_suffix(".tmp")
    with open(tmp, "wb") as f:
        f.write(json.dumps(header).encode() + b"\n")
        for a in arrays.values():
            f.write(a.tobytes())
    tmp.replace(path)
    logger.debug(f"Wrote reference stabilizer cache {path}")
    return path


def read_stabilizer(path: os.PathLike | str) -> tuple[dict, ReferenceStabilizer]:
    """Parse a cache file; raises ValueError if it is truncated or of another version."""
    with open(path, "rb") as f:
        header = json.loads(f.readline())
        if header.get("version") != FORMAT_VERSION:
            raise ValueError(f"Unsupported cache version {header.get('version')} in {path}")
        fields = {}
        for entry in header["arrays"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape))
            data = np.frombuffer(f.read(8 * count), dtype="<f8")
            if data.size != count:
                raise ValueError(f"Truncated array {entry['name']} in {path}")
            fields[entry["name"]] = data.reshape(shape).astype(float)
        if f.read(1):
            raise ValueError(f"Trailing bytes in {path}")
    stab = ReferenceStabilizer(
        kprime=header["kprime"],
        delta=header["delta"],
        m=header["m"],
        projection_degree=header["projection_degree"],
        rank_deficient=header["rank_deficient"],
        **fields,
    )
    return header, stab


def load_or_build(
    kprime: int, delta: float, projection_degree: int, cache_dir: os.PathLike | str
) -> ReferenceStabilizer:
    path = cache_path(cache_dir, kprime, delta, projection_degree)
    if path.exists():
        try:
            header, stab = read_stabilizer(path)
        except (ValueError, KeyError, json.JSONDecodeError) as e:
            logger.warning(f"Ignoring unreadable stabilizer cache {path}: {e}")
        else:
            if header["kprime"] == kprime and header["delta"] == delta:
                logger.debug(f"Loaded reference stabilizer from {path}")
                return stab
            logger.info(f"Stabilizer cache {path} was built for other parameters; rebuilding")
    stab = build_reference_stabilizer(kprime, delta, projection_degree=projection_degree)
    write_stabilizer(stab, path)
    return stab
