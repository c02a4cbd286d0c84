import os
from pathlib import Path


def friendly_name(name: str) -> str:
    return name.replace("/", "__").replace(" ", "_")


def ensure_dir(dir: os.PathLike | str) -> Path:
    path = Path(dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def sibling(path: os.PathLike | str, suffix: str) -> Path:
    """Return `path` with its last suffix replaced, e.g. `out.csv` -> `out.flux.csv`."""
    path = Path(path)
    return path.with_name(f"{path.stem}{suffix}")
