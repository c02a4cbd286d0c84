"""Results tables and their CSV / plot-data files."""

from __future__ import annotations

import math
import os
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, Field

from polydg.norms.errors import estimated_convergence_rate
from polydg.utils.io import ensure_dir, friendly_name

__all__ = [
    "CSV_COLUMNS",
    "ResultRow",
    "ResultsTable",
    "emit_outputs",
    "emit_ratios",
    "read_results",
]

CSV_COLUMNS = ["mesh", "dofs", "e_u_1", "ecr_1", "e_u_0", "ecr_0", "seconds"]
PLOT_COLUMNS = ["series", "log10_dofs", "log10_e_u_1", "log10_e_u_0"]


class ResultRow(BaseModel):
    mesh: str = Field(description="Mesh identifier")
    dofs: int | None = None
    e_u_1: float | None = None
    ecr_1: float | None = None
    e_u_0: float | None = None
    ecr_0: float | None = None
    seconds: float | None = None
    error: str | None = Field(None, description="Why the row failed, if it did")

    @property
    def failed(self) -> bool:
        return self.error is not None or self.e_u_1 is None


class ResultsTable(BaseModel):
    name: str
    rows: list[ResultRow] = Field(default_factory=list)

    @property
    def failed_rows(self) -> int:
        return sum(row.failed for row in self.rows)

    def with_rates(self) -> ResultsTable:
        """Fill ecr_1 / ecr_0 against dofs between consecutive successful rows."""
        rows = [row.model_copy() for row in self.rows]
        for previous, row in zip(rows, rows[1:]):
            if previous.failed or row.failed or not previous.e_u_1 or not row.e_u_1:
                continue
            dofs = [previous.dofs, row.dofs]
            row.ecr_1 = estimated_convergence_rate([previous.e_u_1, row.e_u_1], dofs=dofs)[1]
            if previous.e_u_0 and row.e_u_0:
                row.ecr_0 = estimated_convergence_rate([previous.e_u_0, row.e_u_0], dofs=dofs)[1]
        return self.model_copy(update=dict(rows=rows))

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame([row.model_dump() for row in self.rows], columns=CSV_COLUMNS)
        frame["dofs"] = frame["dofs"].astype("Int64")
        return frame


def emit_outputs(table: ResultsTable, directory: os.PathLike | str) -> tuple[Path, Path]:
    """Write `<name>.csv` and `<name>.plot.csv`; missing values are written as empty fields."""
    if not table.rows:
        raise ValueError(f"Results table {table.name!r} is empty")
    directory = ensure_dir(directory)
    stem = friendly_name(table.name)
    csv_path = directory / f"{stem}.csv"
    plot_path = directory / f"{stem}.plot.csv"
    table.to_frame().to_csv(csv_path, index=False, na_rep="")

    plot_rows = [
        (table.name, math.log10(row.dofs), math.log10(row.e_u_1), math.log10(row.e_u_0))
        for row in table.rows
        if not row.failed and row.dofs and row.e_u_1 and row.e_u_0
    ]
    pd.DataFrame(plot_rows, columns=PLOT_COLUMNS).to_csv(plot_path, index=False)
    logger.info(f"Wrote {csv_path} and {plot_path}")
    return csv_path, plot_path


def emit_ratios(ratios: Sequence[tuple[int, float]], path: os.PathLike | str) -> Path:
    path = Path(path)
    ensure_dir(path.parent)
    pd.DataFrame(list(ratios), columns=["k", "ratio"]).to_csv(path, index=False)
    return path


def _optional(value) -> float | None:
    if value is None or (isinstance(value, float) and np.isnan(value)) or value is pd.NA:
        return None
    return float(value)


def read_results(path: os.PathLike | str, name: str | None = None) -> ResultsTable:
    frame = pd.read_csv(
        path, float_precision="round_trip", dtype={"mesh": str, "dofs": "Int64"}, keep_default_na=True
    )
    if list(frame.columns) != CSV_COLUMNS:
        raise ValueError(f"Unexpected columns {list(frame.columns)} in {path}")
    rows = [
        ResultRow(
            mesh=record["mesh"],
            dofs=None if record["dofs"] is pd.NA else int(record["dofs"]),
            **{key: _optional(record[key]) for key in CSV_COLUMNS[2:]},
        )
        for record in frame.to_dict(orient="records")
    ]
    return ResultsTable(name=name or Path(path).stem, rows=rows)
