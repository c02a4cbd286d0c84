from pathlib import Path

import pandas as pd
import pytest

from polydg.experiments.outputs import CSV_COLUMNS, ResultRow, ResultsTable, emit_outputs, emit_ratios, read_results
from tests.polydg.helpers import DOFS, ERRORS, RATES


def _table() -> ResultsTable:
    rows = [
        ResultRow(mesh=f"hexa-n{i}", dofs=dofs, e_u_1=e1, e_u_0=0.1 * e1, seconds=None)
        for i, (dofs, e1) in enumerate(zip(DOFS, ERRORS))
    ]
    return ResultsTable(name="h-k1", rows=rows).with_rates()


def test_with_rates() -> None:
    """Rates fill every row but the first."""
    table = _table()
    assert table.rows[0].ecr_1 is None
    assert [row.ecr_1 for row in table.rows[1:]] == pytest.approx(RATES, abs=1e-4)
    assert [row.ecr_0 for row in table.rows[1:]] == pytest.approx(RATES, abs=1e-4)


def test_failed_rows_break_rates() -> None:
    """A failed row gets no rate and stops the next one."""
    rows = _table().rows
    rows[2] = ResultRow(mesh="hexa-n2", error="SolverError: boom")
    table = ResultsTable(name="t", rows=[row.model_copy(update=dict(ecr_1=None, ecr_0=None)) for row in rows]).with_rates()
    assert table.failed_rows == 1
    assert table.rows[1].ecr_1 is not None
    assert table.rows[2].ecr_1 is None and table.rows[3].ecr_1 is None
    assert table.rows[4].ecr_1 is not None


def test_emit_outputs(tmp_path: Path) -> None:
    """CSV has the fixed header; empty rates and timings are empty fields."""
    csv_path, plot_path = emit_outputs(_table(), tmp_path)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1].startswith("hexa-n0,7500,0.2616061,,")
    assert lines[1].endswith(",")
    plot = pd.read_csv(plot_path)
    assert list(plot.columns) == ["series", "log10_dofs", "log10_e_u_1", "log10_e_u_0"]
    assert len(plot) == len(DOFS)


def test_read_results_round_trip(tmp_path: Path) -> None:
    """Written tables read back with the same values and missing entries."""
    table = _table()
    csv_path, _ = emit_outputs(table, tmp_path)
    loaded = read_results(csv_path)
    assert loaded.name == "h-k1"
    for original, row in zip(table.rows, loaded.rows):
        assert row == original


def test_emit_empty_table(tmp_path: Path) -> None:
    """Empty tables are refused."""
    with pytest.raises(ValueError):
        emit_outputs(ResultsTable(name="empty"), tmp_path)


def test_read_results_checks_header(tmp_path: Path) -> None:
    """Files with other columns are not results tables."""
    path = tmp_path / "other.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="columns"):
        read_results(path)


def test_emit_ratios(tmp_path: Path) -> None:
    """Decay ratios are written one k per row."""
    path = emit_ratios([(1, 1.2), (2, 1.1)], tmp_path / "ratios.csv")
    assert path.read_text().splitlines() == ["k,ratio", "1,1.2", "2,1.1"]
