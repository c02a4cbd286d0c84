import time

import pytest

from polydg.utils.parallel import map_cells


@pytest.mark.parametrize("workers", [1, 4])
def test_map_cells_preserves_order(workers: int) -> None:
    """Results come back in input order whatever the scheduling."""

    def slow_square(x: int) -> int:
        time.sleep(0.001 * (10 - x))
        return x * x

    assert list(map_cells(slow_square, range(10), workers=workers)) == [x * x for x in range(10)]


def test_map_cells_propagates_errors() -> None:
    """An exception in one cell surfaces to the caller."""

    def fail_on_three(x: int) -> int:
        if x == 3:
            raise ValueError("cell 3")
        return x

    with pytest.raises(ValueError, match="cell 3"):
        map_cells(fail_on_three, range(5), workers=2)
