import pytest

from polydg.mesh.model import PolygonalMesh
from tests.polydg.helpers import square_grid


@pytest.fixture
def grid2() -> PolygonalMesh:
    return square_grid(2)
