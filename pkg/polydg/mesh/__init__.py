from polydg.mesh.generators import (
    generate_hexagonal_mesh,
    generate_voronoi_mesh,
    shrink_vertical_edges,
    single_cell_mesh,
)
from polydg.mesh.io import load_mesh, save_mesh
from polydg.mesh.model import BoundaryTag, Point2, PolygonalMesh, build_mesh
from polydg.mesh.quality import MeshQualityReport, chebyshev_center, quality_report
from polydg.mesh.subtriangulation import CellSplit, SubTriangulation, subtriangulate
