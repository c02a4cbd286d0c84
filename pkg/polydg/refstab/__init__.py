from polydg.refstab.fem import (
    ReferenceTriangleFEM,
    build_reference_fem,
    lift_neumann,
    structured_triangle_mesh,
)
from polydg.refstab.stabilizer import (
    PhysicalTriangleData,
    ReferenceStabilizer,
    build_reference_stabilizer,
    default_delta,
    get_reference_stabilizer,
    push_forward,
)
