from polydg.assembly.hybrid import (
    CondensedElement,
    LocalHybridSystem,
    LocalSpaces,
    assemble_local_hybrid,
    static_condense,
)
from polydg.assembly.local import (
    assemble_boundary_coupling,
    assemble_volume_stiffness,
    cell_basis,
    load_vector,
)
from polydg.assembly.stabilization import (
    StabilizationBlocks,
    assemble_stabilization,
    stabilization_form,
)
