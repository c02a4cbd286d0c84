from polydg.experiments.config import (
    ExperimentConfig,
    MeshFamilyConfig,
    MethodConfig,
    parse_delta_rule,
    parse_kprime_rule,
)
from polydg.experiments.outputs import ResultRow, ResultsTable, emit_outputs, read_results
from polydg.experiments.runner import (
    StudyResult,
    run_delta_sensitivity,
    run_edge_shrink,
    run_h_convergence,
    run_k_robustness,
    run_study,
)
