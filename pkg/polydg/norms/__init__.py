from polydg.norms.dual import (
    DualNormEstimate,
    DualNormProbe,
    SpectralBounds,
    build_probe,
    dual_seminorm,
    edge_functional,
    gradient_functional,
    source_functional,
    stabilizer_spectral_bounds,
)
from polydg.norms.errors import ErrorReport, compute_errors, estimated_convergence_rate
from polydg.norms.inverse import (
    NegativeInverseReport,
    negative_inverse_ratio,
    verify_negative_inverse,
)
