class PolyDGError(Exception):
    """Base class for all errors raised by polydg."""


class MeshError(PolyDGError):
    """Raised when a mesh is malformed or cannot be generated."""


class NonStarShapedCellError(MeshError):
    """Raised when a cell is not star-shaped with respect to its computed center."""

    def __init__(self, cell: int, area: float):
        self.cell = cell
        self.area = area
        super().__init__(
            f"Cell {cell} is not star-shaped w.r.t. its center (sub-triangle area {area:.3e})"
        )


class ReferenceMeshTooLargeError(PolyDGError):
    """Raised when the reference triangle mesh would exceed the configured node cap."""


class LiftingError(PolyDGError):
    """Raised when the discrete Neumann lifting on the reference triangle cannot be solved."""


class SingularStabilizerError(PolyDGError):
    """Raised when a physical stabilization block is not positive definite."""

    def __init__(self, message: str, cell: int | None = None):
        self.cell = cell
        super().__init__(message if cell is None else f"Cell {cell}: {message}")


class SingularLocalSystemError(PolyDGError):
    """Raised when the local saddle system of a cell cannot be factorized."""

    def __init__(self, cell: int, message: str = "local system is singular"):
        self.cell = cell
        super().__init__(f"Cell {cell}: {message}")


class SolverError(PolyDGError):
    """Raised when the global skeleton system cannot be solved to tolerance."""

    def __init__(self, message: str, residual: float = float("nan"), norm_estimate: float = float("nan")):
        self.residual = residual
        self.norm_estimate = norm_estimate
        super().__init__(
            f"{message} (relative residual {residual:.3e}, condition estimate {norm_estimate:.3e})"
        )


class ConfigError(PolyDGError, ValueError):
    """Raised when an experiment configuration is invalid."""
