"""Exception types shared across the package."""


class DataValidationError(ValueError):
    """Raised when input data violate the documented file or schema contracts."""


class SingularSystemError(RuntimeError):
    """Raised when a citation system lacks the structure a method needs,
    e.g. a journal that gives no citations or a graph with no cross-journal
    links at all."""


class ConvergenceError(RuntimeError):
    """Raised when power iteration fails to meet its residual tolerance
    within the configured iteration budget."""


class ResampleBudgetError(RuntimeError):
    """Raised when a bootstrap iteration exhausts its redraw budget without
    producing a usable resample."""
