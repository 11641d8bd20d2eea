"""Exception hierarchy shared across the package."""


class CellshotError(Exception):
    """Base class for all library errors."""


class CalibrationError(CellshotError):
    """Tuning-constant search could not bracket the target."""


class DegenerateDesignError(CellshotError):
    """Design matrix (or a weighted sub-design) has no usable variation."""


class DegenerateResponseError(CellshotError):
    """Response has zero MAD; scale-relative tolerances are undefined."""


class InitializationError(CellshotError):
    """Starting-value regression failed (e.g. rank-deficient Huberized design)."""


class EstimationError(CellshotError):
    """An estimator could not produce a fit."""


class IngestionError(CellshotError):
    """CSV input is malformed, non-numeric, or has missing cells."""
