# superdec/core/exceptions.py
"""
Exception hierarchy for superdec.

Every error raised on purpose by the package derives from SuperDecError, so
callers (the CLI in particular) can tell domain failures apart from bugs.
"""

from typing import Any, Optional


class SuperDecError(Exception):
    """Base exception for all superdec errors."""

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self), "field": None}


class ShapeError(SuperDecError):
    """Raised when tensor extents do not satisfy an operation's contract."""

    def __init__(self, message: str, dimension: Optional[str] = None,
                 expected: Any = None, actual: Any = None):
        self.dimension = dimension
        self.expected = expected
        self.actual = actual
        if dimension is not None:
            message = f"{message} (dimension {dimension}: expected {expected}, got {actual})"
        super().__init__(message)


class DTypeError(SuperDecError):
    """Raised when operands of one op carry different dtypes."""
    pass


class GraphError(SuperDecError):
    """Raised on misuse of the differentiation graph (double backward, non-scalar loss)."""
    pass


class WaveletError(SuperDecError):
    """Raised for invalid wavelet inputs: odd extents, inconsistent bands, zero energy."""
    pass


class NonFiniteError(SuperDecError):
    """Raised when a function under test produces NaN or Inf."""
    pass


class ConfigError(SuperDecError):
    """Raised for malformed specs or experiment configs."""

    def __init__(self, message: str, field_path: Optional[str] = None):
        self.field_path = field_path
        super().__init__(message)

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self), "field": self.field_path}


class TrainingDivergedError(SuperDecError):
    """Raised when the loss or a gradient becomes non-finite during training."""

    def __init__(self, epoch: int, batch: int, layer: Optional[str], detail: str = ""):
        self.epoch = epoch
        self.batch = batch
        self.layer = layer
        message = f"non-finite value at epoch {epoch}, batch {batch}, first bad layer {layer}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class CheckpointError(SuperDecError):
    """Raised when a checkpoint directory is missing files or mismatches its model."""
    pass


class GoldenFormatError(SuperDecError):
    """Raised for malformed SUPT tensor files."""
    pass
