"""Exception types shared across the package."""


class StructuralError(ValueError):
    """Mismatched shapes, register sizes, indices or malformed circuits."""


class ParameterError(ValueError):
    """A numeric argument is outside its allowed range."""


class ResourceError(RuntimeError):
    """A dense object would exceed the configured register cap."""


class NumericError(ArithmeticError):
    """A linear-algebra step failed (singular system, non-positive matrix, ...)."""


class EngineError(RuntimeError):
    """An evolution engine failed part-way through a run."""

    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"step {step}: {message}")
        self.step = step
