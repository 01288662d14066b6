"""Exception types raised across the package."""


class ValidationError(ValueError):
    """Input failed a structural or numerical precondition."""


class MatchgateError(ValidationError):
    """A 4x4 unitary is not a (valid) matchgate.

    ``reason`` is ``"pattern"`` when the parity zero-pattern is violated and
    ``"determinant"`` when only the det(a) == det(b) condition fails. In the
    latter case the extracted blocks are attached as ``a`` and ``b``.
    """

    def __init__(self, message, reason, a=None, b=None):
        super().__init__(message)
        self.reason = reason
        self.a = a
        self.b = b


class ReconstructionError(RuntimeError):
    """Tomographic reconstruction could not be carried out."""


class CalibrationError(RuntimeError):
    """Experiment calibration could not meet its targets."""
