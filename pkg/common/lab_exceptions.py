class DomainError(ValueError):
    """Raised when a parameter lies outside its mathematical domain."""
    pass

class ConstraintError(ValueError):
    """Raised when a tensor is not symmetric or not traceless."""
    pass

class NumericError(ArithmeticError):
    """Raised when a state is non-finite or an internal cross-check disagrees."""
    pass

class SolverError(RuntimeError):
    """Raised when the profile solver fails to converge."""

    def __init__(self, message: str, residual_norm: float, last_iterate=None, t: float = None):
        super().__init__(message)
        self.residual_norm = residual_norm
        self.last_iterate = last_iterate
        self.t = t

class PreconditionError(ValueError):
    """Raised when an operation receives inputs it cannot work with."""
    pass

class DiagnosticError(RuntimeError):
    """Raised when a diagnostic quantity cannot be computed."""
    pass

class FactorizationError(RuntimeError):
    """Raised when a shifted pencil stays singular after shift perturbation."""
    pass

class ConfigError(ValueError):
    """Raised when a run configuration is invalid or carries unknown keys."""
    pass

class DocumentError(ValueError):
    """Raised when a stored document does not match the expected schema."""
    pass
