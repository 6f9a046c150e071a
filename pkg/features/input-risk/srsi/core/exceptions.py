"""
Custom exceptions for risk set inference.
"""


class SrsiError(Exception):
    """Base exception for risk set inference errors."""

    def __init__(self, message: str, original_error: Exception = None):
        self.message = message
        self.original_error = original_error
        super().__init__(self.message)


class InputModelError(SrsiError):
    """Error in real-world data or the Dirichlet input model."""

    def __init__(self, message: str, source_index: int = None):
        self.source_index = source_index
        super().__init__(message)


class DegeneratePosteriorError(InputModelError):
    """The posterior has no interior mode."""
    pass


class DataFileError(SrsiError):
    """Error reading an observation or frequency file."""

    def __init__(self, message: str, file_path: str, line_number: int = None):
        self.file_path = file_path
        self.line_number = line_number
        super().__init__(message)


class KernelError(SrsiError):
    """Invalid kernel parameters or mismatched kernel inputs."""

    def __init__(self, message: str, parameter_name: str = None):
        self.parameter_name = parameter_name
        super().__init__(message)


class FactorizationError(SrsiError):
    """Cholesky factorization failed even after adding jitter."""

    def __init__(self, message: str, jitter: float = None, original_error: Exception = None):
        self.jitter = jitter
        super().__init__(message, original_error)


class NumericalDegeneracyError(SrsiError):
    """A predictive quantity became non-positive or non-finite."""

    def __init__(self, message: str, quantity: str = None):
        self.quantity = quantity
        super().__init__(message)


class SimulationError(SrsiError):
    """Error raised by a stochastic simulator."""

    def __init__(self, message: str, problem: str = None, pair: tuple = None,
                 checkpoint_path: str = None, original_error: Exception = None):
        self.problem = problem
        self.pair = pair
        self.checkpoint_path = checkpoint_path
        super().__init__(message, original_error)


class ConfigurationError(SrsiError):
    """Error in an experiment spec or run configuration."""

    def __init__(self, message: str, key: str = None, line: int = None):
        self.key = key
        self.line = line
        super().__init__(message)


class ValidationError(SrsiError):
    """A domain value violates its invariants."""

    def __init__(self, message: str, field_name: str = None, field_value=None):
        self.field_name = field_name
        self.field_value = field_value
        super().__init__(message)


class CheckpointError(SrsiError):
    """Checkpoint file is corrupt or has an unsupported version."""

    def __init__(self, message: str, file_path: str = None):
        self.file_path = file_path
        super().__init__(message)
