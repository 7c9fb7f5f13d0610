class QPError(Exception):
    """Base class for library errors."""


class ConfigError(QPError, ValueError):
    pass


class NumericError(QPError, ArithmeticError):
    pass


class ConvergenceError(NumericError):
    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class QuadratureError(NumericError):
    pass


class SingularSystemError(NumericError):
    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class AmbiguousCertificateError(NumericError):
    """A vanishing-order test could not separate zero from non-zero residuals."""


class UnsupportedOperationError(QPError, NotImplementedError):
    pass


class MissingDerivativeError(QPError, ValueError):
    pass


class MemoryGuardError(QPError, MemoryError):
    pass
