"""Exception hierarchy."""


class QlspError(Exception):
    """Base class for every error raised by this package."""


class InputValidationError(QlspError, ValueError):
    pass


class NumericalFailureError(QlspError, ArithmeticError):
    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class InvalidSparsityError(InputValidationError):
    pass


class RankDeficiencyError(QlspError):
    pass


class DegenerateDecompositionError(QlspError):
    """Raised when v_{N+1} has (numerically) no weight on the last coordinate."""


class NormalizationError(InputValidationError):
    def __init__(self, message, norm):
        super().__init__(message)
        self.norm = norm


class DegreeOverflowError(QlspError):
    pass


class PhaseSolveError(QlspError):
    def __init__(self, message, residual, phases=None):
        super().__init__(message)
        self.residual = residual
        self.phases = phases


class ParityError(InputValidationError):
    pass


class NoDecayError(QlspError):
    def __init__(self, message, record):
        super().__init__(message)
        self.record = record


class EstimationFailureError(QlspError):
    pass


class PostSelectionStarvationError(QlspError):
    def __init__(self, message, rate):
        super().__init__(message)
        self.rate = rate


class SolvePhaseError(QlspError):
    """Wraps a failure inside :func:`qlspsim.driver.solve` with the phase it came from."""

    def __init__(self, phase, cause):
        super().__init__(f"{phase}: {type(cause).__name__}: {cause}")
        self.phase = phase
        self.cause = cause
