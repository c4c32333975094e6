"""Exception and warning types raised by mellin_sampler."""


class MellinSamplerError(Exception):
    """Base class for all library errors."""

    code = "error"


class DomainError(MellinSamplerError, ValueError):
    code = "domain-error"


class ParameterError(MellinSamplerError, ValueError):
    code = "parameter-error"


class LatticeSizeError(MellinSamplerError, OverflowError):
    code = "size-overflow"


class NormOverflowError(MellinSamplerError, OverflowError):
    code = "overflow"


class ConvergenceError(MellinSamplerError, ArithmeticError):
    code = "non-convergence"


class ConcentrationError(MellinSamplerError, ArithmeticError):
    """Measured delta left [0, 1] by more than the clamping slack."""

    code = "concentration-out-of-range"


class RejectionExhaustedError(MellinSamplerError):
    code = "rejection-exhausted"

    def __init__(self, message, best_delta):
        super().__init__(message)
        self.best_delta = best_delta


class TailMassWarning(UserWarning):
    pass


class EdgeMassWarning(UserWarning):
    pass


class CostWarning(UserWarning):
    pass
