"""Exception hierarchy shared by every module."""


class AGTError(Exception):
    """Base class for all errors raised by this package."""


class CertificateError(AGTError):
    """A certificate could not be established; carries the partial certificate."""

    def __init__(self, message, certificate=None, witness=None):
        super().__init__(message)
        self.certificate = certificate
        self.witness = witness


class DisjointnessViolation(CertificateError):
    pass


class InclusionFailure(CertificateError):
    pass


class OrderTooSmall(CertificateError):
    pass


class CertFailure(CertificateError):
    pass


class PipelineStuck(CertificateError):
    def __init__(self, stage, message, diagnostics=None):
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage
        self.diagnostics = diagnostics or {}


class MemoryBudgetExceeded(AGTError):
    pass


class SizeLimit(AGTError):
    pass


class NotGenerating(AGTError):
    pass


class ConvergenceFailure(AGTError):
    pass


class NotPrime(AGTError, ValueError):
    pass


class PrimeMismatch(AGTError, ValueError):
    pass


class DivisionByZero(AGTError, ZeroDivisionError):
    pass


class PrecisionExhausted(AGTError, ArithmeticError):
    pass


class SingularBasis(AGTError, ValueError):
    pass


class DeterminantNotOne(AGTError, ValueError):
    pass


class NumericalFailure(AGTError, ArithmeticError):
    pass


class NotDiverging(AGTError, ValueError):
    pass


class SearchExhausted(AGTError):
    pass


class NormsTooLarge(AGTError, ValueError):
    pass
