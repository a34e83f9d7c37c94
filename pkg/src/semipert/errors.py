"""Exception hierarchy shared by all modules."""


class SemipertError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(SemipertError, ValueError):
    pass


class DimensionError(SemipertError, ValueError):
    pass


class InvalidExponentError(SemipertError, ValueError):
    pass


class InvalidTimeError(SemipertError, ValueError):
    pass


class InvalidKernelError(SemipertError, ValueError):
    pass


class ResolventSetError(SemipertError, ArithmeticError):
    """``lambda - G`` is singular or ``lambda`` lies below the admissible threshold."""

    def __init__(self, message, lam=None):
        super().__init__(message)
        self.lam = lam


class EulerStepError(SemipertError, ArithmeticError):
    """``I - tG/n`` could not be factorized."""

    def __init__(self, message, t=None, n=None):
        super().__init__(message)
        self.t = t
        self.n = n


class UnsupportedError(SemipertError):
    pass


class PreconditionError(SemipertError):
    """A theorem hypothesis required by a check does not hold."""

    def __init__(self, message, criterion=None):
        super().__init__(message)
        self.criterion = criterion


class ScenarioError(SemipertError):
    """Scenario file could not be parsed or validated; ``where`` names the field."""

    def __init__(self, message, where=None):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where
