"""Exception hierarchy shared across the package."""


class CavmagError(Exception):
    """Base class for all errors raised by cavmag."""


class ParameterError(CavmagError, ValueError):
    """Model parameters outside the supported region."""


class RejectedDrive(ParameterError):
    """Parametric drive at or beyond the bare-cavity instability bound."""


class RejectedSign(ParameterError):
    """A rate or detuning that must be positive is not."""


class MissingPhysicalConstants(CavmagError, ValueError):
    pass


class ZeroCoupling(CavmagError, ValueError):
    pass


class NumericalInconsistency(CavmagError, ArithmeticError):
    """A closed-form identity failed beyond its stated tolerance."""


class ConvergenceFailure(CavmagError, ArithmeticError):
    pass


class StepSizeUnderflow(CavmagError, ArithmeticError):
    """The adaptive step-size controller fell below its floor."""


class SingularSystem(CavmagError, ArithmeticError):
    def __init__(self, message, condition=float("inf")):
        super().__init__(message)
        self.condition = condition


class InsufficientWindow(CavmagError, ValueError):
    pass


class NotApplicable(CavmagError, ValueError):
    pass


class ConfigParse(CavmagError, ValueError):
    """Invalid run configuration; ``key`` names the offending entry."""

    def __init__(self, message, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.key = key
        self.line = line
