"""Exception hierarchy shared across the package."""


class MMIBoostError(Exception):
    """Base class for all package errors."""


class DataError(MMIBoostError, ValueError):
    """Malformed, inconsistent or unusable input data."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalError(MMIBoostError, ArithmeticError):
    """A numerical routine could not produce a valid result."""


class BoostingError(NumericalError):
    """Boosting stopped before completing a single round.

    The log of the failed round is kept on ``self.log``.
    """

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = log


class LPError(NumericalError):
    """Linear-program failure that is not a plain infeasible/unbounded status."""


class LPIterationLimitError(LPError):
    pass


class ModelFileError(DataError):
    pass


class ModelVersionError(ModelFileError):
    pass


class ModelTruncatedError(ModelFileError):
    pass


class ModelSchemaError(ModelFileError):
    pass
