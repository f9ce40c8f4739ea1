__doc__ = """Exceptions raised by memnet.

Every error refines a builtin (ValueError for bad input, RuntimeError for a build that
could not be completed) and carries the process exit code the command line uses for it.
"""

__all__ = [
    "MemnetError",
    "InputShapeError",
    "InvalidArgument",
    "ArchitectureError",
    "InvalidTargetError",
    "DuplicateInputError",
    "LabelRangeError",
    "BuildError",
    "DirectionSearchError",
    "CompressionInfeasibleError",
    "CertificateError",
    "ApproxSearchError",
    "TransformBudgetError",
    "NumericOverflowError",
]


class MemnetError(Exception):
    """
    Base class for all memnet errors
    """

    exit_code = 2


class InputShapeError(MemnetError, ValueError):
    """Vector or row has the wrong length, or a file could not be parsed."""

    exit_code = 2


class InvalidArgument(MemnetError, ValueError):
    exit_code = 2


class ArchitectureError(MemnetError, ValueError):
    """Layer widths violate a construction precondition."""

    exit_code = 2


class InvalidTargetError(MemnetError, ValueError):
    exit_code = 2


class DuplicateInputError(MemnetError, ValueError):
    """Two dataset points are exactly equal."""

    exit_code = 3


class LabelRangeError(MemnetError, ValueError):
    exit_code = 3


class BuildError(MemnetError, RuntimeError):
    """
    A construction stage could not produce its network
    """

    exit_code = 4
    default_stage = "build"

    def __init__(self, message, stage=None):
        """
        :param message: human readable description
        :param stage: name of the failing construction stage
        """
        super().__init__(message)
        self.stage = stage or self.default_stage


class DirectionSearchError(BuildError):
    default_stage = "projection"


class CompressionInfeasibleError(BuildError):
    default_stage = "compression"


class CertificateError(BuildError):
    default_stage = "certificate"


class ApproxSearchError(BuildError):
    default_stage = "sigmoid"


class TransformBudgetError(BuildError):
    default_stage = "sigmoid"


class NumericOverflowError(BuildError, ArithmeticError):
    default_stage = "evaluate"
