"""Exception types shared across the toolkit.

Each class carries the process exit code the CLI maps it to.
"""


class AlphauthorError(Exception):
    exit_code = 1


class InvalidNameError(AlphauthorError, ValueError):
    """An author name that is empty after canonicalization."""

    exit_code = 4


class UndefinedMetricError(AlphauthorError, ValueError):
    """A per-publication metric requested for fewer than two authors."""

    exit_code = 4


class FormatError(AlphauthorError, ValueError):
    """A file that does not follow the expected schema."""

    exit_code = 4


class EmptyCorpusError(AlphauthorError):
    exit_code = 6


class ValidationFailure(AlphauthorError):
    """The estimator missed its Monte Carlo tolerance."""

    exit_code = 5


EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_FORMAT = FormatError.exit_code
EXIT_VALIDATION = ValidationFailure.exit_code
EXIT_EMPTY = EmptyCorpusError.exit_code
