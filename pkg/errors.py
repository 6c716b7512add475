"""Exception hierarchy and the exit codes the CLI reports for each."""

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class CovselectError(Exception):
    """Base class for all errors raised by covselect."""

    exit_code = EXIT_NUMERIC


class DomainError(CovselectError, ValueError):
    """An argument lies outside the domain of the operation."""


class DataError(CovselectError):
    """A table could not be read as a rectangular block of finite numbers."""

    exit_code = EXIT_DATA

    def __init__(self, message: str, row: int | None = None, column: int | str | None = None):
        self.row = row
        self.column = column
        if row is not None and column is not None:
            message = f"{message} (row {row}, column {column})"
        super().__init__(message)


class DegenerateResponseError(DomainError):
    """The response has zero centered sum of squares."""


class DegenerateFitError(DomainError):
    """The current residual sum of squares is already zero."""


class CollinearityError(DomainError):
    """A candidate column is numerically inside the span of the active set."""


class ExpansionSizeError(DomainError):
    """An interaction expansion would not fit in the configured memory."""

    def __init__(self, count: int, n_rows: int, limit: int):
        self.count = count
        super().__init__(
            f"interaction expansion needs {count} columns x {n_rows} rows, "
            f"above the limit of {limit} cells"
        )


class ConvergenceError(CovselectError):
    """The incomplete beta continued fraction did not converge."""
