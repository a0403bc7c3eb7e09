"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: InputError -> 2, DataError -> 3,
ConvergenceError -> 4.
"""


class SemspaceError(Exception):
    """Base class for all package errors."""


class InputError(SemspaceError):
    """Unreadable, malformed or inconsistent input files and arguments."""


class DataError(SemspaceError):
    """Vocabulary or dataset problems: unknown words, empty projections,
    too few valid items, degenerate vectors."""


class ConvergenceError(SemspaceError):
    """An iterative numerical solver failed to converge."""
