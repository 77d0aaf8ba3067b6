"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: validation problems exit 1, data
problems exit 2, internal inconsistencies exit 3.
"""


class ProcmpError(Exception):
    """Base class for all package errors."""


class InvalidWindowError(ProcmpError, ValueError):
    """Window length is out of range for the given series."""


class InvalidDataError(ProcmpError, ValueError):
    """Input values are unusable: non-finite, wrong length, wrong domain."""


class DegenerateWindowError(ProcmpError, ValueError):
    """A constant window was passed to an operation that cannot handle one."""


class InsufficientLengthError(ProcmpError, ValueError):
    """Series too short to give every window an admissible neighbor."""


class MetricMismatchError(ProcmpError, ValueError):
    """Requested metric is incompatible with the channel kind."""


class ParseError(ProcmpError, ValueError):
    """A file could not be parsed; message names the offending location."""


class SchemaError(ProcmpError, ValueError):
    """Structurally valid input with an inconsistent schema."""


class SpecError(ProcmpError, ValueError):
    """A synthesis spec is malformed or self-contradictory."""


class VerificationError(ProcmpError, RuntimeError):
    """Fast path and reference path disagree."""
