"""Exception hierarchy.

Every error carries a ``kind`` tag so the command-line layer can map it to a
structured error object and an exit status without inspecting messages.
"""


class MusielakError(Exception):
    """Base class for all library errors."""

    kind = "computation"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class DomainError(MusielakError, ValueError):
    kind = "domain"


class RangeError(MusielakError, IndexError):
    kind = "range"


class PreconditionError(MusielakError, ValueError):
    kind = "precondition"


class ValidationError(MusielakError, ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    kind = "validation"

    def __init__(self, message, path="", **details):
        super().__init__(message, path=path, **details)
        self.path = path

    def __str__(self):
        msg = super().__str__()
        return f"{self.path}: {msg}" if self.path else msg


class TruncationError(MusielakError, ArithmeticError):
    """A truncated series did not certify; ``partial`` holds the value reached."""

    kind = "truncation"

    def __init__(self, message, partial=None, **details):
        super().__init__(message, partial=partial, **details)
        self.partial = partial


class DivergenceError(MusielakError, ArithmeticError):
    kind = "divergence"


class DegeneracyError(MusielakError, ArithmeticError):
    kind = "degeneracy"


class UsageError(MusielakError):
    """Invalid combination of command-line inputs."""

    kind = "usage"
