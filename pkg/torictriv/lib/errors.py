# Exceptions raised across torictriv.
# The CLI maps families of these onto process exit codes (see cli/__init__.py).


class TorictrivError(Exception):
    """Base class for all errors raised by torictriv."""


class ParseError(TorictrivError, ValueError):
    """A problem or certificate file could not be parsed.

    Carries the 1-based ``line`` and ``column`` of the offending token
    when they are known.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class ValidationError(TorictrivError, ValueError):
    """Input is well-formed but inconsistent (dimensions, weights, gradings)."""


class ResourceError(TorictrivError, RuntimeError):
    """An enumeration budget or a configured size limit was exceeded."""


class NotInvertible(TorictrivError, ArithmeticError):
    pass


class NotInvariant(TorictrivError, ValueError):
    pass


class StructuralViolation(TorictrivError, ValueError):
    """A graded object has nonzero entries where its grading forbids them."""


class PreconditionFailed(TorictrivError, ValueError):
    pass


class DegenerateLift(TorictrivError, ArithmeticError):
    pass


class UnsupportedFactorization(TorictrivError):
    """The cover factorization engine cannot split the given automorphism."""


class GluingMismatch(TorictrivError, AssertionError):
    """Two local isomorphisms failed to agree on an overlap."""


class VerificationFailure(TorictrivError):
    """A certificate identity did not hold when replayed.

    ``identity`` names the first failing check.
    """

    def __init__(self, identity, message=""):
        self.identity = identity
        super().__init__(f"identity '{identity}' failed" + (f": {message}" if message else ""))
