"""Exception hierarchy shared by the library and the command-line tool."""


class EntangleCertError(Exception):
    """Base class for all errors raised by entanglecert."""


class NonHermitianInput(EntangleCertError, ValueError):
    pass


class InvalidState(EntangleCertError, ValueError):
    pass


class NonUnitDirection(EntangleCertError, ValueError):
    pass


class ZeroProbabilityBranch(EntangleCertError, ValueError):
    pass


class ZeroStrength(EntangleCertError, ValueError):
    pass


class MissingDirection(EntangleCertError, KeyError):
    pass


class MissingExpectation(EntangleCertError, KeyError):
    pass


class EmptyCounts(EntangleCertError, ValueError):
    pass


class OutOfRange(EntangleCertError, ValueError):
    pass


class ParseError(EntangleCertError):
    """Malformed configuration document."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class ValidationError(EntangleCertError):
    """A configuration value is well-formed but not allowed."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(message)
