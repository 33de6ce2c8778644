"""Exception hierarchy shared by every module."""


class VofracError(Exception):
    """Base class for all package errors."""

    code = "vofrac"


class ParseError(VofracError, ValueError):
    code = "parse"

    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = tuple(sorted(set(expected)))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class DomainError(VofracError, ValueError):
    code = "domain"


class PoleError(DomainError):
    """Gamma/digamma evaluated at a non-positive integer."""

    code = "pole"


class BandCrossingError(VofracError, ValueError):
    code = "band"


class ExponentError(VofracError, ValueError):
    code = "exponent"


class PoleGuardError(VofracError, ArithmeticError):
    code = "pole_guard"


class ResolutionError(VofracError, ValueError):
    code = "resolution"


class SingularCalibration(VofracError, ArithmeticError):
    code = "singular_calibration"


class ZeroPivot(VofracError, ArithmeticError):
    code = "zero_pivot"


class FormatError(VofracError, ValueError):
    code = "format"

    def __init__(self, message, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class NonUniformGrid(FormatError):
    code = "nonuniform"
