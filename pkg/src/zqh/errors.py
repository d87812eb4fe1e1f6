"""Exception types raised across the package.

Indices carried by exceptions are 1-based, matching the level numbering
used in the documentation (levels ``1..M``, couplings ``1..M-1``).
"""


class ZqhError(Exception):
    """Base class for every error raised by this package."""


class LengthMismatch(ZqhError, ValueError):
    pass


class NonFiniteEntry(ZqhError, ValueError):
    pass


class DimMismatch(ZqhError, ValueError):
    pass


class OrientationMismatch(ZqhError, ValueError):
    pass


class DimTooSmall(ZqhError, ValueError):
    pass


class DimTooLarge(ZqhError, ValueError):
    pass


class _IndexedError(ZqhError, ValueError):
    """Error pointing at one (1-based) position."""

    what = "index"

    def __init__(self, index, message=None):
        self.index = int(index)
        super().__init__(message or f"{type(self).__name__} at {self.what} {self.index}")


class SingularMatrix(_IndexedError, ArithmeticError):
    what = "index"


class DegenerateSpectrum(_IndexedError):
    """Adjacent diagonal entries ``a_k`` and ``a_{k+1}`` are (numerically) equal."""

    what = "k"


class ZeroOddCoupling(_IndexedError):
    what = "odd j"


class NotPositiveDefinite(_IndexedError, ArithmeticError):
    what = "pivot"


class NonPositiveKappa(_IndexedError):
    what = "n"


class NotProportional(_IndexedError):
    what = "column"


class NotSymmetric(ZqhError, ValueError):
    pass


class SingularFactor(ZqhError, ArithmeticError):
    pass


class NotHermitianResult(ZqhError, ArithmeticError):
    pass


class NoNullspace(ZqhError, ArithmeticError):
    pass


class AmbiguousNullspace(ZqhError, ArithmeticError):
    pass


class BadFamilyParam(ZqhError, ValueError):
    pass


class SchemaError(ZqhError, ValueError):
    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")


class ValidationError(ZqhError, ValueError):
    pass
