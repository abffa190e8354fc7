"""Exception hierarchy shared by all modules."""


class CasimirError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(CasimirError, ValueError):
    """Argument outside the supported domain of a special function."""


class StarShapeViolation(CasimirError, ValueError):
    """A curve is not star-shaped about the expansion origin, or two curves
    are not properly nested."""


class SingularCollocation(CasimirError, ArithmeticError):
    """A collocation matrix is numerically singular."""


class NonConvergence(CasimirError, RuntimeError):
    """A quadrature or series did not reach the requested tolerance."""


class ConfigError(CasimirError, ValueError):
    """Invalid run configuration."""

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class InvariantViolation(CasimirError, ArithmeticError):
    """``ln Q(iy)`` came out positive or with a non-negligible imaginary part."""
