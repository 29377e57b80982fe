"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`ExpansionError`, so callers can catch the whole family at once.
"""


class ExpansionError(Exception):
    """Base class for all package errors."""


class DomainError(ExpansionError, ValueError):
    """An argument lies outside the domain of the operation."""


class InvalidLambda(DomainError):
    """The large parameter has real part <= 1/2."""


class InvalidAnchor(DomainError):
    """A Minus problem was anchored at the singular point z = 0."""


class OffSegment(DomainError):
    """A point that must lie on the segment (or path) does not."""


class AnchorOrder(DomainError):
    """An evaluation point is not strictly closer to the origin than the anchor."""


class OriginError(DomainError):
    """Evaluation at z = 0 of a quantity that carries z**(1 - 2*lambda)."""


class KindMismatch(ExpansionError, TypeError):
    """Operation applied to the wrong kind of problem."""


class BackendMismatch(ExpansionError, TypeError):
    """Coefficient backends (polynomial / grid) were mixed."""


class GridMismatch(ExpansionError, ValueError):
    """Two grid functions (or a plan and a function) live on different grids."""


class PoleError(DomainError):
    """Argument sits on a pole (nonpositive integer) of Gamma or a Pochhammer symbol."""


class NoConvergence(ExpansionError, ArithmeticError):
    """A series or iteration failed to converge within its budget."""


class AccuracyError(ExpansionError, ArithmeticError):
    """A quadrature self-check (step halving) disagreed beyond tolerance."""


class NotConverged(ExpansionError, ValueError):
    """A bound was requested from an expansion that did not converge."""


class SingularMatch(ExpansionError, ArithmeticError):
    """The 2x2 initial-data matching system is numerically singular."""


class ConfigError(ExpansionError, ValueError):
    """Malformed or inconsistent run configuration."""
