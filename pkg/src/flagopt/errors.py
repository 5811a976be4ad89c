"""Exception hierarchy shared by all flagopt modules."""


class FlagOptError(Exception):
    """Base class for every error raised by flagopt."""


class NotSkew(FlagOptError, ValueError):
    pass


class NotSymmetric(FlagOptError, ValueError):
    pass


class NotOrthonormal(FlagOptError, ValueError):
    pass


class NotOrthogonal(NotOrthonormal):
    pass


class NotTangent(FlagOptError, ValueError):
    pass


class DimensionError(FlagOptError, ValueError):
    pass


class ArityMismatch(DimensionError):
    pass


class IndexOutOfRange(FlagOptError, IndexError):
    pass


class BadSignature(FlagOptError, ValueError):
    pass


class BaseMismatch(FlagOptError, ValueError):
    """Two tangent objects live at different base points."""


class BadInstance(FlagOptError, ValueError):
    pass


class NoConvergence(FlagOptError, RuntimeError):
    pass


class LineSearchFailed(FlagOptError, RuntimeError):
    pass


class SubproblemUnavailable(FlagOptError, TypeError):
    """The objective has no exact sub-problem solver for coordinate minimization."""
