"""Exception hierarchy shared by every module of the package."""


class VimoError(Exception):
    """Base class for all package errors."""


class DimensionError(VimoError, ValueError):
    """Operands live in spaces of different dimension."""


class NonFiniteError(VimoError, ValueError):
    """A coordinate or oracle value is NaN or infinite where a finite value is required."""


class InfeasibleError(VimoError, ValueError):
    """A point lies outside the admissible set, or a set turned out to be empty."""


class ExtendedRealError(VimoError, ArithmeticError):
    """Undefined extended-real arithmetic such as ``inf - inf``."""


class NonConvexError(VimoError, ValueError):
    """A function declared convex failed the sampled convexity test."""


class PreconditionError(VimoError, ValueError):
    """An operation was called outside its documented preconditions."""
