"""Exception hierarchy shared by all modules."""


class GreentailError(Exception):
    """Base class for library errors."""


class ParameterError(GreentailError, ValueError):
    """Invalid parameter or argument combination."""


class DomainError(ParameterError):
    """Argument outside the domain where a quantity is defined."""


class ConvergenceError(GreentailError, RuntimeError):
    """A numerical procedure failed to reach its tolerance."""


class DegreeOverflowError(GreentailError, OverflowError):
    """Raw polynomial magnitude exceeds the floating point range."""
