"""Exception hierarchy shared by all modules."""


class PrecanonicalError(Exception):
    """Base class for every error raised by this package."""


class MetricMismatch(PrecanonicalError, ValueError):
    pass


class InvalidParameter(PrecanonicalError, ValueError):
    pass


class ConvergenceFailure(PrecanonicalError, ArithmeticError):
    pass


class UnsupportedDegree(PrecanonicalError, ValueError):
    pass


class NotHamiltonian(PrecanonicalError, ValueError):
    """The polysymplectic map has no solution for the given form."""


class UndefinedBracketDegree(PrecanonicalError, ValueError):
    pass


class InvalidSolutionData(PrecanonicalError, ValueError):
    pass


class InvalidDomain(PrecanonicalError, ValueError):
    pass


class TachyonicMode(PrecanonicalError, ValueError):
    pass


class SingularHJNorm(PrecanonicalError, ZeroDivisionError):
    pass


class DecompositionFailure(PrecanonicalError, ValueError):
    """A hypercomplex amplitude cannot be written as R exp(i S.gamma / hbar kappa)."""
