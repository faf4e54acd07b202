"""Exception hierarchy.

``ParameterError`` subclasses signal invalid input (bad family parameters,
malformed specs) and ``NumericalError`` subclasses signal a computation that
could not be carried out for otherwise valid input.  The CLI maps the first
group to exit code 2 and the second to exit code 1.
"""


class TrirecError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(TrirecError, ValueError):
    pass


class NumericalError(TrirecError, ArithmeticError):
    pass


class IndexedError:
    """Mixin carrying the recursion index at which a failure was detected."""

    def __init__(self, n, message=None):
        self.n = int(n)
        super().__init__(message or f"{type(self).__name__} at n={self.n}")


class ZeroUpCoupling(IndexedError, NumericalError):
    pass


class NonFiniteCoefficient(IndexedError, NumericalError):
    pass


class PositivityFailure(IndexedError, NumericalError):
    pass


class SingularAn(IndexedError, ParameterError):
    pass


class DegenerateTheta(ParameterError):
    pass


class DegenerateBeta(ParameterError):
    pass


class ParamOutOfRange(ParameterError):
    pass


class BadR(ParameterError):
    pass


class BadD(ParameterError):
    pass


class EmptyTruncation(ParameterError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class IndefiniteTruncation(IndexedError, NumericalError):
    """The truncated recursion is neither Favard-positive nor definitizable."""


class FlatSequence(NumericalError):
    pass


class FitDegenerate(NumericalError):
    pass


class NoMinimum(NumericalError):
    pass


class UnknownRow(ParameterError):
    pass


class MissingEnergy(ParameterError):
    pass


class UnrealizableParams(ParameterError):
    pass


class ConstraintViolation(ParameterError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
