"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` (bad input, the
request cannot be honoured) and :class:`NumericalFailure` (the input was
fine but a numerical contract could not be met at the requested tolerance).
The command-line front end maps them to exit codes 1 and 2.
"""


class CQMError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CQMError, ValueError):
    pass


class NumericalFailure(CQMError, ArithmeticError):
    pass


class NotHermitian(ValidationError):
    def __init__(self, deviation, tol):
        super().__init__(f"matrix is not Hermitian: deviation {deviation:.3e} > tol {tol:.3e}")
        self.deviation = deviation
        self.tol = tol


class NonFinite(ValidationError):
    pass


class DimMismatch(ValidationError):
    pass


class ConvergenceFailure(NumericalFailure):
    pass


class NotCommuting(ValidationError):
    def __init__(self, i, j, residual):
        super().__init__(f"observables {i} and {j} do not commute (residual {residual:.3e})")
        self.i = i
        self.j = j
        self.residual = residual


class FamilyTooLarge(ValidationError):
    pass


class NotInContext(ValidationError):
    pass


class UnassignedContext(ValidationError):
    pass


class NoContainingContext(ValidationError):
    pass


class InconsistentIntersection(NumericalFailure):
    pass


class ContextMismatch(ValidationError):
    pass


class DegenerateGround(ValidationError):
    pass


class NotGroundState(ValidationError):
    pass


class NotPositive(ValidationError):
    pass


class TruncationInsufficient(NumericalFailure):
    pass


class InvalidInstance(ValidationError):
    pass
