"""Exception types shared across the engine."""


class MasterfunError(Exception):
    """Base class for all engine errors."""


class RingDivisionError(MasterfunError, ZeroDivisionError):
    """Division by the zero rational function."""


class EvalDomainError(MasterfunError, ValueError):
    """Numeric evaluation requested at a point outside the allowed domain
    (vanishing denominator, pole of a basis function, or a twist exponent
    outside the admissible strip)."""


class GradingError(MasterfunError, ValueError):
    """Incompatible truncation orders, or a series precondition on the
    beta^0 grade is violated."""


class TwistError(MasterfunError, ValueError):
    """A power prefactor does not cancel where the algebra requires it to
    (for instance a net eta-twist left inside a contour integrand)."""


class SolvabilityError(MasterfunError, ArithmeticError):
    """A difference equation that should be solvable in the coth basis is
    not: nonvanishing unshifted component, or shifted components that fail
    to match after the solve."""


class CheckFailure(MasterfunError, AssertionError):
    """An exact identity check produced a nonzero residual."""


class QuadratureError(MasterfunError, ArithmeticError):
    """Principal-value quadrature did not converge to the requested
    accuracy."""
