"""Exception hierarchy shared by every engine in the package."""


class LegendreError(Exception):
    """Base class for all package errors."""


class ExpressionSyntaxError(LegendreError, SyntaxError):
    """Malformed expression text. ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, text: str = "", offset: int = 0):
        self.text_source = text
        self.offset_bytes = offset
        super().__init__(f"{message} (at byte {offset})")
        self.msg = message
        self.offset = offset


class UnknownFunction(LegendreError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown function {name!r}")


class DomainError(LegendreError, ValueError):
    """A value lies outside the domain where an operation is defined."""


class NonFinite(LegendreError, ArithmeticError):
    """Overflow or NaN produced while propagating a computation."""


class SingularCurvature(LegendreError, ArithmeticError):
    """Second derivative too close to zero for the dual-jet recursion."""


class QuadratureFailure(LegendreError, ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""


class EmptyFeasibleSet(LegendreError, ValueError):
    """No grid point yields a feasible split for the infimal convolution."""


class InvalidParameter(LegendreError, ValueError):
    pass


class NotFound(LegendreError, KeyError):
    pass


class DivisionByZero(LegendreError, ZeroDivisionError):
    pass
