"""Exception hierarchy shared by every module.

The CLI maps :class:`InputError` subclasses to exit code 1 and
:class:`MathError` subclasses to exit code 2.
"""


class HypersurfError(Exception):
    """Base class for all package errors."""


class InputError(HypersurfError, ValueError):
    """Malformed user input: expressions, configs, parameters."""


class ParseError(InputError):
    """Syntax error or unknown identifier in an expression source."""

    def __init__(self, message, position=None, source=None):
        self.position = position
        self.source = source
        if position is not None:
            message = f"{message} (at position {position})"
            if source is not None:
                message += f"\n  {source}\n  {' ' * position}^"
        super().__init__(message)


class ConstraintError(InputError):
    """A family or solver parameter violates a documented constraint."""


class MathError(HypersurfError, ArithmeticError):
    """A numerical or mathematical failure during evaluation."""


class DomainError(MathError):
    """Function evaluated outside its domain (log of a non-positive number, 1/0, ...)."""


class NonSmoothPointError(DomainError):
    """Derivative requested at a point where the function is not differentiable."""


class QuadratureError(MathError):
    pass


class DegenerateError(MathError):
    """Degenerate geometric configuration (singular metric, g' = 0, zero gradient)."""
