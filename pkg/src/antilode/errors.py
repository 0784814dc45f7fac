"""Exception types shared across the package."""


class ParseError(ValueError):
    """An expression string could not be parsed.

    Carries the character offset of the offending token and a description
    of what was expected there.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position
        self.bare_message = message


class EvaluationError(ArithmeticError):
    """An expression evaluated to a non-finite value (overflow, 0/0)."""


class InvalidProblemError(ValueError):
    """Problem data violates a precondition of the requested operation."""


class CompatibilityError(InvalidProblemError):
    """Forcing or initial data break the structural pairing g2 = i*conj(g1),
    u2(0) = i*conj(u1(0)) that the decoupled nonhomogeneous route needs."""

    def __init__(self, message: str, deviation: float):
        super().__init__(message)
        self.deviation = deviation


class SolverFailure(RuntimeError):
    """Time stepping produced a non-finite state."""

    def __init__(self, message: str, x: float | None = None):
        super().__init__(message)
        self.x = x
