"""Exception hierarchy shared by all modules."""


class DeformedBSError(Exception):
    """Base class for every error raised by this package."""


class ExpressionSyntaxError(DeformedBSError):
    """Malformed expression source; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifier(DeformedBSError):
    def __init__(self, name: str, offset: int = -1):
        super().__init__(f"unknown identifier {name!r}")
        self.name = name
        self.offset = offset


class DomainError(DeformedBSError, ArithmeticError):
    """Evaluation left the real domain or produced a non-finite number."""


class PositivityViolation(DeformedBSError):
    def __init__(self, X: float, P: float, value: float):
        super().__init__(f"deformation f(X={X!r}, P={P!r}) = {value!r} is not positive")
        self.X = X
        self.P = P
        self.value = value


class ParameterDomain(DeformedBSError, ValueError):
    """Deformation parameters outside the range where a formula is defined."""


class OutOfDomain(DeformedBSError, ValueError):
    """Query point outside the domain of a potential."""


class NoAllowedRegion(DeformedBSError):
    """The energy does not exceed the potential minimum."""


class MultipleWells(DeformedBSError):
    """The classically allowed region at this energy is disconnected."""


class MaxSubdivisions(DeformedBSError):
    """Adaptive quadrature exhausted its evaluation budget."""


class NonFiniteIntegrand(DeformedBSError):
    def __init__(self, x: float, value: float):
        super().__init__(f"integrand is not finite at x={x!r} (value {value!r})")
        self.x = x
        self.value = value


class NoBoundLevel(DeformedBSError):
    """The quantization target is not reachable: the level does not exist.

    ``n_max`` is the largest bound level index, or ``None`` if unknown.
    """

    def __init__(self, n: int, n_max: int | None, reason: str = ""):
        msg = f"no bound level n={n}"
        if n_max is not None:
            msg += f" (n_max = {n_max})"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.n = n
        self.n_max = n_max


class SolverFailure(DeformedBSError):
    """Root finding did not converge."""
