"""Exception hierarchy shared by all modules."""


class TodaError(Exception):
    """Base class for every error raised by the library."""


class InvariantError(TodaError, ValueError):
    """A state or argument violates a domain invariant (e.g. a_i <= 0)."""


class RangeError(TodaError, OverflowError):
    """An exponential or power left the representable double range."""


class NumericalError(TodaError, ArithmeticError):
    """A numerical procedure broke down or failed to converge."""


class DegeneratePivotError(NumericalError):
    """A Hankel determinant used as a divisor is (numerically) zero."""

    def __init__(self, name: str, value: float, message: str | None = None):
        self.name = name
        self.value = value
        super().__init__(
            message
            or f"degenerate pivot {name} = {value:.3e}; this is a removable "
            "singularity of the Hankel formulas, use lanczos_inverse instead"
        )


class PoleProximityError(NumericalError):
    """A Weyl function evaluation point sits on (or next to) a pole."""


class GaugeSingularityError(NumericalError):
    """H_1 = sum of eigenvalues vanishes, so the extra integrals are undefined."""


class IntegrationError(NumericalError):
    """Time integration failed; ``t`` is the time reached."""

    def __init__(self, message: str, t: float):
        self.t = t
        super().__init__(f"{message} (at t = {t:.6g})")
