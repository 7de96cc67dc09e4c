"""Exception types raised across the package."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class ConvergenceError(ArithmeticError):
    """A series or iteration hit its term cap before meeting tolerance."""


class QuadratureError(ConvergenceError):
    """Adaptive quadrature did not reach the requested accuracy."""


class IterationBudgetExceeded(RuntimeError):
    """Waveform rejection search ran out of draws for a sub-pulse."""

    def __init__(self, subpulse, max_iterations):
        self.subpulse = subpulse
        self.max_iterations = max_iterations
        super().__init__(
            f"sub-pulse {subpulse}: no admissible permutation within "
            f"{max_iterations} draws"
        )


class CoverageError(ValueError):
    """A density grid does not cover the support of a sample batch."""


class SweepError(RuntimeError):
    """A grid point of a capacity sweep failed; carries its coordinates."""

    def __init__(self, coords, cause):
        self.coords = dict(coords)
        self.cause = cause
        super().__init__(f"sweep point {self.coords} failed: {cause!r}")
