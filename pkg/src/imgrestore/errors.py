"""Exception types raised by the solvers and pipelines."""


class StepSizeError(RuntimeError):
    """The Rayleigh-quotient step size is undefined (nonpositive curvature)."""


class DivergenceError(RuntimeError):
    """A descent iterate became non-finite."""

    def __init__(self, iteration: int):
        self.iteration = iteration
        super().__init__(f"iterate became non-finite at step {iteration}")


class ConvergenceError(RuntimeError):
    """An iterative solve exhausted its budget without meeting tolerance."""

    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"no convergence after {iterations} iterations "
            f"(achieved relative residual {residual:.3e})"
        )


class BetaEstimationError(RuntimeError):
    """The data-discrepancy rule could not produce a usable weight.

    ``degenerate`` is set when the denominator vanished (nothing was smoothed
    away, typically a noise-free or constant input), which callers may treat
    as "skip the implicit stage" rather than a hard failure.
    """

    def __init__(self, message: str, degenerate: bool = False):
        self.degenerate = degenerate
        super().__init__(message)
