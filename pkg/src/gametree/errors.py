"""Exception hierarchy.

Validation problems (bad inputs, bad config) and numerical problems (bound
violations, broken obstacle order) are kept apart so the CLI can map them to
different exit codes.
"""


class GameTreeError(Exception):
    """Base class for all package errors."""


class ValidationError(GameTreeError, ValueError):
    """Invalid input parameters or configuration."""


class NumericalError(GameTreeError, ArithmeticError):
    """A numerical invariant failed during a computation."""


class BoundViolationError(NumericalError):
    """Volatility evaluated outside its declared ``[sigma_min, sigma_max]``."""

    def __init__(self, z, value, sigma_min, sigma_max):
        self.z = float(z)
        self.value = float(value)
        super().__init__(
            f"volatility {value!r} at log-price z={z!r} outside declared "
            f"bounds [{sigma_min!r}, {sigma_max!r}]"
        )


class ObstacleOrderError(NumericalError):
    """Seller payoff fell below buyer payoff (g < f) at a lattice node."""

    def __init__(self, k, i, f, g):
        self.k, self.i = int(k), int(i)
        super().__init__(f"g < f at node (k={k}, i={i}): f={f!r}, g={g!r}")
