"""Game (Israeli) option pricing on recombining trinomial trees for local-volatility models."""

from .errors import (
    BoundViolationError,
    GameTreeError,
    NumericalError,
    ObstacleOrderError,
    ValidationError,
)
from .lattice import Lattice, build_lattice, transition_probs
from .oracle import brute_force_value
from .payoff import Convention, GamePayoff, PayoffKind, PayoffSpec, build, custom, evaluate_kernel
from .solver import Solution, StoppingRegion, solve, stopping_region
from .volatility import VolatilityModel, make_constant, make_truncated_cev, psi

__version__ = "0.1.0"
