"""Discounted payoff pairs ``(f, g)`` for game (Israeli) options.

``f(t, s)`` is what the buyer receives on exercise and ``g(t, s)`` what the
seller pays on cancellation, both in time-0 money, as functions of time and the
*discounted* spot ``s``. American contracts carry ``g = None`` (no
cancellation right).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ValidationError

__all__ = [
    "Convention",
    "PayoffKind",
    "PayoffSpec",
    "GamePayoff",
    "build",
    "custom",
    "evaluate_kernel",
]


class Convention(str, enum.Enum):
    """How the strike is compared against the discounted spot.

    ``UNDISCOUNTED_STRIKE``: intrinsic value uses ``exp(r t) * s`` against ``K``
    and the result is discounted back. ``LITERAL``: ``s`` is compared against
    ``K`` directly, then discounted.
    """

    UNDISCOUNTED_STRIKE = "undiscounted_strike"
    LITERAL = "literal"


class PayoffKind(str, enum.Enum):
    GAME_CALL = "game_call"
    GAME_PUT = "game_put"
    AMERICAN_CALL = "american_call"
    AMERICAN_PUT = "american_put"
    CUSTOM = "custom"

    @property
    def is_call(self) -> bool:
        return self in (PayoffKind.GAME_CALL, PayoffKind.AMERICAN_CALL)

    @property
    def is_american(self) -> bool:
        return self in (PayoffKind.AMERICAN_CALL, PayoffKind.AMERICAN_PUT)


@dataclass(frozen=True)
class PayoffSpec:
    kind: PayoffKind
    strike: float
    maturity: float
    rate: float = 0.0
    penalty: Optional[float] = None
    convention: Convention = Convention.UNDISCOUNTED_STRIKE

    def __post_init__(self):
        object.__setattr__(self, "kind", PayoffKind(self.kind))
        object.__setattr__(self, "convention", Convention(self.convention))
        if self.kind is PayoffKind.CUSTOM:
            raise ValidationError("custom payoffs are built with gametree.payoff.custom()")
        if not (self.strike > 0 and math.isfinite(self.strike)):
            raise ValidationError(f"strike must be positive, got {self.strike!r}")
        if not (self.maturity > 0 and math.isfinite(self.maturity)):
            raise ValidationError(f"maturity must be positive, got {self.maturity!r}")
        if not (self.rate >= 0 and math.isfinite(self.rate)):
            raise ValidationError(f"rate must be non-negative, got {self.rate!r}")
        if self.kind.is_american:
            if self.penalty is not None:
                raise ValidationError("american payoffs take no penalty")
        else:
            if self.penalty is None:
                raise ValidationError(f"{self.kind.value} needs a penalty")
            if not (self.penalty >= 0 and math.isfinite(self.penalty)):
                raise ValidationError(f"penalty must be >= 0, got {self.penalty!r}")


@dataclass(frozen=True)
class GamePayoff:
    """Buyer/seller obstacles. ``g is None`` means the seller cannot cancel.

    ``f`` and ``g`` take ``(t, s)`` with scalar ``t`` and array ``s`` and return
    arrays. ``spec`` is set for built-in kinds and lets the solver use its
    compiled path.
    """

    f: Callable
    g: Optional[Callable]
    maturity: float
    rate: float
    convention: Convention = Convention.UNDISCOUNTED_STRIKE
    spec: Optional[PayoffSpec] = field(default=None, compare=False)

    @property
    def cancellable(self) -> bool:
        return self.g is not None


def _intrinsic(kind: PayoffKind, strike: float):
    if kind.is_call:
        return lambda x: np.maximum(x - strike, 0.0)
    return lambda x: np.maximum(strike - x, 0.0)


def build(spec: PayoffSpec) -> GamePayoff:
    """Turn a :class:`PayoffSpec` into discounted obstacle functions."""
    phi = _intrinsic(spec.kind, spec.strike)
    r = spec.rate
    if spec.convention is Convention.UNDISCOUNTED_STRIKE:
        def f(t, s):
            return math.exp(-r * t) * phi(math.exp(r * t) * np.asarray(s, dtype=float))
    else:
        def f(t, s):
            return math.exp(-r * t) * phi(np.asarray(s, dtype=float))

    g = None
    if not spec.kind.is_american:
        delta = spec.penalty

        def g(t, s):
            return f(t, s) + math.exp(-r * t) * delta

    return GamePayoff(f, g, spec.maturity, r, spec.convention, spec)


def custom(f: Callable, g: Optional[Callable], maturity: float, rate: float = 0.0, *,
           promise_g_ge_f: bool) -> GamePayoff:
    """Wrap user obstacles. The solver re-checks ``g >= f`` on every node anyway."""
    if g is not None and not promise_g_ge_f:
        raise ValidationError("custom payoffs must promise g >= f (promise_g_ge_f=True)")
    if not (maturity > 0):
        raise ValidationError(f"maturity must be positive, got {maturity!r}")
    return GamePayoff(f, g, float(maturity), float(rate), Convention.LITERAL, None)


def evaluate_kernel(payoff: GamePayoff, gamma: float, tau: float, s_at_min: float) -> float:
    """Discounted payment when the seller cancels at ``gamma`` and the buyer exercises at ``tau``.

    Ties go to the buyer: ``g`` applies only when ``gamma < tau``.
    """
    if gamma < tau and payoff.cancellable:
        return float(payoff.g(gamma, s_at_min))
    return float(payoff.f(tau, s_at_min))
