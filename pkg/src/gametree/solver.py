"""Dynkin-game backward recursion on the trinomial lattice.

At every node the value is ``max(f, min(g, E[next level]))``: the buyer can
take ``f`` now, the seller can end the game by paying ``g``, and otherwise the
game continues. Stop flags mark where each player's obstacle is attained;
these define the optimal stopping rules (first visit to a flagged node).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import _kernels
from .errors import NumericalError, ObstacleOrderError, ValidationError
from .lattice import Lattice
from .payoff import Convention, GamePayoff

__all__ = ["Solution", "StoppingRegion", "solve", "stopping_region", "DEFAULT_TOL"]

DEFAULT_TOL = 1e-9
DEFAULT_WINDOW_SD = 8.0


@dataclass(frozen=True, eq=False)
class Solution:
    """Result of :func:`solve`.

    ``buyer_stop`` and ``seller_stop`` are ``(n+1, 2n+1)`` boolean arrays
    indexed ``[k, i + n]``; only ``|i| <= k`` is meaningful at level ``k``.
    ``surface`` has the same layout (NaN off the reachable triangle) when
    requested.
    """

    value: float
    lattice: Lattice
    payoff: GamePayoff
    buyer_stop: np.ndarray
    seller_stop: np.ndarray
    surface: Optional[np.ndarray] = None
    tol: float = DEFAULT_TOL

    @property
    def n(self) -> int:
        return self.lattice.n

    @property
    def h(self) -> float:
        return self.lattice.h

    def obstacles(self, k: int):
        """``(f, g)`` rows over the full grid at level ``k`` (``g`` is None for American)."""
        t = k * self.h
        s = self.lattice.s
        f = np.asarray(self.payoff.f(t, s), dtype=float)
        g = np.asarray(self.payoff.g(t, s), dtype=float) if self.payoff.cancellable else None
        return f, g


def solve(lattice: Lattice, payoff: GamePayoff, keep_surface: bool = False,
          tol: float = DEFAULT_TOL) -> Solution:
    """Run the backward recursion and return value, stop flags and optional surface.

    Nodes are flagged ``buyer_stop`` where ``J <= f + tol*(1+|f|)`` and the
    exercise value is positive (always at maturity), and ``seller_stop`` where
    ``J >= g - tol*(1+|g|)``.
    """
    T = lattice.maturity
    if abs(payoff.maturity - T) > 1e-12 * max(1.0, T):
        raise ValidationError(
            f"payoff maturity {payoff.maturity!r} differs from lattice maturity {T!r}"
        )
    if not tol >= 0:
        raise ValidationError(f"tol must be >= 0, got {tol!r}")
    n = lattice.n
    width = 2 * n + 1
    buyer = np.zeros((n + 1, width), dtype=np.bool_)
    seller = np.zeros((n + 1, width), dtype=np.bool_)
    if keep_surface:
        surface = np.full((n + 1, width), np.nan)
    else:
        surface = np.empty((1, 1))
    s = lattice.s
    spec = payoff.spec
    if spec is not None:
        value, bad_k, bad_j = _kernels.solve_builtin(
            s, lattice.p_up, lattice.p_mid, lattice.p_down, n, lattice.h, spec.rate,
            spec.strike, spec.penalty or 0.0, spec.kind.is_call,
            spec.convention is Convention.UNDISCOUNTED_STRIKE, payoff.cancellable, tol,
            buyer, seller, surface, keep_surface,
        )
        if bad_k >= 0:
            f, g = _obstacles_at(payoff, bad_k * lattice.h, s[bad_j])
            raise ObstacleOrderError(bad_k, bad_j - n, f, g)
    else:
        value = _solve_generic(lattice, payoff, tol, buyer, seller,
                               surface if keep_surface else None)
    if not math.isfinite(value):
        raise NumericalError(f"non-finite value {value!r}")
    return Solution(float(value), lattice, payoff, buyer, seller,
                    surface if keep_surface else None, tol)


def _obstacles_at(payoff, t, s):
    f = float(np.asarray(payoff.f(t, np.asarray([s])))[0])
    g = float(np.asarray(payoff.g(t, np.asarray([s])))[0]) if payoff.cancellable else math.inf
    return f, g


def _solve_generic(lattice, payoff, tol, buyer, seller, surface):
    n = lattice.n
    width = 2 * n + 1
    s = lattice.s
    J_next = np.empty(width)
    J = np.empty(width)
    f = np.zeros(width)
    g = np.zeros(width)
    for k in range(n, -1, -1):
        t = k * lattice.h
        lo, hi = n - k, n + k
        f[lo:hi + 1] = payoff.f(t, s[lo:hi + 1])
        if payoff.cancellable:
            g[lo:hi + 1] = payoff.g(t, s[lo:hi + 1])
        if not (np.all(np.isfinite(f[lo:hi + 1])) and np.all(np.isfinite(g[lo:hi + 1]))):
            raise NumericalError(f"non-finite payoff at level k={k}")
        bad = _kernels.step_level(J_next, J, lattice.p_up, lattice.p_mid, lattice.p_down,
                                  f, g, lo, hi, payoff.cancellable, k == n, tol,
                                  buyer[k], seller[k])
        if bad >= 0:
            raise ObstacleOrderError(k, bad - n, f[bad], g[bad])
        if surface is not None:
            surface[k, lo:hi + 1] = J[lo:hi + 1]
        J, J_next = J_next, J
    return J_next[n]


@dataclass(frozen=True)
class StoppingRegion:
    """Per-level stopping intervals in undiscounted spot ``exp(r t) * s``.

    ``rows`` holds ``(t, [(s_lo, s_hi), ...])`` for every level, empty lists
    included, ordered by time.
    """

    side: str
    rows: List[Tuple[float, List[Tuple[float, float]]]] = field(default_factory=list)
    dz: float = 0.0

    def boundary(self):
        """``(t, lowest, highest)`` stopping spot for each nonempty row."""
        return [(t, iv[0][0], iv[-1][1]) for t, iv in self.rows if iv]

    def last_active_time(self) -> Optional[float]:
        active = [t for t, iv in self.rows if iv]
        return max(active) if active else None

    def csv_rows(self):
        for t, intervals in self.rows:
            for lo, hi in intervals:
                yield self.side, t, lo, hi


def stopping_region(solution: Solution, side: str,
                    window_sd: Optional[float] = DEFAULT_WINDOW_SD) -> StoppingRegion:
    """Group flagged nodes into contiguous intervals, level by level.

    Nodes further than ``window_sd * sigma_bar * sqrt(T)`` from the root in
    log-price are left out: the grid reaches ``exp(+-sigma_bar sqrt(nT))``,
    where payoffs of order 1e15 make obstacle comparisons meaningless in
    double precision. Pass ``None`` to keep every reachable node.
    """
    if side not in ("buyer", "seller"):
        raise ValidationError(f"side must be 'buyer' or 'seller', got {side!r}")
    lat = solution.lattice
    flags = solution.buyer_stop if side == "buyer" else solution.seller_stop
    n, h, dz = lat.n, lat.h, lat.dz
    r = solution.payoff.rate
    reach = n if window_sd is None else int(math.floor(window_sd * lat.sigma_bar * math.sqrt(lat.maturity) / dz))
    rows = []
    for k in range(n + 1):
        t = k * h
        intervals = []
        if side == "buyer" or solution.payoff.cancellable:
            m = min(k, reach)
            row = flags[k, n - m:n + m + 1]
            idx = np.flatnonzero(row) - m
            if idx.size:
                breaks = np.flatnonzero(np.diff(idx) > 1)
                starts = np.concatenate(([idx[0]], idx[breaks + 1]))
                ends = np.concatenate((idx[breaks], [idx[-1]]))
                scale = math.exp(r * t) * lat.s0
                intervals = [(scale * math.exp(a * dz), scale * math.exp(b * dz))
                             for a, b in zip(starts, ends)]
        rows.append((t, intervals))
    return StoppingRegion(side, rows, dz)
