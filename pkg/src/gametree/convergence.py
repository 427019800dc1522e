"""Step-count sweeps: prices across ``n``, successive differences, timing."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ValidationError
from .lattice import build_lattice
from .payoff import PayoffSpec, build
from .solver import solve
from .volatility import VolatilityModel

__all__ = ["SweepRow", "SweepResult", "sweep", "time_solve"]


@dataclass(frozen=True)
class SweepRow:
    s0: float
    n: int
    value: float
    wall_time: float  # seconds, lattice build + solve


@dataclass
class SweepResult:
    rows: List[SweepRow]
    diffs: Dict[float, List[Tuple[int, int, float]]] = field(default_factory=dict)
    # Slope of log|V_n - V_n'| against log n, per s0. This is an empirical
    # Cauchy rate between successive n, not an error rate against the true value.
    rates: Dict[float, Optional[float]] = field(default_factory=dict)

    def value(self, s0: float, n: int) -> float:
        for row in self.rows:
            if row.s0 == s0 and row.n == n:
                return row.value
        raise KeyError((s0, n))


def _cauchy_rate(diffs):
    pts = [(math.log(math.sqrt(a * b)), math.log(d)) for a, b, d in diffs if d > 0]
    if len(pts) < 2 or len(pts) < len(diffs):
        return None
    x, y = np.array(pts).T
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def sweep(model: VolatilityModel, payoff_spec: PayoffSpec, s0_list: Sequence[float],
          n_list: Sequence[int], threads: int = 1) -> SweepResult:
    """Solve every ``(s0, n)`` cell and summarize convergence per ``s0``."""
    s0_list = [float(s) for s in s0_list]
    n_list = [int(n) for n in n_list]
    if not s0_list or not n_list:
        raise ValidationError("s0_list and n_list must be nonempty")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValidationError(f"n_list must be strictly ascending, got {n_list}")
    payoff = build(payoff_spec)
    cells = [(s0, n) for s0 in s0_list for n in n_list]

    def run(cell):
        s0, n = cell
        start = time.perf_counter()
        value = solve(build_lattice(model, s0, payoff_spec.maturity, n), payoff).value
        return SweepRow(s0, n, value, time.perf_counter() - start)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run, cells))
    else:
        rows = [run(c) for c in cells]

    result = SweepResult(rows)
    for s0 in s0_list:
        vals = [r.value for r in rows if r.s0 == s0]
        d = [(a, b, abs(vb - va)) for a, b, va, vb in zip(n_list, n_list[1:], vals, vals[1:])]
        result.diffs[s0] = d
        result.rates[s0] = _cauchy_rate(d)
    return result


def time_solve(model: VolatilityModel, payoff_spec: PayoffSpec, s0: float, n: int,
               repeats: int = 5) -> float:
    """Best-of-``repeats`` single-threaded wall time of one solve, in seconds."""
    lattice = build_lattice(model, s0, payoff_spec.maturity, n)
    payoff = build(payoff_spec)
    solve(lattice, payoff)  # warm-up (JIT)
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        solve(lattice, payoff)
        best = min(best, time.perf_counter() - start)
    return best
