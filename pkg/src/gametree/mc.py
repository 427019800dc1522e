"""Monte Carlo checks on continuous paths of the log-price SDE.

Paths follow the Euler scheme for ``dZ = psi(Z) dW - psi(Z)^2/2 dt``.

Random numbers come from numpy's Philox counter-based generator. Paths are
grouped in blocks of :data:`BLOCK_SIZE`; block ``b`` draws from the Philox
stream with key ``seed`` and counter ``[0, 0, 0, b]``. Results therefore
depend only on ``(seed, inputs)``, not on how blocks are scheduled across
threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .errors import NumericalError, ValidationError
from .lattice import transition_probs
from .payoff import GamePayoff
from .solver import Solution
from .volatility import VolatilityModel

__all__ = [
    "BLOCK_SIZE",
    "PathBatch",
    "EmbeddingStats",
    "StrategyResult",
    "block_generator",
    "simulate_paths",
    "verify_embedding",
    "evaluate_strategies",
]

BLOCK_SIZE = 8192
TRUNCATION_CAP = 50.0          # embedding step cap, in units of h
MAX_TRUNCATION_FRACTION = 0.01
# Broadie-Glasserman-Kou continuity correction, -zeta(1/2)/sqrt(2*pi)
BGK_BETA = 0.5825971579390106


def block_generator(seed: int, block: int) -> np.random.Generator:
    if not (0 <= seed < 2 ** 64):
        raise ValidationError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, block]))


def _block_normals(rng, size):
    # a full block per step keeps each path's noise independent of m
    return rng.standard_normal(BLOCK_SIZE)[:size]


def _blocks(m):
    return [(b, b * BLOCK_SIZE, min(m, (b + 1) * BLOCK_SIZE)) for b in range((m + BLOCK_SIZE - 1) // BLOCK_SIZE)]


def _map_blocks(fn, m, threads):
    blocks = _blocks(m)
    if threads and threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, blocks))
    return [fn(b) for b in blocks]


def _n_steps(span, dt, what):
    steps = span / dt
    k = int(round(steps))
    if k < 1 or abs(steps - k) > 1e-9 * max(1.0, steps):
        raise ValidationError(f"dt={dt!r} must divide {what}={span!r}")
    return k


def _euler(model, z, xi, dt):
    vol = model.psi(z)
    return z + vol * math.sqrt(dt) * xi - 0.5 * vol * vol * dt


@dataclass(frozen=True, eq=False)
class PathBatch:
    """Materialized Euler paths; ``z[p, j]`` is path ``p`` at time ``j * dt``."""

    seed: int
    m: int
    dt: float
    z0: float
    z: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.z.shape[1]) * self.dt


def simulate_paths(model: VolatilityModel, z0: float, maturity: float, dt: float, m: int,
                   seed: int, threads: int = 1) -> PathBatch:
    """Simulate ``m`` log-price paths on ``[0, maturity]`` with step ``dt``."""
    if m < 1:
        raise ValidationError(f"m must be >= 1, got {m!r}")
    if not dt > 0:
        raise ValidationError(f"dt must be positive, got {dt!r}")
    steps = _n_steps(maturity, dt, "maturity")

    def run(block):
        b, lo, hi = block
        rng = block_generator(seed, b)
        out = np.empty((hi - lo, steps + 1))
        out[:, 0] = z0
        for j in range(steps):
            out[:, j + 1] = _euler(model, out[:, j], _block_normals(rng, hi - lo), dt)
        return out

    z = np.concatenate(_map_blocks(run, m, threads))
    if not np.all(np.isfinite(z)):
        raise NumericalError("non-finite log-price on a simulated path")
    return PathBatch(seed, m, dt, float(z0), z)


@dataclass(frozen=True)
class EmbeddingStats:
    """Empirical outcome of one embedding step versus the lattice targets.

    Outcome vectors are ordered ``(down, mid, up)``.
    """

    h: float
    dt: float
    m: int
    seed: int
    z0: float
    targets: List[float]
    counts: List[int]
    completed: int
    frequencies: List[float]
    frequency_se: List[float]
    mean_dtheta: float
    dtheta_se: float
    truncation_fraction: float

    def to_dict(self) -> Dict:
        return asdict(self)


def verify_embedding(model: VolatilityModel, z0: float, h: float, m: int, seed: int,
                     dt: Optional[float] = None, threads: int = 1) -> EmbeddingStats:
    """Run one two-stage embedding step from ``z0`` on ``m`` Euler paths.

    Stage one waits for ``|Z - z0| = A`` with ``A = psi(z0)^2 sqrt(h)/sigma_bar``;
    stage two then waits for ``z0`` or ``z0 +- sigma_bar sqrt(h)`` on the side
    that was hit. Barriers are monitored at the Euler grid and shifted inward
    by ``BGK_BETA * psi * sqrt(dt)``, which removes the leading discrete
    monitoring bias in both the exit law and the exit time.
    """
    if not h > 0:
        raise ValidationError(f"h must be positive, got {h!r}")
    if m < 1:
        raise ValidationError(f"m must be >= 1, got {m!r}")
    dt = h / 400.0 if dt is None else float(dt)
    if not 0 < dt < h:
        raise ValidationError(f"need 0 < dt < h, got dt={dt!r}, h={h!r}")
    sigma_bar = model.sigma_max
    a = sigma_bar * math.sqrt(h)
    A = model.psi(z0) ** 2 * math.sqrt(h) / sigma_bar
    if A <= 2 * BGK_BETA * model.psi(z0) * math.sqrt(dt):
        raise ValidationError("dt too coarse for the first embedding stage; reduce dt")
    single_stage = A >= a * (1.0 - 1e-12)
    cap = int(math.ceil(TRUNCATION_CAP * h / dt))
    sq = math.sqrt(dt)

    def run(block):
        b, lo_p, hi_p = block
        size = hi_p - lo_p
        rng = block_generator(seed, b)
        z = np.full(size, float(z0))
        elapsed = np.zeros(size)
        stage = np.zeros(size, dtype=np.int8)
        lo = np.full(size, z0 - A)
        hi = np.full(size, z0 + A)
        label = np.full(size, 2, dtype=np.int8)   # 2 = unfinished
        active = np.arange(size)
        for _ in range(cap):
            if active.size == 0:
                break
            za = z[active]
            vol = model.psi(za)
            za = za + vol * sq * rng.standard_normal(active.size) - 0.5 * vol * vol * dt
            z[active] = za
            elapsed[active] += dt
            shift = BGK_BETA * vol * sq
            up = za >= hi[active] - shift
            dn = za <= lo[active] + shift
            first = (stage[active] == 0) & (up | dn)
            if first.any():
                idx = active[first]
                went_up = up[first]
                if single_stage:
                    label[idx] = np.where(went_up, 1, -1)
                else:
                    stage[idx] = 1
                    lo[idx] = np.where(went_up, z0, z0 - a)
                    hi[idx] = np.where(went_up, z0 + a, z0)
                    # the overshoot may already clear a stage-two barrier
                    up[first] = za[first] >= hi[idx] - shift[first]
                    dn[first] = za[first] <= lo[idx] + shift[first]
            second = (stage[active] == 1) & (up | dn)
            if second.any():
                idx = active[second]
                hit_hi = up[second]
                # the barrier at z0 is the mid outcome from either side
                outer_up = hit_hi & (hi[idx] > z0)
                outer_dn = ~hit_hi & (lo[idx] < z0)
                label[idx] = np.where(outer_up, 1, np.where(outer_dn, -1, 0))
            active = active[label[active] == 2]
        return label, elapsed

    parts = _map_blocks(run, m, threads)
    label = np.concatenate([p[0] for p in parts])
    elapsed = np.concatenate([p[1] for p in parts])
    done = label != 2
    completed = int(done.sum())
    trunc = 1.0 - completed / m
    counts = [int(np.sum(label == v)) for v in (-1, 0, 1)]
    p_up, p_mid, p_down = transition_probs(z0, h, sigma_bar, model)
    if completed == 0:
        raise NumericalError("no embedding step completed before the truncation cap")
    freqs = [c / completed for c in counts]
    freq_se = [math.sqrt(p * (1 - p) / completed) for p in freqs]
    dth = elapsed[done]
    stats = EmbeddingStats(
        h=h, dt=dt, m=m, seed=seed, z0=float(z0),
        targets=[p_down, p_mid, p_up], counts=counts, completed=completed,
        frequencies=freqs, frequency_se=freq_se,
        mean_dtheta=float(dth.mean()),
        dtheta_se=float(dth.std(ddof=1) / math.sqrt(completed)) if completed > 1 else 0.0,
        truncation_fraction=trunc,
    )
    if trunc > MAX_TRUNCATION_FRACTION:
        raise NumericalError(
            f"embedding truncation fraction {trunc:.4f} exceeds {MAX_TRUNCATION_FRACTION}"
        )
    return stats


@dataclass(frozen=True)
class StrategyResult:
    """Sample mean and standard error of the discounted payment.

    For the one-sided modes ``mean`` is the worst case over the adversary
    family and ``candidates`` lists every adversary's own estimate.
    """

    mean: float
    std_error: float
    m: int
    seed: int
    dt: float
    mode: str
    candidates: List[Dict] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return asdict(self)


MODES = ("both", "buyer_only", "seller_only")


def _adversaries(h, maturity):
    """Heuristic stopping rules: never, first touch of the obstacle, fixed times jT/4."""
    fam = [("never", None), ("touch", None)]
    for j in (1, 2, 3):
        fam.append((f"fixed_{j}T/4", int(math.ceil(j * maturity / 4 / h - 1e-9))))
    return fam


def evaluate_strategies(solution: Solution, model: VolatilityModel, payoff: GamePayoff,
                        mode: str = "both", m: int = 100_000, seed: int = 0,
                        dt: Optional[float] = None, threads: int = 1) -> StrategyResult:
    """Play the lattice stopping rules on continuous Euler paths.

    At each lattice time ``t_k`` the path is mapped to the nearest node of
    level ``k``; a player following the lattice rule stops if that node is
    flagged for them. The buyer wins ties, and is forced to stop at maturity.
    The payment uses the path's own spot.

    ``mode="both"`` plays the two lattice rules against each other.
    ``"buyer_only"`` pits the lattice buyer against the heuristic sellers from
    :func:`_adversaries` and reports the smallest mean; ``"seller_only"`` is the
    mirror image and reports the largest. These are one-sided empirical
    checks, not the continuous-time inf/sup.
    """
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
    if m < 1:
        raise ValidationError(f"m must be >= 1, got {m!r}")
    lat = solution.lattice
    n, h, dz, z0 = lat.n, lat.h, lat.dz, lat.z0
    T = lat.maturity
    if dt is None:
        per_level = max(1, int(math.ceil(h / (T / 2000) - 1e-9)))
        dt = h / per_level
    else:
        dt = float(dt)
    _n_steps(T, dt, "maturity")
    sub = _n_steps(h, dt, "lattice step h")
    cancellable = payoff.cancellable
    adversaries = _adversaries(h, T)
    if mode == "both":
        players = [("lattice", "lattice", None)]
    elif mode == "buyer_only":
        players = [("lattice", name, kfix) for name, kfix in adversaries]
    else:
        players = [(name, "lattice", kfix) for name, kfix in adversaries]
    n_c = len(players)
    sq = math.sqrt(dt)
    buyer_flags, seller_flags = solution.buyer_stop, solution.seller_stop

    def run(block):
        b, lo_p, hi_p = block
        size = hi_p - lo_p
        rng = block_generator(seed, b)
        z = np.full(size, z0)
        done = np.zeros((n_c, size), dtype=bool)
        pay = np.zeros((n_c, size))
        for k in range(n + 1):
            if k > 0:
                for _ in range(sub):
                    z = _euler(model, z, _block_normals(rng, size), dt)
            t = k * h
            s = np.exp(z)
            node = np.clip(np.rint((z - z0) / dz).astype(np.intp), -k, k) + n
            f_now = np.asarray(payoff.f(t, s), dtype=float)
            g_now = np.asarray(payoff.g(t, s), dtype=float) if cancellable else None
            b_lat = buyer_flags[k, node]
            s_lat = seller_flags[k, node] if cancellable else np.zeros(size, dtype=bool)
            for c, (buy_rule, sell_rule, kfix) in enumerate(players):
                if k == n:
                    b_stop = np.ones(size, dtype=bool)
                elif buy_rule == "lattice":
                    b_stop = b_lat
                elif buy_rule == "never":
                    b_stop = np.zeros(size, dtype=bool)
                elif buy_rule == "touch":
                    b_stop = f_now > 0.0
                else:
                    b_stop = np.full(size, k >= kfix)
                if not cancellable:
                    s_stop = np.zeros(size, dtype=bool)
                elif sell_rule == "lattice":
                    s_stop = s_lat
                elif sell_rule == "never":
                    s_stop = np.zeros(size, dtype=bool)
                elif sell_rule == "touch":
                    s_stop = f_now == 0.0
                else:
                    s_stop = np.full(size, k >= kfix)
                live = ~done[c]
                take_f = live & b_stop
                take_g = live & ~b_stop & s_stop
                if take_f.any():
                    pay[c, take_f] = f_now[take_f]
                if take_g.any():
                    pay[c, take_g] = g_now[take_g]
                done[c] |= take_f | take_g
            if done.all():
                break
        return pay

    pays = np.concatenate(_map_blocks(run, m, threads), axis=1)
    means = pays.mean(axis=1)
    ses = pays.std(axis=1, ddof=1) / math.sqrt(m) if m > 1 else np.zeros(n_c)
    cands = [
        {"buyer": bp, "seller": sp, "mean": float(mu), "std_error": float(se)}
        for (bp, sp, _), mu, se in zip(players, means, ses)
    ]
    if mode == "both":
        pick = 0
    elif mode == "buyer_only":
        pick = int(np.argmin(means))
    else:
        pick = int(np.argmax(means))
    return StrategyResult(float(means[pick]), float(ses[pick]), m, seed, dt, mode, cands)
