"""Brute-force game value on tiny trees, by enumerating stopping rules.

A stopping rule is a stop/continue decision on every history of the walk
(forced stop at maturity). With at most three steps there are at most 730
distinct rules per player, so the full payment matrix between every seller
rule and every buyer rule is small enough to build outright. Nothing here
uses the backward recursion.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import ValidationError
from .lattice import Lattice
from .payoff import GamePayoff

__all__ = ["brute_force_value", "MAX_STEPS"]

MAX_STEPS = 3
_MOVES = (-1, 0, 1)


def _stopping_rules(depth, n, n_paths_below):
    """All stopping rules on a subtree whose root is at level ``depth``.

    A rule is a tuple of stop levels, one per leaf path in lexicographic
    order of moves.
    """
    stop_now = (depth,) * n_paths_below
    if depth == n:
        return [stop_now]
    child = _stopping_rules(depth + 1, n, n_paths_below // 3)
    rules = [stop_now]
    for combo in itertools.product(child, repeat=3):
        rules.append(combo[0] + combo[1] + combo[2])
    return rules


def brute_force_value(lattice: Lattice, payoff: GamePayoff):
    """Return ``(inf_sup, sup_inf)`` over all adapted stopping rules.

    ``inf_sup`` is the seller-first value ``min_zeta max_eta E[H]``,
    ``sup_inf`` the buyer-first value. Requires ``lattice.n <= 3``.
    """
    n = lattice.n
    if n > MAX_STEPS:
        raise ValidationError(f"brute force is limited to n <= {MAX_STEPS}, got n={n}")
    probs = {-1: lattice.p_down, 0: lattice.p_mid, 1: lattice.p_up}
    s_nodes = lattice.s
    h = lattice.h

    paths = list(itertools.product(_MOVES, repeat=n))
    P = len(paths)
    weight = np.ones(P)
    F = np.empty((P, n + 1))
    G = np.zeros((P, n + 1))
    for p, moves in enumerate(paths):
        i = 0
        for k in range(n + 1):
            s = s_nodes[i + n]
            F[p, k] = float(np.asarray(payoff.f(k * h, np.array([s])))[0])
            if payoff.cancellable:
                G[p, k] = float(np.asarray(payoff.g(k * h, np.array([s])))[0])
            if k < n:
                weight[p] *= probs[moves[k]][i + n]
                i += moves[k]

    rules = np.array(_stopping_rules(0, n, P), dtype=np.intp)
    sellers = rules if payoff.cancellable else np.full((1, P), n, dtype=np.intp)
    buyers = rules
    cols = np.arange(P)
    F_eta = F[cols, buyers]                  # (Nb, P)
    G_zeta = G[cols, sellers]                # (Ns, P)
    payments = np.empty((len(sellers), len(buyers)))
    for a, (zeta, g_row) in enumerate(zip(sellers, G_zeta)):
        pay = np.where(zeta[None, :] < buyers, g_row[None, :], F_eta)
        payments[a] = pay @ weight
    inf_sup = float(payments.max(axis=1).min())
    sup_inf = float(payments.min(axis=0).max())
    return inf_sup, sup_inf
