"""Compiled inner loops for the backward recursion."""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True, inline="always")
def _step(J_next, J, p_up, p_mid, p_down, f, g, lo, hi, cancellable, terminal, tol,
          buyer_row, seller_row):
    """One backward level over nodes ``lo..hi``. Returns the first node with g < f, or -1."""
    for j in range(lo, hi + 1):
        fj = f[j]
        gj = g[j] if cancellable else 0.0
        if cancellable and gj < fj:
            return j
        if terminal:
            v = fj
        else:
            cont = p_down[j] * J_next[j - 1] + p_mid[j] * J_next[j] + p_up[j] * J_next[j + 1]
            if cancellable:
                v = max(fj, min(gj, cont))
            else:
                v = max(fj, cont)
        J[j] = v
        buyer_row[j] = terminal or (fj > 0.0 and v <= fj + tol * (1.0 + abs(fj)))
        if cancellable:
            seller_row[j] = v >= gj - tol * (1.0 + abs(gj))
    return -1


@njit(cache=True, nogil=True)
def solve_builtin(s, p_up, p_mid, p_down, n, h, rate, strike, penalty, is_call,
                  undiscounted, cancellable, tol, buyer, seller, surface, keep_surface):
    """Full backward sweep for vanilla call/put obstacles.

    Returns ``(value, bad_k, bad_j)``; ``bad_k >= 0`` flags an obstacle-order
    violation at that node.
    """
    width = 2 * n + 1
    J_next = np.empty(width)
    J = np.empty(width)
    f = np.empty(width)
    g = np.empty(width)
    for k in range(n, -1, -1):
        t = k * h
        disc = math.exp(-rate * t)
        growth = math.exp(rate * t) if undiscounted else 1.0
        pen = disc * penalty
        lo = n - k
        hi = n + k
        for j in range(lo, hi + 1):
            x = growth * s[j]
            intrinsic = x - strike if is_call else strike - x
            if intrinsic < 0.0:
                intrinsic = 0.0
            f[j] = disc * intrinsic
            g[j] = f[j] + pen
        bad = _step(J_next, J, p_up, p_mid, p_down, f, g, lo, hi, cancellable, k == n, tol,
                    buyer[k], seller[k])
        if bad >= 0:
            return 0.0, k, bad
        if keep_surface:
            for j in range(lo, hi + 1):
                surface[k, j] = J[j]
        J, J_next = J_next, J
    return J_next[n], -1, -1


@njit(cache=True, nogil=True)
def step_level(J_next, J, p_up, p_mid, p_down, f, g, lo, hi, cancellable, terminal, tol,
               buyer_row, seller_row):
    return _step(J_next, J, p_up, p_mid, p_down, f, g, lo, hi, cancellable, terminal, tol,
                 buyer_row, seller_row)
