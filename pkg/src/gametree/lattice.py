"""Recombining trinomial grid in log-price with embedding-derived probabilities.

Nodes sit at ``z0 + i * dz`` with ``dz = sigma_bar * sqrt(h)``. From a node
the chain moves by ``-dz``, ``0`` or ``+dz``. The probabilities are the exit
distribution of a two-stage Skorokhod embedding of the log-price diffusion:
first exit of ``z +- A`` with ``A = psi(z)^2 sqrt(h) / sigma_bar``, then exit
of ``{z, z +- dz}`` from the side that was hit. Because ``exp(Z)`` is a
martingale both stages are gambler's-ruin problems, and the product
simplifies to

    p_up = tanh(A/2) / (exp(dz) - 1),   p_down = exp(dz) * p_up.

The chain is time-homogeneous, so probabilities are stored per spatial index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundViolationError, NumericalError, ValidationError
from .volatility import VolatilityModel

__all__ = ["Lattice", "transition_probs", "build_lattice"]

SIMPLEX_TOL = 1e-12
_LOG_MAX = math.log(np.finfo(float).max)


def _probs_from_amplitude(A, a):
    A = np.asarray(A, dtype=float)
    p_up = np.tanh(0.5 * A) / math.expm1(a)
    p_down = math.exp(a) * p_up
    p_mid = 1.0 - p_up - p_down
    total_dev = np.abs(np.minimum(p_mid, 0.0))
    if np.any(total_dev > SIMPLEX_TOL):
        raise NumericalError(f"transition probabilities left the simplex by {total_dev.max():.3e}")
    if np.any(p_mid < 0.0):
        # roundoff only; clamp and renormalize
        p_mid = np.maximum(p_mid, 0.0)
        tot = p_up + p_mid + p_down
        p_up, p_mid, p_down = p_up / tot, p_mid / tot, p_down / tot
    return p_up, p_mid, p_down


def transition_probs(z, h: float, sigma_bar: float, model: VolatilityModel):
    """Return ``(p_up, p_mid, p_down)`` at log-price(s) ``z``.

    Works elementwise on arrays. Raises :class:`BoundViolationError` if
    ``psi(z)`` exceeds ``sigma_bar`` or is not positive.
    """
    if not h > 0:
        raise ValidationError(f"h must be positive, got {h!r}")
    vol = model.psi(z)
    vol_arr = np.atleast_1d(vol)
    bad = ~((vol_arr > 0.0) & (vol_arr <= sigma_bar))
    if bad.any():
        j = np.flatnonzero(bad)[0]
        raise BoundViolationError(np.atleast_1d(z)[j], vol_arr[j], 0.0, sigma_bar)
    a = sigma_bar * math.sqrt(h)
    A = np.asarray(vol) ** 2 * math.sqrt(h) / sigma_bar
    p_up, p_mid, p_down = _probs_from_amplitude(A, a)
    if np.ndim(z) == 0:
        return float(p_up), float(p_mid), float(p_down)
    return p_up, p_mid, p_down


@dataclass(frozen=True, eq=False)
class Lattice:
    n: int
    maturity: float
    s0: float
    sigma_bar: float
    model: VolatilityModel
    p_up: np.ndarray
    p_mid: np.ndarray
    p_down: np.ndarray

    @property
    def h(self) -> float:
        return self.maturity / self.n

    @property
    def dz(self) -> float:
        return self.sigma_bar * math.sqrt(self.h)

    @property
    def z0(self) -> float:
        return math.log(self.s0)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.n, self.n + 1)

    @property
    def z(self) -> np.ndarray:
        """Log-prices of all ``2n+1`` nodes, ``z[i + n]`` for index ``i``."""
        return self.z0 + self.indices * self.dz

    @property
    def s(self) -> np.ndarray:
        """Discounted spot at every node; the root is exactly ``s0``."""
        return self.s0 * np.exp(self.indices * self.dz)

    def rows(self):
        """Iterate ``(i, z, s, p_up, p_mid, p_down)`` over all nodes."""
        for j, (i, z, s) in enumerate(zip(self.indices, self.z, self.s)):
            yield int(i), float(z), float(s), float(self.p_up[j]), float(self.p_mid[j]), float(self.p_down[j])


def build_lattice(model: VolatilityModel, s0: float, maturity: float, n: int) -> Lattice:
    """Build the ``2n+1``-node grid centred on ``ln s0``.

    Probabilities are evaluated once per spatial index; the model bounds must
    hold across the whole grid ``z0 +- n dz``.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValidationError(f"n must be an integer >= 1, got {n!r}")
    if not (s0 > 0 and math.isfinite(s0)):
        raise ValidationError(f"s0 must be positive, got {s0!r}")
    if not (maturity > 0 and math.isfinite(maturity)):
        raise ValidationError(f"maturity must be positive, got {maturity!r}")
    n = int(n)
    h = maturity / n
    sigma_bar = model.sigma_max
    z = math.log(s0) + np.arange(-n, n + 1) * (sigma_bar * math.sqrt(h))
    if not z[-1] < _LOG_MAX:
        raise NumericalError(f"price grid overflows: top node exp({float(z[-1])!r})")
    p_up, p_mid, p_down = transition_probs(z, h, sigma_bar, model)
    for arr in (p_up, p_mid, p_down):
        arr.setflags(write=False)
    return Lattice(n, float(maturity), float(s0), sigma_bar, model, p_up, p_mid, p_down)
