"""Local-volatility models ``dS/S = sigma(S) dW`` on the discounted price."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BoundViolationError, ValidationError

__all__ = ["VolatilityModel", "make_truncated_cev", "make_constant", "psi", "model_from_config"]


@dataclass(frozen=True)
class VolatilityModel:
    """A state-dependent volatility with declared bounds.

    ``sigma`` must accept a float or a numpy array of spot prices. The
    declared ``sigma_max`` sets the lattice spacing, so every evaluation goes
    through :meth:`evaluate`, which rejects values outside the bounds.

    Lipschitz continuity of ``sigma(exp(z))`` is the caller's obligation and is
    not checked.
    """

    sigma: Callable
    sigma_min: float
    sigma_max: float
    description: str = "custom"

    def __post_init__(self):
        if not (0.0 < self.sigma_min <= self.sigma_max < math.inf):
            raise ValidationError(
                f"need 0 < sigma_min <= sigma_max < inf, got "
                f"[{self.sigma_min!r}, {self.sigma_max!r}]"
            )

    def evaluate(self, s):
        """Volatility at spot ``s`` (scalar or array), bound-checked."""
        s_arr = np.asarray(s, dtype=float)
        vol = np.asarray(self.sigma(s_arr), dtype=float)
        vol = np.broadcast_to(vol, s_arr.shape)
        bad = ~((vol >= self.sigma_min) & (vol <= self.sigma_max))
        if bad.any():
            j = np.flatnonzero(bad.ravel())[0]
            raise BoundViolationError(
                np.log(s_arr.ravel()[j]), vol.ravel()[j], self.sigma_min, self.sigma_max
            )
        return float(vol) if vol.ndim == 0 else vol.copy()

    def psi(self, z):
        """Log-space volatility ``psi(z) = sigma(exp(z))``."""
        return self.evaluate(np.exp(np.asarray(z, dtype=float)))


def psi(model: VolatilityModel, z):
    return model.psi(z)


def _truncated_cev(s):
    return np.minimum(0.5, np.maximum(0.05, np.sqrt(s) / 30.0))


def make_truncated_cev() -> VolatilityModel:
    """``sigma(s) = min(0.5, max(0.05, sqrt(s)/30))``."""
    return VolatilityModel(_truncated_cev, 0.05, 0.5, "truncated_cev")


def make_constant(sigma: float) -> VolatilityModel:
    sigma = float(sigma)
    if not (sigma > 0.0 and math.isfinite(sigma)):
        raise ValidationError(f"constant volatility must be positive and finite, got {sigma!r}")
    return VolatilityModel(
        lambda s: np.full(np.shape(s), sigma), sigma, sigma, f"constant({sigma:g})"
    )


def model_from_config(cfg) -> VolatilityModel:
    """Build a model from ``{"kind": "truncated_cev"}`` or ``{"kind": "constant", "sigma": x}``.

    ``cfg`` may be a mapping or an object with ``kind``/``sigma`` attributes.
    """
    get = cfg.get if isinstance(cfg, dict) else (lambda k, d=None: getattr(cfg, k, d))
    kind = get("kind")
    if kind == "truncated_cev":
        return make_truncated_cev()
    if kind == "constant":
        if get("sigma") is None:
            raise ValidationError("constant model needs 'sigma'")
        return make_constant(get("sigma"))
    raise ValidationError(f"unknown volatility model kind {kind!r}")
