"""Run configuration: one JSON document fully describes a CLI run."""

from __future__ import annotations

import json
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, model_validator

from .errors import ValidationError
from .payoff import Convention, PayoffSpec
from .volatility import VolatilityModel, model_from_config


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelConfig(_Strict):
    kind: Literal["truncated_cev", "constant"] = "truncated_cev"
    sigma: Optional[PositiveFloat] = None

    @model_validator(mode="after")
    def _sigma_matches_kind(self):
        if self.kind == "constant" and self.sigma is None:
            raise ValueError("constant model needs 'sigma'")
        if self.kind == "truncated_cev" and self.sigma is not None:
            raise ValueError("truncated_cev takes no 'sigma'")
        return self

    def build(self) -> VolatilityModel:
        return model_from_config(self)


class PayoffConfig(_Strict):
    kind: Literal["game_call", "game_put", "american_call", "american_put"]
    strike: PositiveFloat
    maturity: PositiveFloat
    rate: float = Field(0.0, ge=0.0)
    penalty: Optional[float] = Field(None, ge=0.0)
    convention: Convention = Convention.UNDISCOUNTED_STRIKE

    def spec(self) -> PayoffSpec:
        return PayoffSpec(self.kind, self.strike, self.maturity, self.rate, self.penalty,
                          self.convention)


class RunConfig(_Strict):
    model: ModelConfig = Field(default_factory=ModelConfig)
    payoff: Optional[PayoffConfig] = None
    s0: Optional[PositiveFloat] = None
    n: Optional[PositiveInt] = None
    s0_list: Optional[List[PositiveFloat]] = None
    n_list: Optional[List[PositiveInt]] = None
    seed: int = Field(0, ge=0, lt=2 ** 64)
    m: PositiveInt = 100_000
    dt: Optional[PositiveFloat] = None
    h: Optional[PositiveFloat] = None
    mode: Literal["both", "buyer_only", "seller_only"] = "both"
    tolerance: float = Field(1e-9, ge=0.0)
    window_sd: Optional[PositiveFloat] = 8.0
    keep_surface: bool = False
    threads: PositiveInt = 1

    def require(self, *names):
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise ValidationError(f"config is missing required field(s): {', '.join(missing)}")


def load_config(source: Optional[str], overrides: Optional[dict] = None) -> RunConfig:
    """Read a config from a file path or an inline JSON string, then apply overrides."""
    data = {}
    if source:
        text = source if source.lstrip().startswith("{") else Path(source).read_text()
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ValidationError("config must be a JSON object")
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    return RunConfig.model_validate(data)
