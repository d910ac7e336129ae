"""Request/response models for the HTTP API.

Infinities travel as the strings "inf" / "-inf" since JSON has no literal
for them; everything else is plain JSON.
"""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field, field_validator


def parse_extended_float(v: Any) -> float:
    if isinstance(v, str):
        return float(v)
    return float(v)


class ConditionModel(BaseModel):
    parent: str
    value: Any


class HyperparameterModel(BaseModel):
    name: str
    type: Literal["float", "int", "categorical"]
    lower: float | None = None
    upper: float | None = None
    log: bool = False
    categories: list[str] | None = None
    condition: ConditionModel | None = None


class SpaceModel(BaseModel):
    hyperparameters: list[HyperparameterModel]


class RunConfigModel(BaseModel):
    space: SpaceModel | None = None
    objective: str = Field(..., min_length=1)
    budget: int = Field(..., ge=1)
    surrogate: Literal["gp", "rf"] = "rf"
    acquisition: Literal["ei", "lcb"] = "ei"
    beta: float | None = None
    tau: float | str = -0.15
    kappa: float = Field(1.0, gt=0)
    decay_power: int = Field(2, ge=0)
    n_init: int | None = Field(None, ge=1)
    seed: int = 0
    prior_mode: Literal["interactive", "scheduled"] = "interactive"
    schedule: list[tuple[int, str]] = Field(default_factory=list)
    pool_size: int = Field(2000, ge=10)
    local_starts: int = Field(10, ge=1)
    allocation_decay: float = 0.126
    gate_samples: int = Field(500, ge=2)
    min_trial_seconds: float = Field(0.0, ge=0.0)
    corpus_seeds: int = Field(2, ge=1)
    corpus_iters: int = Field(120, ge=10)

    @field_validator("tau")
    @classmethod
    def _tau_float(cls, v: Any) -> float:
        return parse_extended_float(v)


class PriorBody(BaseModel):
    label: str = "user"
    center: dict[str, Any]
    stds: dict[str, float] = Field(default_factory=dict)
    categorical_off_mass: float = Field(0.1, gt=0.0, lt=1.0)


class VerdictModel(BaseModel):
    accepted: bool
    prior_mean_lcb: float
    incumbent_mean_lcb: float
    margin: float
    tau: float | str
    sample_count: int
    overridden: bool


class RunCreated(BaseModel):
    run_id: str


class PriorAccepted(BaseModel):
    prior_id: str
    verdict: VerdictModel


class OverrideResponse(BaseModel):
    prior_id: str
    verdict: VerdictModel


class RunHandleModel(BaseModel):
    run_id: str
    status: Literal["created", "running", "awaiting_prior_decision", "finished", "failed"]
    config: dict[str, Any]


class SliceResponse(BaseModel):
    dim: str
    kind: Literal["float", "int", "categorical"]
    xs: list[float] | list[str]
    mean: list[float]
    std: list[float]
    anchor: dict[str, Any]
