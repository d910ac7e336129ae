"""Built-in synthetic objectives used by the bench harness and tests.

Every objective also carries a frozen ``loss_scale``: the mean excess of a
uniformly random configuration's loss over the optimum (measured once from
2e5 samples). Dividing by it maps losses onto a scale where "1" means "as
bad as a random guess", which is the regime the gate threshold and its
recommended range were calibrated for. ``get_objective("<id>:norm")``
returns that normalized variant.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from dynabo.space import ConfigSpace, Configuration, HyperparameterDef

NORM_SUFFIX = ":norm"


@dataclass(frozen=True)
class Objective:
    id: str
    space: ConfigSpace
    eval: Callable[[Configuration], float]
    known_min: float
    loss_scale: float = 1.0

    @property
    def dimension(self) -> int:
        return self.space.dim

    def __call__(self, config: Configuration) -> float:
        return self.eval(config)


@dataclass(frozen=True)
class _NormalizedEval:
    """Picklable normalized loss: (loss - known_min) / loss_scale."""

    base_id: str

    def __call__(self, config: Configuration) -> float:
        base = get_objective(self.base_id)
        return (base.eval(config) - base.known_min) / base.loss_scale


def normalized(objective: Objective) -> Objective:
    return Objective(
        id=objective.id + NORM_SUFFIX,
        space=objective.space,
        eval=_NormalizedEval(objective.id),
        known_min=0.0,
        loss_scale=1.0,
    )


def _branin(c: Configuration) -> float:
    x1, x2 = float(c["x1"]), float(c["x2"])
    b = 5.1 / (4 * math.pi**2)
    cc = 5 / math.pi
    t = 1 / (8 * math.pi)
    return (x2 - b * x1**2 + cc * x1 - 6) ** 2 + 10 * (1 - t) * math.cos(x1) + 10


_H6_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
_H6_A = np.array(
    [
        [10, 3, 17, 3.5, 1.7, 8],
        [0.05, 10, 17, 0.1, 8, 14],
        [3, 3.5, 1.7, 10, 17, 8],
        [17, 8, 0.05, 10, 0.1, 14],
    ]
)
_H6_P = 1e-4 * np.array(
    [
        [1312, 1696, 5569, 124, 8283, 5886],
        [2329, 4135, 8307, 3736, 1004, 9991],
        [2348, 1451, 3522, 2883, 3047, 6650],
        [4047, 8828, 8732, 5743, 1091, 381],
    ]
)


def _hartmann6(c: Configuration) -> float:
    x = np.array([float(c[f"x{i + 1}"]) for i in range(6)])
    inner = np.sum(_H6_A * (x - _H6_P) ** 2, axis=1)
    return float(-np.sum(_H6_ALPHA * np.exp(-inner)))


def _rastrigin4(c: Configuration) -> float:
    x = np.array([float(c[f"x{i + 1}"]) for i in range(4)])
    return float(10 * 4 + np.sum(x**2 - 10 * np.cos(2 * math.pi * x)))


_MS_OFF_A = {"narrow": 0.0, "wide": 0.35, "skip": 0.8}
_MS_OFF_B = {"relu": 0.25, "tanh": 0.0}


def _mixed_synth(c: Configuration) -> float:
    x1, x2 = float(c["x1"]), float(c["x2"])
    lr = float(c["lr"])
    base = (x1 - 0.3) ** 2 + (x2 - 0.7) ** 2 + (math.log(lr) - math.log(0.05)) ** 2 / 10
    return base + _MS_OFF_A[c["arch"]] + _MS_OFF_B[c["act"]]


def _numeric_space(bounds: list[tuple[float, float]]) -> ConfigSpace:
    return ConfigSpace(
        [
            HyperparameterDef(name=f"x{i + 1}", kind="float", lower=lo, upper=hi)
            for i, (lo, hi) in enumerate(bounds)
        ]
    )


@functools.lru_cache(maxsize=1)
def builtin_objectives() -> tuple[Objective, ...]:
    branin = Objective(
        id="branin",
        space=_numeric_space([(-5.0, 10.0), (0.0, 15.0)]),
        eval=_branin,
        known_min=0.39788735772973816,
        loss_scale=53.86,
    )
    hartmann6 = Objective(
        id="hartmann6",
        space=_numeric_space([(0.0, 1.0)] * 6),
        eval=_hartmann6,
        known_min=-3.322368011391339,
        loss_scale=3.065,
    )
    rastrigin4 = Objective(
        id="rastrigin4",
        space=_numeric_space([(-5.12, 5.12)] * 4),
        eval=_rastrigin4,
        known_min=0.0,
        loss_scale=74.16,
    )
    mixed_space = ConfigSpace(
        [
            HyperparameterDef(name="x1", kind="float", lower=0.0, upper=1.0),
            HyperparameterDef(name="x2", kind="float", lower=0.0, upper=1.0),
            HyperparameterDef(name="lr", kind="float", lower=1e-3, upper=1.0, log_scale=True),
            HyperparameterDef(name="arch", kind="categorical", categories=("narrow", "wide", "skip")),
            HyperparameterDef(name="act", kind="categorical", categories=("relu", "tanh")),
        ]
    )
    mixed = Objective(
        id="mixed_synth",
        space=mixed_space,
        eval=_mixed_synth,
        known_min=0.0,  # attained at x1=0.3, x2=0.7, lr=0.05, arch=narrow, act=tanh
        loss_scale=1.179,
    )
    return (branin, hartmann6, rastrigin4, mixed)


def get_objective(objective_id: str) -> Objective:
    if objective_id.endswith(NORM_SUFFIX):
        return normalized(get_objective(objective_id[: -len(NORM_SUFFIX)]))
    for obj in builtin_objectives():
        if obj.id == objective_id:
            return obj
    raise KeyError(f"unknown objective {objective_id!r}")
