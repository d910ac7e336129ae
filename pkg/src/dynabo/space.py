"""Mixed hyperparameter spaces: definition, sampling, encoding, Gower distance.

A space is an ordered list of numeric (float/int, optionally log-scaled) and
categorical hyperparameters. A hyperparameter may be conditioned on a single
categorical parent taking one specific value; conditionality is one level deep
(parent -> child). Inactive dimensions are encoded with the sentinel -1.
"""

from __future__ import annotations

import json
import hashlib
import math
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

INACTIVE = -1.0

KINDS = ("float", "int", "categorical")


@dataclass(frozen=True)
class HyperparameterDef:
    """One dimension of a configuration space.

    ``kind`` is one of ``"float"``, ``"int"`` or ``"categorical"``. Numeric
    kinds carry bounds (and optionally a log scale); categoricals carry an
    ordered, duplicate-free list of labels. ``condition`` is an optional
    ``(parent_name, required_value)`` pair referring to a categorical parent.
    """

    name: str
    kind: str
    lower: float | None = None
    upper: float | None = None
    log_scale: bool = False
    categories: tuple[str, ...] = ()
    condition: tuple[str, Any] | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r} for {self.name!r}")
        if self.kind == "categorical":
            if not self.categories:
                raise ValueError(f"{self.name!r}: categories must be non-empty")
            if len(set(self.categories)) != len(self.categories):
                raise ValueError(f"{self.name!r}: duplicate categories")
        else:
            if self.lower is None or self.upper is None:
                raise ValueError(f"{self.name!r}: numeric bounds required")
            if not (self.lower < self.upper):
                raise ValueError(f"{self.name!r}: lower must be < upper")
            if self.log_scale and self.lower <= 0:
                raise ValueError(f"{self.name!r}: log scale needs lower > 0")

    @property
    def is_numeric(self) -> bool:
        return self.kind in ("float", "int")

    def log_bounds(self) -> tuple[float, float]:
        return math.log(self.lower), math.log(self.upper)


@dataclass(frozen=True)
class Configuration:
    """A point of the space: value per hyperparameter plus activity flags."""

    values: dict[str, Any]
    active: dict[str, bool]

    def __getitem__(self, name: str) -> Any:
        return self.values[name]

    def is_active(self, name: str) -> bool:
        return self.active[name]


class ConfigSpace:
    """Ordered, immutable collection of hyperparameter definitions.

    Encoding order is the declaration order and is stable for the lifetime
    of the space. RNG streams are always passed in by the caller.
    """

    def __init__(self, params: Sequence[HyperparameterDef]):
        self.params: tuple[HyperparameterDef, ...] = tuple(params)
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ValueError("duplicate hyperparameter names")
        self._index = {p.name: i for i, p in enumerate(self.params)}
        for p in self.params:
            if p.condition is None:
                continue
            parent_name, value = p.condition
            if parent_name not in self._index:
                raise ValueError(f"{p.name!r}: unknown parent {parent_name!r}")
            parent = self.params[self._index[parent_name]]
            if parent.kind != "categorical":
                raise ValueError(f"{p.name!r}: parent must be categorical")
            if parent.condition is not None:
                raise ValueError(f"{p.name!r}: conditions may only be one level deep")
            if value not in parent.categories:
                raise ValueError(f"{p.name!r}: condition value {value!r} not a category of {parent_name!r}")

    # -- basic introspection ------------------------------------------------

    def __len__(self) -> int:
        return len(self.params)

    @property
    def dim(self) -> int:
        return len(self.params)

    def names(self) -> list[str]:
        return [p.name for p in self.params]

    def index(self, name: str) -> int:
        return self._index[name]

    def get(self, name: str) -> HyperparameterDef:
        return self.params[self._index[name]]

    def numeric_indices(self) -> list[int]:
        return [i for i, p in enumerate(self.params) if p.is_numeric]

    def categorical_indices(self) -> list[int]:
        return [i for i, p in enumerate(self.params) if p.kind == "categorical"]

    # -- validation & activity ----------------------------------------------

    def _condition_holds(self, p: HyperparameterDef, values: Mapping[str, Any]) -> bool:
        if p.condition is None:
            return True
        parent_name, required = p.condition
        return values.get(parent_name) == required

    def resolve_active(self, values: Mapping[str, Any]) -> dict[str, bool]:
        """Activity mask implied by the parent values alone."""
        return {p.name: self._condition_holds(p, values) for p in self.params}

    def validate(self, config: Configuration) -> None:
        for p in self.params:
            active = config.active.get(p.name, False)
            expected = self._condition_holds(p, config.values)
            if active != expected:
                raise ValueError(f"{p.name!r}: activity flag inconsistent with condition")
            if not active:
                continue
            v = config.values.get(p.name)
            if p.kind == "categorical":
                if v not in p.categories:
                    raise ValueError(f"{p.name!r}: {v!r} is not a declared category")
            else:
                if v is None or not (p.lower <= float(v) <= p.upper):
                    raise ValueError(f"{p.name!r}: value {v!r} outside [{p.lower}, {p.upper}]")
                if p.kind == "int" and float(v) != round(float(v)):
                    raise ValueError(f"{p.name!r}: value {v!r} is not integral")

    # -- encoding -------------------------------------------------------------

    def encode(self, config: Configuration) -> np.ndarray:
        """Fixed-order vector: raw numeric values, category indices, -1 if inactive."""
        out = np.empty(len(self.params))
        for i, p in enumerate(self.params):
            if not config.active.get(p.name, False):
                out[i] = INACTIVE
            elif p.kind == "categorical":
                out[i] = float(p.categories.index(config.values[p.name]))
            else:
                out[i] = float(config.values[p.name])
        return out

    def decode(self, vec: np.ndarray) -> Configuration:
        """Inverse of :meth:`encode`; rejects out-of-bounds coordinates."""
        if len(vec) != len(self.params):
            raise ValueError(f"expected {len(self.params)} coordinates, got {len(vec)}")
        values: dict[str, Any] = {}
        active: dict[str, bool] = {}
        # parents are unconditional, so a single declaration-order pass suffices
        for i, p in enumerate(self.params):
            if not self._condition_holds(p, values):
                if vec[i] != INACTIVE:
                    raise ValueError(f"{p.name!r}: inactive dimension must carry {INACTIVE}")
                active[p.name] = False
                continue
            active[p.name] = True
            x = float(vec[i])
            if p.kind == "categorical":
                idx = int(round(x))
                if idx != x or not (0 <= idx < len(p.categories)):
                    raise ValueError(f"{p.name!r}: invalid category index {x}")
                values[p.name] = p.categories[idx]
            elif p.kind == "int":
                if x != round(x) or not (p.lower <= x <= p.upper):
                    raise ValueError(f"{p.name!r}: invalid integer coordinate {x}")
                values[p.name] = int(round(x))
            else:
                if not (p.lower <= x <= p.upper):
                    raise ValueError(f"{p.name!r}: coordinate {x} outside bounds")
                values[p.name] = x
        return Configuration(values=values, active=active)

    def encode_many(self, configs: Iterable[Configuration]) -> np.ndarray:
        rows = [self.encode(c) for c in configs]
        return np.array(rows) if rows else np.empty((0, self.dim))

    # -- sampling -------------------------------------------------------------

    def sample_uniform(self, rng: np.random.Generator, n: int) -> list[Configuration]:
        """Uniform samples; log-scaled numerics are uniform in the log domain."""
        if n < 1:
            raise ValueError("n must be >= 1")
        return [self.decode(row) for row in self.sample_uniform_encoded(rng, n)]

    def sample_uniform_encoded(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Vectorized uniform sampling straight into encoded form."""
        u = rng.random((n, self.dim))
        return self.from_unit_cube(u)

    def from_unit_cube(self, u: np.ndarray) -> np.ndarray:
        """Map unit-cube rows to encoded configurations, resolving conditionals."""
        n = u.shape[0]
        out = np.empty_like(u)
        for i, p in enumerate(self.params):
            col = u[:, i]
            if p.kind == "categorical":
                out[:, i] = np.minimum((col * len(p.categories)).astype(int), len(p.categories) - 1)
            elif p.log_scale:
                lo, hi = p.log_bounds()
                out[:, i] = np.exp(lo + col * (hi - lo))
            else:
                out[:, i] = p.lower + col * (p.upper - p.lower)
            if p.kind == "int":
                out[:, i] = np.clip(np.round(out[:, i]), p.lower, p.upper)
        # deactivate children whose parent drew a different value
        for i, p in enumerate(self.params):
            if p.condition is None:
                continue
            parent_name, required = p.condition
            j = self._index[parent_name]
            req_idx = self.params[j].categories.index(required)
            out[out[:, j] != req_idx, i] = INACTIVE
        return out

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        entries = []
        for p in self.params:
            e: dict[str, Any] = {"name": p.name, "type": p.kind}
            if p.kind == "categorical":
                e["categories"] = list(p.categories)
            else:
                e["lower"] = p.lower
                e["upper"] = p.upper
                if p.log_scale:
                    e["log"] = True
            if p.condition is not None:
                e["condition"] = {"parent": p.condition[0], "value": p.condition[1]}
            entries.append(e)
        return {"hyperparameters": entries}

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> "ConfigSpace":
        params = []
        for e in doc["hyperparameters"]:
            cond = None
            if "condition" in e and e["condition"] is not None:
                cond = (e["condition"]["parent"], e["condition"]["value"])
            params.append(
                HyperparameterDef(
                    name=e["name"],
                    kind=e["type"],
                    lower=e.get("lower"),
                    upper=e.get("upper"),
                    log_scale=bool(e.get("log", False)),
                    categories=tuple(e.get("categories", ())),
                    condition=cond,
                )
            )
        return cls(params)

    def content_hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


# -- Gower distance -------------------------------------------------------------


def _numeric_range(p: HyperparameterDef) -> float:
    # dimensions that can go inactive extend the range down to the sentinel
    lo = min(p.lower, INACTIVE) if p.condition is not None else p.lower
    return p.upper - lo


def gower_distance(a: Configuration, b: Configuration, space: ConfigSpace) -> float:
    """Mean per-dimension dissimilarity in [0, 1] on the -1-filled encoding."""
    return float(gower_matrix(space.encode_many([a]), space, space.encode_many([b]))[0, 0])


def gower_matrix(x: np.ndarray, space: ConfigSpace, y: np.ndarray | None = None) -> np.ndarray:
    """Pairwise Gower distances between encoded rows of ``x`` and ``y``.

    Numeric dimensions contribute the range-normalized absolute difference
    (range extended to include the -1 sentinel for conditional dimensions);
    categorical dimensions contribute a 0/1 mismatch indicator. Two inactive
    values compare equal.
    """
    if y is None:
        y = x
    x = np.atleast_2d(x)
    y = np.atleast_2d(y)
    total = np.zeros((x.shape[0], y.shape[0]))
    for i, p in enumerate(space.params):
        xi = x[:, i][:, None]
        yi = y[:, i][None, :]
        if p.kind == "categorical":
            total += (xi != yi).astype(float)
        else:
            total += np.abs(xi - yi) / _numeric_range(p)
    return total / space.dim
