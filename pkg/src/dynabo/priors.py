"""User beliefs about the optimum: representation, density, and sampling.

A prior is a product of per-dimension factors around a center configuration:
a max-normalized Gaussian kernel per numeric dimension (log domain for
log-scaled dimensions) and a two-level mass for categoricals (1 at the
center's category, ``categorical_off_mass`` elsewhere). Densities therefore
live in (0, 1] with value 1 exactly at the center, and are clipped below at
``DENSITY_FLOOR`` for numerical stability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from dynabo.space import INACTIVE, ConfigSpace, Configuration

DENSITY_FLOOR = 1e-12
CENTER_CATEGORY_MASS = 0.9  # sampling probability of the center's category
MAX_REJECTION_ROUNDS = 100


@dataclass(frozen=True)
class Prior:
    """Belief over the optimum's location, centered on one configuration.

    ``numeric_stds`` maps each numeric dimension that is active in the center
    to a positive width (raw units; log-domain width for log-scaled
    dimensions). ``label`` records provenance (a policy name or "user").
    """

    center: Configuration
    numeric_stds: dict[str, float]
    categorical_off_mass: float = 0.1
    label: str = "user"

    def __post_init__(self) -> None:
        if not (0.0 < self.categorical_off_mass < 1.0):
            raise ValueError("categorical_off_mass must be in (0, 1)")
        for name, s in self.numeric_stds.items():
            if not (s > 0):
                raise ValueError(f"std for {name!r} must be > 0")

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "center": {k: v for k, v in self.center.values.items() if self.center.active.get(k)},
            "stds": dict(self.numeric_stds),
            "categorical_off_mass": self.categorical_off_mass,
        }

    @classmethod
    def from_json(cls, doc: Mapping[str, Any], space: ConfigSpace) -> "Prior":
        center = config_from_values(doc["center"], space)
        stds = {str(k): float(v) for k, v in doc.get("stds", {}).items()}
        for name in stds:
            p = space.get(name)
            if not p.is_numeric:
                raise ValueError(f"std given for non-numeric dimension {name!r}")
        for p in space.params:
            if p.is_numeric and center.active[p.name] and p.name not in stds:
                raise ValueError(f"missing std for active numeric dimension {p.name!r}")
        return cls(
            center=center,
            numeric_stds=stds,
            categorical_off_mass=float(doc.get("categorical_off_mass", 0.1)),
            label=str(doc.get("label", "user")),
        )


def config_from_values(values: Mapping[str, Any], space: ConfigSpace) -> Configuration:
    """Build a validated Configuration from a plain name->value mapping."""
    active = space.resolve_active(values)
    kept = {k: v for k, v in values.items() if active.get(k, False)}
    unknown = set(values) - {p.name for p in space.params}
    if unknown:
        raise ValueError(f"unknown hyperparameters: {sorted(unknown)}")
    for p in space.params:
        if active[p.name] and p.name not in kept:
            raise ValueError(f"missing value for active hyperparameter {p.name!r}")
    cfg = Configuration(values=kept, active=active)
    space.validate(cfg)
    return cfg


class _PriorArrays:
    """Per-prior vectorized view used by density evaluation and sampling."""

    def __init__(self, prior: Prior, space: ConfigSpace):
        self.space = space
        self.prior = prior
        center_vec = space.encode(prior.center)
        num_idx, mus, stds, logs = [], [], [], []
        cat_idx, cat_centers, cat_sizes = [], [], []
        for i, p in enumerate(space.params):
            if not prior.center.active.get(p.name, False):
                continue
            if p.kind == "categorical":
                cat_idx.append(i)
                cat_centers.append(center_vec[i])
                cat_sizes.append(len(p.categories))
            else:
                num_idx.append(i)
                v = center_vec[i]
                mus.append(math.log(v) if p.log_scale else v)
                stds.append(prior.numeric_stds[p.name])
                logs.append(p.log_scale)
        self.num_idx = np.array(num_idx, dtype=int)
        self.mus = np.array(mus)
        self.stds = np.array(stds)
        self.logs = np.array(logs, dtype=bool)
        self.cat_idx = np.array(cat_idx, dtype=int)
        self.cat_centers = np.array(cat_centers)
        self.cat_sizes = np.array(cat_sizes, dtype=int)


def _arrays(prior: Prior, space: ConfigSpace) -> _PriorArrays:
    # cached on the (immutable) prior; one space per optimization run in practice
    cached = getattr(prior, "_vec_cache", None)
    if cached is None or cached.space is not space:
        cached = _PriorArrays(prior, space)
        object.__setattr__(prior, "_vec_cache", cached)
    return cached


def log_density_encoded(prior: Prior, x: np.ndarray, space: ConfigSpace) -> np.ndarray:
    """Log of the clipped prior density for each encoded row of ``x``."""
    a = _arrays(prior, space)
    x = np.atleast_2d(x)
    log_d = np.zeros(x.shape[0])
    if len(a.num_idx):
        vals = x[:, a.num_idx]
        activity = vals != INACTIVE
        t = np.where(a.logs[None, :], np.log(np.where(activity & (vals > 0), vals, 1.0)), vals)
        z = (t - a.mus[None, :]) / a.stds[None, :]
        log_d += np.sum(np.where(activity, -0.5 * z * z, 0.0), axis=1)
    if len(a.cat_idx):
        vals = x[:, a.cat_idx]
        activity = vals != INACTIVE
        mismatch = activity & (vals != a.cat_centers[None, :])
        log_d += np.sum(np.where(mismatch, math.log(prior.categorical_off_mass), 0.0), axis=1)
    return np.clip(log_d, math.log(DENSITY_FLOOR), 0.0)


def density(prior: Prior, config: Configuration, space: ConfigSpace) -> float:
    """Clipped prior density in [1e-12, 1]; equals 1 at the prior's center."""
    return float(np.exp(log_density_encoded(prior, space.encode(config), space))[0])


def sample_encoded(prior: Prior, space: ConfigSpace, rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` encoded configurations from the prior.

    Numeric dimensions use truncated normals (rejection with a bounded number
    of rounds, then clamping); categoricals pick the center's category with
    probability 0.9 and otherwise one of the remaining categories uniformly.
    Conditional activation is re-resolved after all dimensions are drawn.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    a = _arrays(prior, space)
    out = space.sample_uniform_encoded(rng, n)  # fills dims the prior does not constrain

    for k, i in enumerate(a.num_idx):
        p = space.params[i]
        lo, hi = (p.log_bounds() if p.log_scale else (p.lower, p.upper))
        draw = a.mus[k] + a.stds[k] * rng.standard_normal(n)
        bad = (draw < lo) | (draw > hi)
        rounds = 0
        while bad.any() and rounds < MAX_REJECTION_ROUNDS:
            draw[bad] = a.mus[k] + a.stds[k] * rng.standard_normal(int(bad.sum()))
            bad = (draw < lo) | (draw > hi)
            rounds += 1
        draw = np.clip(draw, lo, hi)
        col = np.exp(draw) if p.log_scale else draw
        if p.kind == "int":
            col = np.clip(np.round(col), p.lower, p.upper)
        out[:, i] = col

    for k, i in enumerate(a.cat_idx):
        n_cat = a.cat_sizes[k]
        center = int(a.cat_centers[k])
        col = np.full(n, float(center))
        if n_cat > 1:
            u = rng.random(n)
            off = u >= CENTER_CATEGORY_MASS
            # rescale the off-mass tail to a uniform pick over the other categories
            pick = ((u[off] - CENTER_CATEGORY_MASS) / (1 - CENTER_CATEGORY_MASS) * (n_cat - 1)).astype(int)
            pick = np.minimum(pick, n_cat - 2)
            col[off] = np.where(pick >= center, pick + 1, pick)
        out[:, i] = col

    # re-resolve conditional activation against the drawn parent values
    for i, p in enumerate(space.params):
        if p.condition is None:
            continue
        parent_name, required = p.condition
        j = space.index(parent_name)
        req_idx = space.get(parent_name).categories.index(required)
        inactive = out[:, j] != req_idx
        out[inactive, i] = INACTIVE
    return out


def sample(prior: Prior, space: ConfigSpace, rng: np.random.Generator, n: int) -> list[Configuration]:
    return [space.decode(row) for row in sample_encoded(prior, space, rng, n)]


def build_synthetic_prior(
    center: Configuration,
    space: ConfigSpace,
    prior_index: int,
    label: str = "synthetic",
    categorical_off_mass: float = 0.1,
) -> Prior:
    """Prior with widths shrinking in the prior index (trust grows over time).

    Each numeric std is the dimension's range divided by ``5 * prior_index``
    (log-domain range for log-scaled dimensions); categoricals keep the
    center's value as their mode.
    """
    if prior_index < 1:
        raise ValueError("prior_index must be >= 1")
    space.validate(center)
    stds: dict[str, float] = {}
    for p in space.params:
        if not p.is_numeric or not center.active.get(p.name, False):
            continue
        if p.log_scale:
            lo, hi = p.log_bounds()
        else:
            lo, hi = p.lower, p.upper
        stds[p.name] = abs(hi - lo) / (prior_index * 5)
    return Prior(
        center=center,
        numeric_stds=stds,
        categorical_off_mass=categorical_off_mass,
        label=label,
    )
