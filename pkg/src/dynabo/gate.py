"""Screening of incoming priors against the incumbent region.

An incoming prior is judged by Monte Carlo: sample around the prior's center
and around the incumbent (both with the prior's widths), score both clouds
with the negated lower confidence bound under the current surrogate, and
accept only if the prior region's mean score beats the incumbent region's by
at least the threshold ``tau``. The same standardized draws are reused for
both regions (with antithetic pairing), which removes most of the Monte
Carlo noise from the verdict without changing its expectation. The surrogate
is never refit or mutated; a rejected verdict can be overridden by the user.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from dynabo.acquisition import AcquisitionContext, lcb_values
from dynabo.priors import CENTER_CATEGORY_MASS, Prior, _arrays
from dynabo.space import INACTIVE, ConfigSpace, Configuration

DEFAULT_TAU = -0.15
DEFAULT_GATE_SAMPLES = 500


@dataclass(frozen=True)
class GateVerdict:
    accepted: bool
    prior_mean_lcb: float
    incumbent_mean_lcb: float
    margin: float
    tau: float
    sample_count: int
    overridden: bool = False

    def to_json(self) -> dict[str, Any]:
        def enc(v: float) -> float | str:
            if math.isinf(v):
                return "inf" if v > 0 else "-inf"
            return v

        return {
            "accepted": self.accepted,
            "prior_mean_lcb": self.prior_mean_lcb,
            "incumbent_mean_lcb": self.incumbent_mean_lcb,
            "margin": self.margin,
            "tau": enc(self.tau),
            "sample_count": self.sample_count,
            "overridden": self.overridden,
        }


def _region_samples(
    center_vec: np.ndarray,
    prior: Prior,
    space: ConfigSpace,
    z: np.ndarray,
    u: np.ndarray,
) -> np.ndarray:
    """Gaussian cloud around ``center_vec`` using the prior's widths and shared draws.

    Numeric dimensions clamp to bounds (log domain for log-scaled ones);
    categorical dimensions keep the center's category for 90% of the draws.
    Dimensions without a width stay at the center's value. Conditional
    activation is re-resolved afterwards.
    """
    a = _arrays(prior, space)
    n = z.shape[0]
    out = np.tile(center_vec, (n, 1))
    for k, i in enumerate(a.num_idx):
        p = space.params[i]
        if center_vec[i] == INACTIVE:
            continue
        lo, hi = (p.log_bounds() if p.log_scale else (p.lower, p.upper))
        c = math.log(center_vec[i]) if p.log_scale else center_vec[i]
        col = np.clip(c + a.stds[k] * z[:, k], lo, hi)
        col = np.exp(col) if p.log_scale else col
        if p.kind == "int":
            col = np.clip(np.round(col), p.lower, p.upper)
        out[:, i] = col
    for k, i in enumerate(a.cat_idx):
        n_cat = a.cat_sizes[k]
        if center_vec[i] == INACTIVE or n_cat < 2:
            continue
        center = int(center_vec[i])
        col = np.full(n, float(center))
        uu = u[:, k]
        off = uu >= CENTER_CATEGORY_MASS
        pick = ((uu[off] - CENTER_CATEGORY_MASS) / (1 - CENTER_CATEGORY_MASS) * (n_cat - 1)).astype(int)
        pick = np.minimum(pick, n_cat - 2)
        col[off] = np.where(pick >= center, pick + 1, pick)
        out[:, i] = col
    for i, p in enumerate(space.params):
        if p.condition is None:
            continue
        parent_name, required = p.condition
        j = space.index(parent_name)
        req_idx = space.get(parent_name).categories.index(required)
        out[out[:, j] != req_idx, i] = INACTIVE
    return out


def assess_prior(
    prior: Prior,
    ctx: AcquisitionContext,
    space: ConfigSpace,
    incumbent: Configuration,
    rng: np.random.Generator,
    tau: float = DEFAULT_TAU,
    n_samples: int = DEFAULT_GATE_SAMPLES,
) -> GateVerdict:
    """Compare LCB potential of the prior region against the incumbent region.

    Requires a fitted surrogate and an existing incumbent; raises otherwise.
    """
    if ctx.model is None:
        raise ValueError("gate requires a fitted surrogate")
    if incumbent is None or not math.isfinite(ctx.incumbent_loss):
        raise ValueError("gate requires at least one observation")

    a = _arrays(prior, space)
    half = max(1, n_samples // 2)
    z_half = rng.standard_normal((half, max(1, len(a.num_idx))))
    z = np.vstack([z_half, -z_half])[:n_samples]
    u = rng.random((n_samples, max(1, len(a.cat_idx))))

    prior_cloud = _region_samples(space.encode(prior.center), prior, space, z, u)
    inc_cloud = _region_samples(space.encode(incumbent), prior, space, z, u)

    pm, pv = ctx.model.predict_encoded(prior_cloud)
    im, iv = ctx.model.predict_encoded(inc_cloud)
    prior_mean = float(np.mean(lcb_values(pm, pv, ctx.kappa)))
    inc_mean = float(np.mean(lcb_values(im, iv, ctx.kappa)))
    margin = prior_mean - inc_mean
    return GateVerdict(
        accepted=bool(margin >= tau),
        prior_mean_lcb=prior_mean,
        incumbent_mean_lcb=inc_mean,
        margin=margin,
        tau=tau,
        sample_count=n_samples,
        overridden=False,
    )


def override(verdict: GateVerdict) -> GateVerdict:
    """User overrules a rejection; evidence fields are left untouched."""
    if verdict.accepted:
        return verdict  # no-op; callers log a warning
    return replace(verdict, accepted=True, overridden=True)
