"""Acquisition functions: EI, LCB, and the prior-weighted dynamic variant.

The dynamic score multiplies the base acquisition (EI during candidate
selection) by one factor per active prior, ``pi(x) ** (beta / age**p)``
with ``p = 2`` by default. Each factor converges to 1 as the prior ages, so
stale beliefs fade individually and the score reverts to the base
acquisition. LCB is kept for the rejection gate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import ndtr

from dynabo.priors import Prior, log_density_encoded
from dynabo.space import ConfigSpace, Configuration
from dynabo.surrogates import SurrogateModel

SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class ActivePrior:
    """A prior together with the iteration it arrived at.

    ``decay_power`` overrides the context default for this prior only; the
    static single-prior baseline uses power 1 (plain ``beta / age``).
    """

    prior: Prior
    arrival_iteration: int
    id: str = ""
    decay_power: int | None = None


@dataclass
class AcquisitionContext:
    """Everything needed to score candidates at one iteration.

    ``selection`` names the base acquisition used for candidate ranking;
    prior weighting assumes the nonnegative EI base and is only combined
    with it.
    """

    model: SurrogateModel
    incumbent_loss: float
    iteration: int
    beta: float
    kappa: float = 1.0
    decay_power: int = 2
    active_priors: list[ActivePrior] = field(default_factory=list)
    selection: str = "ei"


def ei_values(means: np.ndarray, variances: np.ndarray, incumbent_loss: float) -> np.ndarray:
    """Closed-form expected improvement under a Gaussian posterior (minimization)."""
    sigma = np.sqrt(np.maximum(variances, 0.0))
    improve = incumbent_loss - means
    out = np.maximum(improve, 0.0)  # sigma == 0 branch
    pos = sigma > 0
    if np.any(pos):
        z = improve[pos] / sigma[pos]
        pdf = np.exp(-0.5 * z * z) / SQRT_2PI
        out[pos] = improve[pos] * ndtr(z) + sigma[pos] * pdf
    return out


def lcb_values(means: np.ndarray, variances: np.ndarray, kappa: float) -> np.ndarray:
    """Negated lower confidence bound, oriented so larger is better."""
    return -(means - kappa * np.sqrt(np.maximum(variances, 0.0)))


def ei(ctx: AcquisitionContext, config: Configuration, space: ConfigSpace) -> float:
    m, v = ctx.model.predict_encoded(space.encode(config)[None, :])
    return float(ei_values(m, v, ctx.incumbent_loss)[0])


def lcb(ctx: AcquisitionContext, config: Configuration, space: ConfigSpace) -> float:
    m, v = ctx.model.predict_encoded(space.encode(config)[None, :])
    return float(lcb_values(m, v, ctx.kappa)[0])


def _prior_exponent(ap: ActivePrior, iteration: int, beta: float, default_power: int) -> float:
    age = iteration - ap.arrival_iteration
    if age < 1:
        raise ValueError(f"prior {ap.id!r} has age {age}; priors take effect at the next proposal")
    power = default_power if ap.decay_power is None else ap.decay_power
    return beta / age**power


def dyna_weight_encoded(
    active_priors: Sequence[ActivePrior],
    x: np.ndarray,
    space: ConfigSpace,
    iteration: int,
    beta: float,
    decay_power: int = 2,
) -> np.ndarray:
    """Stacked prior weight in (0, 1] for each encoded row; 1 when no priors."""
    x = np.atleast_2d(x)
    log_w = np.zeros(x.shape[0])
    for ap in active_priors:
        exponent = _prior_exponent(ap, iteration, beta, decay_power)
        log_w += exponent * log_density_encoded(ap.prior, x, space)
    return np.exp(log_w)


def dyna_weight(
    active_priors: Sequence[ActivePrior],
    config: Configuration,
    space: ConfigSpace,
    iteration: int,
    beta: float,
    decay_power: int = 2,
) -> float:
    return float(
        dyna_weight_encoded(active_priors, space.encode(config), space, iteration, beta, decay_power)[0]
    )


def alpha_dyna_encoded(ctx: AcquisitionContext, x: np.ndarray, space: ConfigSpace) -> np.ndarray:
    """Prior-weighted EI over encoded rows: base EI times the stacked weight."""
    x = np.atleast_2d(x)
    means, variances = ctx.model.predict_encoded(x)
    if ctx.selection == "lcb":
        return lcb_values(means, variances, ctx.kappa)
    base = ei_values(means, variances, ctx.incumbent_loss)
    if not ctx.active_priors:
        return base
    w = dyna_weight_encoded(ctx.active_priors, x, space, ctx.iteration, ctx.beta, ctx.decay_power)
    return base * w


def alpha_dyna(ctx: AcquisitionContext, config: Configuration, space: ConfigSpace) -> float:
    return float(alpha_dyna_encoded(ctx, space.encode(config)[None, :], space)[0])
