"""Bayesian optimization with runtime-injectable, individually fading priors.

The package couples a classic surrogate/acquisition loop with two extras:
user beliefs about the optimum can be stacked into the acquisition function
at any point of a running optimization (each belief fading with its own age),
and a surrogate-based gate screens incoming beliefs, rejecting those predicted
to be misleading while letting the user overrule the rejection.
"""

from dynabo.space import ConfigSpace, Configuration, HyperparameterDef, gower_distance
from dynabo.priors import Prior, build_synthetic_prior
from dynabo.engine import RunConfig, RunState, run

__all__ = [
    "ConfigSpace",
    "Configuration",
    "HyperparameterDef",
    "Prior",
    "RunConfig",
    "RunState",
    "build_synthetic_prior",
    "gower_distance",
    "run",
]
