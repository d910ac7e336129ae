"""Probabilistic surrogates: Gaussian process and random-forest backends.

Both backends share the same interface: fit on encoded configurations plus
observed losses, then predict a posterior mean and variance per query point.
Losses are never log-transformed. Models are immutable once fitted and are
refit from scratch every iteration by the optimization loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize
from sklearn.ensemble import RandomForestRegressor

from dynabo.space import INACTIVE, ConfigSpace, Configuration

JITTER_START = 1e-10
JITTER_MAX = 1e-4


@dataclass(frozen=True)
class PosteriorPrediction:
    mean: float
    variance: float


class SurrogateModel:
    """Common query surface of both backends."""

    warnings: tuple[str, ...] = ()

    def predict_encoded(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def predict(self, config: Configuration) -> PosteriorPrediction:
        m, v = self.predict_encoded(self.space.encode(config)[None, :])
        return PosteriorPrediction(mean=float(m[0]), variance=float(v[0]))


# ---------------------------------------------------------------------------
# Gaussian process
# ---------------------------------------------------------------------------


def _gp_features(x: np.ndarray, space: ConfigSpace) -> np.ndarray:
    """Map encoded rows to GP inputs: numerics scaled to [0,1], categoricals one-hot."""
    x = np.atleast_2d(x)
    cols = []
    for i, p in enumerate(space.params):
        col = x[:, i]
        if p.kind == "categorical":
            k = len(p.categories)
            onehot = np.zeros((len(col), k))
            active = col != INACTIVE
            onehot[active, col[active].astype(int)] = 1.0
            cols.append(onehot)
        else:
            lo = min(p.lower, INACTIVE) if p.condition is not None else p.lower
            cols.append(((col - lo) / (p.upper - lo))[:, None])
    return np.hstack(cols)


def _matern52(z: np.ndarray, ls: np.ndarray, amp2: float) -> np.ndarray:
    """Matern-5/2 kernel matrix for pre-scaled inputs z (n x d) / length-scales ls."""
    d = z[:, None, :] - z[None, :, :]
    r2 = np.sum((d / ls) ** 2, axis=-1)
    r = np.sqrt(np.maximum(r2, 0.0))
    sr = math.sqrt(5.0) * r
    return amp2 * (1.0 + sr + 5.0 * r2 / 3.0) * np.exp(-sr)


def _matern52_cross(za: np.ndarray, zb: np.ndarray, ls: np.ndarray, amp2: float) -> np.ndarray:
    d = za[:, None, :] - zb[None, :, :]
    r2 = np.sum((d / ls) ** 2, axis=-1)
    r = np.sqrt(np.maximum(r2, 0.0))
    sr = math.sqrt(5.0) * r
    return amp2 * (1.0 + sr + 5.0 * r2 / 3.0) * np.exp(-sr)


def _chol_with_jitter(k: np.ndarray) -> tuple[np.ndarray, float]:
    """Cholesky factor, escalating diagonal jitter 1e-10 -> x10 -> ... -> 1e-4."""
    jitter = 0.0
    try:
        return cholesky(k, lower=True), jitter
    except np.linalg.LinAlgError:
        pass
    jitter = JITTER_START
    while jitter <= JITTER_MAX:
        try:
            return cholesky(k + jitter * np.eye(len(k)), lower=True), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise np.linalg.LinAlgError("kernel matrix not positive definite even at max jitter")


class GpSurrogate(SurrogateModel):
    """GP with a Matern-5/2 ARD kernel, constant amplitude, and Gaussian noise.

    Hyperparameters (log length-scales, log amplitude, log noise) are set by
    maximizing the log marginal likelihood with a multi-start local search.
    Targets are standardized internally; predictions are reported in raw loss
    units and the variance is that of the latent function (no noise term).
    """

    def __init__(
        self,
        space: ConfigSpace,
        x: np.ndarray,
        y: np.ndarray,
        rng: np.random.Generator,
        optimize: bool = True,
        n_restarts: int = 8,
        length_scales: np.ndarray | None = None,
        amplitude: float = 1.0,
        noise: float = 1e-6,
    ):
        self.space = space
        self.x_train = np.asarray(x, dtype=float)
        z = _gp_features(self.x_train, space)
        self._z = z
        y = np.asarray(y, dtype=float)
        self._y_mean = float(np.mean(y))
        y_std = float(np.std(y))
        self._degenerate = False
        warnings: list[str] = []
        if y_std < 1e-12 or len(np.unique(z, axis=0)) < 2:
            # all-identical inputs or constant targets: noise-only prior fallback
            self._degenerate = True
            warnings.append("degenerate training data; falling back to prior prediction")
            y_std = max(y_std, 1.0)
        self._y_scale = y_std
        self._yn = (y - self._y_mean) / self._y_scale

        d = z.shape[1]
        if self._degenerate:
            self._ls = np.ones(d)
            self._amp2 = 1.0
            self._noise = 1.0
        elif optimize:
            self._ls, self._amp2, self._noise = self._fit_hyperparameters(rng, n_restarts)
        else:
            ls = np.ones(d) if length_scales is None else np.asarray(length_scales, dtype=float)
            self._ls, self._amp2, self._noise = ls, amplitude**2, noise
        self._finalize()
        self.warnings = tuple(warnings)

    # -- likelihood ---------------------------------------------------------

    def _nll_and_grad(self, theta: np.ndarray) -> tuple[float, np.ndarray]:
        z, y = self._z, self._yn
        n, d = z.shape
        ls = np.exp(theta[:d])
        amp2 = math.exp(2.0 * theta[d])
        noise = math.exp(2.0 * theta[d + 1])

        diff = z[:, None, :] - z[None, :, :]
        sq = (diff / ls) ** 2
        r2 = np.sum(sq, axis=-1)
        r = np.sqrt(np.maximum(r2, 0.0))
        sr = math.sqrt(5.0) * r
        e = np.exp(-sr)
        k = amp2 * (1.0 + sr + 5.0 * r2 / 3.0) * e
        k_noisy = k + noise * np.eye(n)
        try:
            low, jitter = _chol_with_jitter(k_noisy)
        except np.linalg.LinAlgError:
            return 1e25, np.zeros_like(theta)
        alpha = cho_solve((low, True), y)
        nll = 0.5 * float(y @ alpha) + float(np.sum(np.log(np.diag(low)))) + 0.5 * n * math.log(2 * math.pi)

        kinv = cho_solve((low, True), np.eye(n))
        w = np.outer(alpha, alpha) - kinv  # gradient weight matrix

        grad = np.empty_like(theta)
        # d k / d log ls_j = amp2 * (5/3) (1 + sr) e * sq_j  (sq_j = diff_j^2/ls_j^2)
        base = amp2 * (5.0 / 3.0) * (1.0 + sr) * e
        for j in range(d):
            grad[j] = -0.5 * float(np.sum(w * (base * sq[:, :, j])))
        grad[d] = -0.5 * float(np.sum(w * (2.0 * k)))
        grad[d + 1] = -0.5 * float(np.trace(w) * 2.0 * noise)
        return nll, grad

    def _fit_hyperparameters(self, rng: np.random.Generator, n_restarts: int) -> tuple[np.ndarray, float, float]:
        d = self._z.shape[1]
        bounds = [(math.log(1e-3), math.log(1e3))] * d + [
            (math.log(1e-3), math.log(1e3)),
            (math.log(1e-6), math.log(1.0)),
        ]
        starts = [np.concatenate([np.zeros(d), [0.0], [math.log(1e-3)]])]
        for _ in range(n_restarts - 1):
            starts.append(np.array([rng.uniform(lo, hi) for lo, hi in bounds]))
        best_val, best_theta = math.inf, starts[0]
        for s in starts:
            res = minimize(self._nll_and_grad, s, jac=True, method="L-BFGS-B", bounds=bounds)
            if res.fun < best_val:
                best_val, best_theta = float(res.fun), res.x
        ls = np.exp(best_theta[:d])
        return ls, math.exp(2.0 * best_theta[d]), math.exp(2.0 * best_theta[d + 1])

    def _finalize(self) -> None:
        n = len(self._yn)
        k = _matern52(self._z, self._ls, self._amp2) + self._noise * np.eye(n)
        self._low, self._jitter = _chol_with_jitter(k)
        self._alpha = cho_solve((self._low, True), self._yn)

    # -- prediction -----------------------------------------------------------

    @property
    def prior_variance(self) -> float:
        """Kernel amplitude in raw loss-squared units."""
        return self._amp2 * self._y_scale**2

    @property
    def noise_variance(self) -> float:
        return self._noise * self._y_scale**2

    @property
    def length_scales(self) -> np.ndarray:
        return self._ls.copy()

    def predict_encoded(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        zq = _gp_features(np.atleast_2d(x), self.space)
        if self._degenerate:
            n = zq.shape[0]
            return np.full(n, self._y_mean), np.full(n, self.prior_variance)
        ks = _matern52_cross(zq, self._z, self._ls, self._amp2)
        mean = ks @ self._alpha
        v = solve_triangular(self._low, ks.T, lower=True)
        var = self._amp2 - np.sum(v * v, axis=0)
        var = np.maximum(var, 0.0)
        return mean * self._y_scale + self._y_mean, var * self._y_scale**2


# ---------------------------------------------------------------------------
# Random forest
# ---------------------------------------------------------------------------


class ForestSurrogate(SurrogateModel):
    """Regression forest on raw encodings (categoricals split by index).

    Predictive mean is the average of per-tree means; predictive variance is
    the spread across tree means plus the mean within-leaf variance.
    """

    def __init__(
        self,
        space: ConfigSpace,
        x: np.ndarray,
        y: np.ndarray,
        rng: np.random.Generator,
        trees_count: int = 64,
        min_samples_split: int = 3,
        bootstrap: bool = True,
        bootstrap_fraction: float = 1.0,
    ):
        if trees_count < 1:
            raise ValueError("trees_count must be >= 1")
        if not (0.0 < bootstrap_fraction <= 1.0):
            raise ValueError("bootstrap fraction must be in (0, 1]")
        self.space = space
        self.x_train = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        d = x.shape[1]
        max_features = min(d, max(1, math.ceil(d * 5 / 6)))
        self._est = RandomForestRegressor(
            n_estimators=trees_count,
            min_samples_split=min_samples_split,
            max_features=max_features,
            bootstrap=bootstrap,
            max_samples=bootstrap_fraction if (bootstrap and bootstrap_fraction < 1.0) else None,
            random_state=int(rng.integers(2**31 - 1)),
            n_jobs=1,
        )
        self._est.fit(self.x_train, y)
        # per-tree per-node means and variances, indexed by node id
        self._node_means = [t.tree_.value[:, 0, 0] for t in self._est.estimators_]
        self._node_vars = [t.tree_.impurity for t in self._est.estimators_]

    @property
    def trees_count(self) -> int:
        return self._est.n_estimators

    def predict_encoded(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = np.atleast_2d(x)
        leaves = self._est.apply(x)  # (n, trees)
        t = leaves.shape[1]
        means = np.empty((x.shape[0], t))
        leaf_vars = np.empty((x.shape[0], t))
        for j in range(t):
            means[:, j] = self._node_means[j][leaves[:, j]]
            leaf_vars[:, j] = self._node_vars[j][leaves[:, j]]
        mean = means.mean(axis=1)
        across = means.var(axis=1)
        within = np.maximum(leaf_vars, 0.0).mean(axis=1)
        return mean, across + within


# ---------------------------------------------------------------------------
# Factory
# ---------------------------------------------------------------------------


def fit_surrogate(
    kind: str,
    observations: Sequence[tuple[Configuration, float]] | None,
    space: ConfigSpace,
    rng: np.random.Generator,
    x: np.ndarray | None = None,
    y: np.ndarray | None = None,
    **params,
) -> SurrogateModel:
    """Fit a surrogate of the requested kind ("gp" or "rf").

    Accepts either (Configuration, loss) pairs or pre-encoded arrays.
    """
    if x is None or y is None:
        if observations is None or len(observations) < 2:
            raise ValueError("need at least 2 observations")
        x = space.encode_many([c for c, _ in observations])
        y = np.array([loss for _, loss in observations], dtype=float)
    if len(x) < 2:
        raise ValueError("need at least 2 observations")
    if not np.all(np.isfinite(y)):
        raise ValueError("losses must be finite")
    if kind == "gp":
        return GpSurrogate(space, x, y, rng, **params)
    if kind == "rf":
        return ForestSurrogate(space, x, y, rng, **params)
    raise ValueError(f"unknown surrogate kind {kind!r}")
