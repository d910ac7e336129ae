import math

import numpy as np
import pytest

from dynabo.acquisition import (
    ActivePrior,
    AcquisitionContext,
    alpha_dyna_encoded,
    dyna_weight,
    ei_values,
    lcb_values,
)
from dynabo.priors import Prior, config_from_values
from dynabo.surrogates import GpSurrogate


def mc_ei(mu, sigma, f_star, n=1_000_000, seed=0):
    """Monte Carlo oracle: E[max(f* - X, 0)] with X ~ N(mu, sigma^2)."""
    x = np.random.default_rng(seed).normal(mu, sigma, n)
    return float(np.maximum(f_star - x, 0.0).mean())


def test_ei_at_incumbent_mean_matches_mc_oracle():
    analytic = ei_values(np.array([0.0]), np.array([1.0]), 0.0)[0]
    assert analytic == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-9)
    assert abs(analytic - mc_ei(0.0, 1.0, 0.0)) < 1e-3


def test_ei_zero_sigma_branches():
    assert ei_values(np.array([1.0]), np.array([0.0]), 0.0)[0] == 0.0
    assert ei_values(np.array([-2.0]), np.array([0.0]), 0.0)[0] == 2.0


def test_lcb_examples():
    assert lcb_values(np.array([1.0]), np.array([0.0]), 1.0)[0] == -1.0
    assert lcb_values(np.array([1.0]), np.array([0.25]), 2.0)[0] == 0.0
    vals = [lcb_values(np.array([1.0]), np.array([s**2]), 1.0)[0] for s in (0.0, 0.5, 1.0, 2.0)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def _prior(space, mu, sigma):
    return Prior(center=config_from_values({"x": mu}, space), numeric_stds={"x": sigma})


def test_dyna_weight_empty_product(unit_space):
    cfg = config_from_values({"x": 0.5}, unit_space)
    assert dyna_weight([], cfg, unit_space, 10, 20.0) == 1.0


def test_dyna_weight_closed_form(unit_space):
    # pi = 0.5 at one sigma * sqrt(2 ln 2) off-center; force pi exactly 0.5 instead
    p = _prior(unit_space, 0.5, 0.1)
    x_half = 0.5 + 0.1 * math.sqrt(2 * math.log(2.0))  # density exactly 0.5
    cfg = config_from_values({"x": x_half}, unit_space)
    ap = ActivePrior(prior=p, arrival_iteration=0, id="p")
    w = dyna_weight([ap], cfg, unit_space, 10, 20.0)
    assert w == pytest.approx(0.5 ** (20.0 / 100.0), rel=1e-9)
    assert w == pytest.approx(0.87055, abs=5e-6)


def test_dyna_weight_product_law_equal_ages(unit_space):
    p1 = _prior(unit_space, 0.4, 0.1)
    p2 = _prior(unit_space, 0.7, 0.2)
    cfg = config_from_values({"x": 0.55}, unit_space)
    aps = [ActivePrior(p1, 0, id="a"), ActivePrior(p2, 0, id="b")]
    combined = dyna_weight(aps, cfg, unit_space, 8, 20.0)
    from dynabo.priors import density

    pi1 = density(p1, cfg, unit_space)
    pi2 = density(p2, cfg, unit_space)
    assert combined == pytest.approx((pi1 * pi2) ** (20.0 / 64.0), rel=1e-12)


def test_dyna_weight_monotone_fading(unit_space):
    p = _prior(unit_space, 0.2, 0.05)
    cfg = config_from_values({"x": 0.9}, unit_space)
    ap = ActivePrior(p, 0, id="p")
    ws = [dyna_weight([ap], cfg, unit_space, t, 20.0) for t in (1, 2, 5, 10, 50, 100)]
    assert all(a < b for a, b in zip(ws, ws[1:]))
    assert all(0.0 < w <= 1.0 for w in ws)


def test_dyna_weight_zero_age_rejected(unit_space):
    ap = ActivePrior(_prior(unit_space, 0.5, 0.1), 10, id="p")
    cfg = config_from_values({"x": 0.5}, unit_space)
    with pytest.raises(ValueError):
        dyna_weight([ap], cfg, unit_space, 10, 20.0)


def _fitted_ctx(space, priors=(), iteration=10, beta=20.0):
    rng = np.random.default_rng(0)
    x = rng.random((12, 1))
    y = np.sin(3 * x[:, 0])
    model = GpSurrogate(space, x, y, np.random.default_rng(1))
    return AcquisitionContext(
        model=model,
        incumbent_loss=float(y.min()),
        iteration=iteration,
        beta=beta,
        active_priors=list(priors),
    )


def test_alpha_dyna_no_priors_bit_exact(unit_space, rng):
    ctx = _fitted_ctx(unit_space)
    q = rng.random((50, 1))
    base = ei_values(*ctx.model.predict_encoded(q), ctx.incumbent_loss)
    assert np.array_equal(alpha_dyna_encoded(ctx, q, unit_space), base)


def test_alpha_dyna_neutral_prior_equals_base(unit_space, rng):
    neutral = _prior(unit_space, 0.5, 1e12)  # flat to machine precision
    ctx = _fitted_ctx(unit_space, [ActivePrior(neutral, 0, id="n")])
    q = rng.random((100, 1))
    base = ei_values(*ctx.model.predict_encoded(q), ctx.incumbent_loss)
    scored = alpha_dyna_encoded(ctx, q, unit_space)
    assert np.allclose(scored, base, rtol=1e-9)
    assert int(np.argmax(scored)) == int(np.argmax(base))


def test_alpha_dyna_beta_zero_equals_base(unit_space, rng):
    sharp = _prior(unit_space, 0.1, 0.01)
    ctx = _fitted_ctx(unit_space, [ActivePrior(sharp, 0, id="s")], beta=0.0)
    q = rng.random((50, 1))
    base = ei_values(*ctx.model.predict_encoded(q), ctx.incumbent_loss)
    assert np.allclose(alpha_dyna_encoded(ctx, q, unit_space), base, rtol=1e-12)


def test_alpha_dyna_order_invariance(unit_space, rng):
    p1 = ActivePrior(_prior(unit_space, 0.3, 0.1), 1, id="a")
    p2 = ActivePrior(_prior(unit_space, 0.8, 0.05), 4, id="b")
    ctx_ab = _fitted_ctx(unit_space, [p1, p2])
    ctx_ba = _fitted_ctx(unit_space, [p2, p1])
    q = rng.random((50, 1))
    assert np.allclose(
        alpha_dyna_encoded(ctx_ab, q, unit_space), alpha_dyna_encoded(ctx_ba, q, unit_space), rtol=1e-14
    )


def test_uniform_decay_bound(unit_space, rng):
    # sup over random configs of the relative gap at age 100, beta 20 stays
    # under 1 - floor^(beta/age^2)
    sharp = _prior(unit_space, 0.5, 1e-4)
    ctx = _fitted_ctx(unit_space, [ActivePrior(sharp, 0, id="s")], iteration=100, beta=20.0)
    q = rng.random((1000, 1))
    base = ei_values(*ctx.model.predict_encoded(q), ctx.incumbent_loss)
    scored = alpha_dyna_encoded(ctx, q, unit_space)
    mask = base > 0
    gap = np.abs(scored[mask] / base[mask] - 1.0)
    bound = 1.0 - (1e-12) ** (20.0 / 100.0**2)
    assert gap.max() <= bound + 1e-12
    assert bound == pytest.approx(0.0538, abs=2e-4)


def test_per_prior_decay_power_override(unit_space):
    p = _prior(unit_space, 0.2, 0.05)
    cfg = config_from_values({"x": 0.9}, unit_space)
    from dynabo.priors import density

    pi = density(p, cfg, unit_space)
    w_static = dyna_weight([ActivePrior(p, 0, id="s", decay_power=1)], cfg, unit_space, 10, 20.0)
    assert w_static == pytest.approx(pi ** (20.0 / 10.0), rel=1e-12)
