import math

import numpy as np
import pytest

from dynabo.acquisition import AcquisitionContext
from dynabo.gate import assess_prior, override
from dynabo.priors import Prior, build_synthetic_prior, config_from_values
from dynabo.surrogates import GpSurrogate


@pytest.fixture()
def fitted(unit_space):
    rng = np.random.default_rng(0)
    x = rng.random((15, 1))
    y = (x[:, 0] - 0.4) ** 2
    model = GpSurrogate(unit_space, x, y, np.random.default_rng(1))
    best = int(np.argmin(y))
    incumbent = unit_space.decode(x[best])
    ctx = AcquisitionContext(model=model, incumbent_loss=float(y[best]), iteration=15, beta=2.0)
    return ctx, incumbent


def _prior_at(space, mu, sigma=0.1):
    return Prior(center=config_from_values({"x": mu}, space), numeric_stds={"x": sigma})


def test_gate_extreme_thresholds(unit_space, fitted):
    ctx, incumbent = fitted
    rng = np.random.default_rng(5)
    for mu in rng.random(10):
        prior = _prior_at(unit_space, float(mu))
        accept_all = assess_prior(prior, ctx, unit_space, incumbent, np.random.default_rng(2), tau=-math.inf)
        reject_all = assess_prior(prior, ctx, unit_space, incumbent, np.random.default_rng(2), tau=math.inf)
        assert accept_all.accepted
        assert not reject_all.accepted


def test_gate_symmetric_regions_margin_zero(unit_space, fitted):
    ctx, incumbent = fitted
    prior = _prior_at(unit_space, incumbent["x"], sigma=0.07)
    v0 = assess_prior(prior, ctx, unit_space, incumbent, np.random.default_rng(3), tau=0.0)
    assert v0.margin == 0.0
    assert v0.accepted  # margin >= tau at tau = 0
    v_pos = assess_prior(prior, ctx, unit_space, incumbent, np.random.default_rng(3), tau=0.05)
    assert not v_pos.accepted


def test_gate_monotone_in_tau(unit_space, fitted):
    ctx, incumbent = fitted
    grid = (-0.5, -0.25, -0.15, -0.05, 0.0, 0.05)
    rng_master = np.random.default_rng(7)
    priors = [_prior_at(unit_space, float(mu), 0.05 + 0.2 * float(s)) for mu, s in rng_master.random((25, 2))]
    accepted_sets = []
    for tau in grid:
        accepted = {
            i
            for i, p in enumerate(priors)
            if assess_prior(p, ctx, unit_space, incumbent, np.random.default_rng(1000 + i), tau=tau).accepted
        }
        accepted_sets.append(accepted)
    for low, high in zip(accepted_sets, accepted_sets[1:]):
        assert high <= low  # higher tau accepts a subset


def test_gate_deterministic(unit_space, fitted):
    ctx, incumbent = fitted
    prior = _prior_at(unit_space, 0.9)
    a = assess_prior(prior, ctx, unit_space, incumbent, np.random.default_rng(11))
    b = assess_prior(prior, ctx, unit_space, incumbent, np.random.default_rng(11))
    assert a == b


def test_gate_does_not_mutate_surrogate(unit_space, fitted, rng):
    ctx, incumbent = fitted
    q = rng.random((30, 1))
    before = ctx.model.predict_encoded(q)
    assess_prior(_prior_at(unit_space, 0.2), ctx, unit_space, incumbent, np.random.default_rng(4))
    after = ctx.model.predict_encoded(q)
    assert np.array_equal(before[0], after[0])
    assert np.array_equal(before[1], after[1])


def test_gate_requires_incumbent(unit_space, fitted):
    ctx, incumbent = fitted
    bad = AcquisitionContext(model=ctx.model, incumbent_loss=math.inf, iteration=3, beta=1.0)
    with pytest.raises(ValueError, match="observation"):
        assess_prior(_prior_at(unit_space, 0.5), bad, unit_space, incumbent, np.random.default_rng(0))


def test_gate_verdict_fields(unit_space, fitted):
    ctx, incumbent = fitted
    v = assess_prior(_prior_at(unit_space, 0.5), ctx, unit_space, incumbent, np.random.default_rng(0), tau=-0.15)
    assert v.sample_count == 500
    assert v.margin == pytest.approx(v.prior_mean_lcb - v.incumbent_mean_lcb)
    assert v.accepted == (v.margin >= -0.15)
    doc = v.to_json()
    assert set(doc) == {
        "accepted", "prior_mean_lcb", "incumbent_mean_lcb", "margin", "tau", "sample_count", "overridden",
    }


def test_override_flips_only_the_decision(unit_space, fitted):
    ctx, incumbent = fitted
    rejected = assess_prior(_prior_at(unit_space, 0.95), ctx, unit_space, incumbent,
                            np.random.default_rng(1), tau=math.inf)
    assert not rejected.accepted
    flipped = override(rejected)
    assert flipped.accepted and flipped.overridden
    assert flipped.margin == rejected.margin
    assert flipped.tau == rejected.tau
    assert flipped.prior_mean_lcb == rejected.prior_mean_lcb


def test_override_accepted_is_noop(unit_space, fitted):
    ctx, incumbent = fitted
    accepted = assess_prior(_prior_at(unit_space, 0.5), ctx, unit_space, incumbent,
                            np.random.default_rng(1), tau=-math.inf)
    assert override(accepted) == accepted


def test_gate_mixed_space_samples_valid(mixed_space):
    rng = np.random.default_rng(0)
    x = mixed_space.sample_uniform_encoded(rng, 25)
    y = rng.random(25)
    model = GpSurrogate(mixed_space, x, y, np.random.default_rng(1))
    incumbent = mixed_space.decode(x[int(np.argmin(y))])
    ctx = AcquisitionContext(model=model, incumbent_loss=float(y.min()), iteration=25, beta=2.0)
    center = config_from_values({"x": 5.0, "n": 4, "lr": 0.01, "kind": "a", "child": 0.5}, mixed_space)
    prior = build_synthetic_prior(center, mixed_space, 2)
    v = assess_prior(prior, ctx, mixed_space, incumbent, np.random.default_rng(2))
    assert math.isfinite(v.margin)
