import math

import numpy as np
import pytest

from dynabo.surrogates import ForestSurrogate, GpSurrogate, fit_surrogate


def _naive_matern52(za, zb, ls, amp2):
    """Test-local kernel: plain loops, no shared code with the implementation."""
    k = np.zeros((len(za), len(zb)))
    for i in range(len(za)):
        for j in range(len(zb)):
            r2 = np.sum(((za[i] - zb[j]) / ls) ** 2)
            r = math.sqrt(r2)
            k[i, j] = amp2 * (1 + math.sqrt(5) * r + 5 * r2 / 3) * math.exp(-math.sqrt(5) * r)
    return k


def test_gp_interpolates_training_points(unit_space):
    x = np.array([[0.0], [1.0]])
    y = np.array([0.0, 1.0])
    gp = GpSurrogate(unit_space, x, y, np.random.default_rng(0))
    m, _ = gp.predict_encoded(np.array([[0.0]]))
    assert abs(m[0] - 0.0) < 3 * math.sqrt(gp.noise_variance) + 1e-3


def test_gp_sin_fit_rmse(unit_space):
    rng = np.random.default_rng(2)
    x = rng.random((20, 1))
    y = np.sin(2 * math.pi * x[:, 0])
    gp = GpSurrogate(unit_space, x, y, np.random.default_rng(3))
    grid = np.linspace(0, 1, 50)[:, None]
    mean, _ = gp.predict_encoded(grid)
    rmse = math.sqrt(np.mean((mean - np.sin(2 * math.pi * grid[:, 0])) ** 2))
    assert rmse < 0.1
    # independent dense-grid oracle with naive solves stays under the same bound
    ls, amp2, noise = np.array([0.15]), 1.0, 1e-6
    k = _naive_matern52(x, x, ls, amp2) + noise * np.eye(20)
    alpha = np.linalg.solve(k, y)
    oracle_mean = _naive_matern52(grid, x, ls, amp2) @ alpha
    oracle_rmse = math.sqrt(np.mean((oracle_mean - np.sin(2 * math.pi * grid[:, 0])) ** 2))
    assert oracle_rmse < 0.1


def test_gp_posterior_matches_hand_solved_system(unit_space):
    """Fixed hyperparameters; the posterior mean must equal a direct solve."""
    x = np.array([[0.1], [0.5], [0.9]])
    y = np.array([2.0, -1.0, 0.5])
    noise = 1e-4
    ls = np.array([0.3])
    gp = GpSurrogate(
        unit_space, x, y, np.random.default_rng(0),
        optimize=False, length_scales=ls, amplitude=1.0, noise=noise,
    )
    q = np.array([[0.2], [0.42], [0.77]])
    mean, _ = gp.predict_encoded(q)

    # oracle: standardize the targets the same way, solve the 3x3 system directly
    ym, ys = y.mean(), y.std()
    yn = (y - ym) / ys
    k = _naive_matern52(x, x, ls, 1.0) + noise * np.eye(3)
    alpha = np.linalg.solve(k, yn)
    oracle = (_naive_matern52(q, x, ls, 1.0) @ alpha) * ys + ym
    assert np.max(np.abs(mean - oracle)) < 1e-8


def test_gp_far_query_reverts_to_prior(unit_space):
    rng = np.random.default_rng(4)
    x = rng.random((10, 1)) * 0.05  # cluster everything near 0
    y = np.sin(10 * x[:, 0])
    gp = GpSurrogate(unit_space, x, y, np.random.default_rng(5))
    far = np.array([[0.05 + 100 * float(gp.length_scales[0])]])
    _, v = gp.predict_encoded(far)
    assert abs(v[0] - gp.prior_variance) <= 0.01 * gp.prior_variance


def test_gp_variance_never_exceeds_prior(unit_space, rng):
    x = rng.random((15, 1))
    y = np.cos(3 * x[:, 0])
    gp = GpSurrogate(unit_space, x, y, np.random.default_rng(6))
    _, v = gp.predict_encoded(rng.random((200, 1)))
    assert np.all(v <= gp.prior_variance + gp.noise_variance + 1e-12)


def test_gp_jitter_handles_duplicate_inputs(unit_space):
    x = np.array([[0.5], [0.5], [0.5], [0.6]])
    y = np.array([1.0, 1.0, 1.0, 2.0])
    gp = GpSurrogate(
        unit_space, x, y, np.random.default_rng(0),
        optimize=False, length_scales=np.array([0.3]), amplitude=1.0, noise=1e-12,
    )
    m, v = gp.predict_encoded(np.array([[0.55]]))
    assert np.isfinite(m[0]) and np.isfinite(v[0])


def test_gp_degenerate_data_falls_back(unit_space):
    x = np.array([[0.5], [0.5], [0.5]])
    y = np.array([1.0, 2.0, 3.0])
    gp = GpSurrogate(unit_space, x, y, np.random.default_rng(0))
    assert gp.warnings
    m, v = gp.predict_encoded(np.array([[0.1]]))
    assert m[0] == pytest.approx(2.0)
    assert v[0] > 0


def test_forest_single_tree_memorizes(unit_space):
    rng = np.random.default_rng(7)
    x = rng.random((12, 1))
    y = rng.random(12)
    rf = ForestSurrogate(
        unit_space, x, y, np.random.default_rng(8),
        trees_count=1, bootstrap=False, min_samples_split=2,
    )
    m, _ = rf.predict_encoded(x)
    assert np.allclose(m, y)


def test_forest_agreeing_trees_zero_variance(unit_space):
    rng = np.random.default_rng(9)
    x = rng.random((10, 1))
    y = rng.random(10)
    rf = ForestSurrogate(
        unit_space, x, y, np.random.default_rng(10),
        trees_count=4, bootstrap=False, min_samples_split=2,
    )
    # d=1 and no bootstrap: every tree is identical and every leaf is pure
    m, v = rf.predict_encoded(x)
    assert np.allclose(m, y)
    assert np.allclose(v, 0.0)


def test_forest_variance_decomposition_nonnegative(mixed_space, rng):
    rows = mixed_space.sample_uniform_encoded(rng, 60)
    y = rng.random(60)
    rf = ForestSurrogate(mixed_space, rows, y, np.random.default_rng(11))
    _, v = rf.predict_encoded(mixed_space.sample_uniform_encoded(rng, 100))
    assert np.all(v >= 0.0)


def test_predict_deterministic(mixed_space, rng):
    rows = mixed_space.sample_uniform_encoded(rng, 40)
    y = rng.random(40)
    q = mixed_space.sample_uniform_encoded(rng, 25)
    rf1 = ForestSurrogate(mixed_space, rows, y, np.random.default_rng(12))
    rf2 = ForestSurrogate(mixed_space, rows, y, np.random.default_rng(12))
    assert np.array_equal(rf1.predict_encoded(q)[0], rf2.predict_encoded(q)[0])
    gp1 = GpSurrogate(mixed_space, rows[:15], y[:15], np.random.default_rng(13))
    gp2 = GpSurrogate(mixed_space, rows[:15], y[:15], np.random.default_rng(13))
    assert np.array_equal(gp1.predict_encoded(q)[0], gp2.predict_encoded(q)[0])


def test_fit_surrogate_contract(unit_space):
    with pytest.raises(ValueError):
        fit_surrogate("rf", None, unit_space, np.random.default_rng(0), x=np.array([[0.1]]), y=np.array([1.0]))
    with pytest.raises(ValueError):
        fit_surrogate(
            "rf", None, unit_space, np.random.default_rng(0),
            x=np.array([[0.1], [0.2]]), y=np.array([1.0, math.inf]),
        )
    with pytest.raises(ValueError):
        fit_surrogate(
            "mystery", None, unit_space, np.random.default_rng(0),
            x=np.array([[0.1], [0.2]]), y=np.array([1.0, 2.0]),
        )


def test_forest_params_validated(unit_space):
    x = np.array([[0.1], [0.2]])
    y = np.array([1.0, 2.0])
    with pytest.raises(ValueError):
        ForestSurrogate(unit_space, x, y, np.random.default_rng(0), trees_count=0)
    with pytest.raises(ValueError):
        ForestSurrogate(unit_space, x, y, np.random.default_rng(0), bootstrap_fraction=1.5)
