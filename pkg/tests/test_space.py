import numpy as np
import pytest

from dynabo.space import ConfigSpace, Configuration, HyperparameterDef, gower_distance, gower_matrix


def test_bad_definitions_rejected():
    with pytest.raises(ValueError):
        HyperparameterDef(name="x", kind="float", lower=1.0, upper=0.0)
    with pytest.raises(ValueError):
        HyperparameterDef(name="x", kind="float", lower=0.0, upper=1.0, log_scale=True)
    with pytest.raises(ValueError):
        HyperparameterDef(name="c", kind="categorical", categories=("a", "a"))
    with pytest.raises(ValueError):
        HyperparameterDef(name="c", kind="categorical", categories=())
    with pytest.raises(ValueError):
        HyperparameterDef(name="x", kind="mystery")


def test_condition_validation():
    parent = HyperparameterDef(name="p", kind="categorical", categories=("a", "b"))
    child = HyperparameterDef(name="c", kind="float", lower=0.0, upper=1.0, condition=("p", "a"))
    ConfigSpace([parent, child])
    with pytest.raises(ValueError):
        ConfigSpace([child])  # unknown parent
    num = HyperparameterDef(name="n", kind="float", lower=0.0, upper=1.0)
    bad = HyperparameterDef(name="c", kind="float", lower=0.0, upper=1.0, condition=("n", 0.5))
    with pytest.raises(ValueError):
        ConfigSpace([num, bad])  # numeric parent
    bad_value = HyperparameterDef(name="c", kind="float", lower=0.0, upper=1.0, condition=("p", "z"))
    with pytest.raises(ValueError):
        ConfigSpace([parent, bad_value])


def test_sample_uniform_bounds_and_reproducibility(unit_space):
    a = unit_space.sample_uniform(np.random.default_rng(7), 3)
    b = unit_space.sample_uniform(np.random.default_rng(7), 3)
    for ca, cb in zip(a, b):
        assert 0.0 <= ca["x"] <= 1.0
        assert ca["x"] == cb["x"]


def test_conditional_child_inactive_when_parent_differs(mixed_space, rng):
    samples = mixed_space.sample_uniform(rng, 200)
    for c in samples:
        if c["kind"] != "a":
            assert not c.is_active("child")
            assert mixed_space.encode(c)[mixed_space.index("child")] == -1.0
        else:
            assert 0.0 <= c["child"] <= 1.0


def test_log_uniform_median_split():
    # log-uniform on [1e-4, 1]: P(x < 1e-2) = ln(1e-2/1e-4) / ln(1/1e-4) = 0.5
    space = ConfigSpace([HyperparameterDef(name="x", kind="float", lower=1e-4, upper=1.0, log_scale=True)])
    samples = space.sample_uniform(np.random.default_rng(5), 10_000)
    frac = np.mean([c["x"] < 1e-2 for c in samples])
    assert abs(frac - 0.5) < 0.02


def test_int_sampling_integral(mixed_space, rng):
    for c in mixed_space.sample_uniform(rng, 100):
        assert c["n"] == int(c["n"])
        assert 1 <= c["n"] <= 8


def test_gower_identity_and_hand_value():
    space = ConfigSpace(
        [
            HyperparameterDef(name="x", kind="float", lower=0.0, upper=10.0),
            HyperparameterDef(name="c", kind="categorical", categories=("u", "v")),
        ]
    )
    a = Configuration(values={"x": 2.0, "c": "u"}, active={"x": True, "c": True})
    b = Configuration(values={"x": 7.0, "c": "u"}, active={"x": True, "c": True})
    far = Configuration(values={"x": 10.0, "c": "v"}, active={"x": True, "c": True})
    lo = Configuration(values={"x": 0.0, "c": "u"}, active={"x": True, "c": True})
    assert gower_distance(a, a, space) == 0.0
    assert gower_distance(a, b, space) == pytest.approx(0.25)  # (0.5 + 0) / 2
    assert gower_distance(lo, far, space) == pytest.approx(1.0)  # (1 + 1) / 2


def test_gower_properties_random_spaces(mixed_space, rng):
    rows = mixed_space.sample_uniform_encoded(rng, 40)
    d = gower_matrix(rows, mixed_space)
    assert np.allclose(d, d.T)
    assert np.allclose(np.diag(d), 0.0)
    assert d.min() >= 0.0 and d.max() <= 1.0 + 1e-12


def test_gower_sentinel_range_extension():
    # conditional numeric: normalization range is [min(lower, -1), upper]
    space = ConfigSpace(
        [
            HyperparameterDef(name="p", kind="categorical", categories=("a", "b")),
            HyperparameterDef(name="c", kind="float", lower=0.0, upper=3.0, condition=("p", "a")),
        ]
    )
    active = Configuration(values={"p": "a", "c": 3.0}, active={"p": True, "c": True})
    inactive = Configuration(values={"p": "b"}, active={"p": True, "c": False})
    # dims: categorical mismatch (1) + numeric |3 - (-1)| / (3 - (-1)) = 1
    assert gower_distance(active, inactive, space) == pytest.approx(1.0)


def test_encode_decode_roundtrip(mixed_space, rng):
    for c in mixed_space.sample_uniform(rng, 100):
        back = mixed_space.decode(mixed_space.encode(c))
        assert back.values == c.values
        assert back.active == c.active


def test_encode_category_index(mixed_space):
    cfg = Configuration(
        values={"x": 1.0, "n": 2, "lr": 0.1, "kind": "b"},
        active={"x": True, "n": True, "lr": True, "kind": True, "child": False},
    )
    assert mixed_space.encode(cfg)[mixed_space.index("kind")] == 1.0


def test_decode_rejects_out_of_bounds(unit_space):
    with pytest.raises(ValueError):
        unit_space.decode(np.array([1.5]))
    with pytest.raises(ValueError):
        unit_space.decode(np.array([0.1, 0.2]))


def test_decode_rejects_bad_inactive_fill(mixed_space):
    vec = mixed_space.encode_many(mixed_space.sample_uniform(np.random.default_rng(0), 1))[0]
    kind_idx = mixed_space.index("kind")
    child_idx = mixed_space.index("child")
    vec[kind_idx] = 1.0  # parent "b" -> child must be -1
    vec[child_idx] = 0.5
    with pytest.raises(ValueError):
        mixed_space.decode(vec)


def test_json_roundtrip(mixed_space):
    doc = mixed_space.to_json()
    clone = ConfigSpace.from_json(doc)
    assert clone.to_json() == doc
    assert clone.content_hash() == mixed_space.content_hash()


def test_encoding_order_stable(mixed_space):
    assert mixed_space.names() == ["x", "n", "lr", "kind", "child"]
    assert [mixed_space.index(n) for n in mixed_space.names()] == list(range(5))
