import json

import numpy as np
import pytest

from dynabo.objectives import get_objective
from dynabo.priors import config_from_values
from dynabo.synthesis import (
    CorpusEntry,
    cluster_corpus,
    corpus_from_json,
    corpus_to_json,
    draw_prior,
    generate_corpus,
)


def _entry(space, values, loss, inc=False):
    return CorpusEntry(config=config_from_values(values, space), loss=loss, was_incumbent=inc)


@pytest.fixture()
def toy_corpus(unit_space):
    # three tight groups along x with increasing losses
    entries = []
    for i, (base, loss0) in enumerate([(0.1, 0.0), (0.5, 1.0), (0.9, 2.0)]):
        for j in range(4):
            entries.append(_entry(unit_space, {"x": base + 0.004 * j}, loss0 + 0.1 * j, inc=(i == 0)))
    return cluster_corpus(entries, unit_space, k=3)


def test_singleton_clusters(unit_space):
    entries = [_entry(unit_space, {"x": v}, float(i)) for i, v in enumerate((0.1, 0.4, 0.9))]
    corpus = cluster_corpus(entries, unit_space, k=3)
    assert len(corpus.clusters) == 3
    for c in corpus.clusters:
        assert len(c.members) == 1
        assert c.centroid.values == c.members[0].config.values
        assert c.median_loss == c.members[0].loss


def test_cluster_ordering_and_median(toy_corpus):
    meds = [c.median_loss for c in toy_corpus.clusters]
    assert meds == sorted(meds)
    losses = sorted(m.loss for m in toy_corpus.clusters[0].members)
    assert toy_corpus.clusters[0].median_loss == pytest.approx(np.median(losses))


def test_median_definition(unit_space):
    entries = [_entry(unit_space, {"x": 0.5 + 0.001 * i}, loss) for i, loss in enumerate((0.1, 0.2, 0.4))]
    corpus = cluster_corpus(entries, unit_space, k=1)
    assert corpus.clusters[0].median_loss == pytest.approx(0.2)


def test_k_lowered_with_warning(unit_space):
    entries = [_entry(unit_space, {"x": 0.2}, 1.0), _entry(unit_space, {"x": 0.8}, 2.0)]
    with pytest.warns(UserWarning):
        corpus = cluster_corpus(entries, unit_space, k=10)
    assert len(corpus.clusters) == 2


def test_planted_blobs_recovered(mixed_space, rng):
    """Ward over Gower separates well-spaced mixed-type blobs."""
    from sklearn.metrics import adjusted_rand_score

    blobs = {
        0: ({"x": 1.0, "n": 2, "lr": 1e-3, "kind": "a"}, 0.2),
        1: ({"x": 5.0, "n": 4, "lr": 1e-2, "kind": "b"}, 1.0),
        2: ({"x": 9.0, "n": 7, "lr": 1e-1, "kind": "c"}, 2.0),
    }
    entries, labels = [], []
    for label, (proto, loss) in blobs.items():
        for _ in range(30):
            values = dict(proto)
            values["x"] = float(np.clip(proto["x"] + rng.normal(0, 0.25), 0, 10))
            if values["kind"] == "a":
                values["child"] = float(rng.random())
            entries.append(_entry(mixed_space, values, loss + rng.normal(0, 0.01)))
            labels.append(label)
    corpus = cluster_corpus(entries, mixed_space, k=3)
    predicted = {}
    for ci, cluster in enumerate(corpus.clusters):
        for m in cluster.members:
            predicted[id(m)] = ci
    got = [predicted[id(e)] for e in entries]
    assert adjusted_rand_score(labels, got) >= 0.9


def test_centroid_mode_ties_by_declaration_order(mixed_space):
    entries = [
        _entry(mixed_space, {"x": 1.0, "n": 2, "lr": 1e-3, "kind": "b"}, 0.1),
        _entry(mixed_space, {"x": 1.1, "n": 2, "lr": 1e-3, "kind": "c"}, 0.2),
    ]
    corpus = cluster_corpus(entries, mixed_space, k=1)
    assert corpus.clusters[0].centroid.values["kind"] == "b"  # tie -> earlier category


def test_draw_prior_contracts(toy_corpus, unit_space):
    incumbent = (config_from_values({"x": 0.52}, unit_space), 1.05)
    rng = np.random.default_rng(0)
    member_values = {e.config.values["x"] for e in toy_corpus.entries}

    expert = draw_prior(toy_corpus, "expert", incumbent, 1, rng, unit_space)
    assert expert.center.values["x"] in member_values
    # expert center loss <= incumbent loss
    center_loss = next(e.loss for e in toy_corpus.entries if e.config.values == expert.center.values)
    assert center_loss <= incumbent[1]

    adv = draw_prior(toy_corpus, "adversarial", incumbent, 1, np.random.default_rng(1), unit_space)
    adv_cluster = next(
        c for c in toy_corpus.clusters if any(m.config.values == adv.center.values for m in c.members)
    )
    adv_loss = next(e.loss for e in adv_cluster.members if e.config.values == adv.center.values)
    assert adv_loss == max(m.loss for m in adv_cluster.members)

    local = draw_prior(toy_corpus, "local", incumbent, 2, np.random.default_rng(2), unit_space)
    assert local.center.values["x"] in member_values
    assert local.label == "local"

    with pytest.raises(ValueError):
        draw_prior(toy_corpus, "wild-guess", incumbent, 1, rng, unit_space)


def test_draw_prior_expert_fallback_when_nothing_better(toy_corpus, unit_space):
    incumbent = (config_from_values({"x": 0.1}, unit_space), -5.0)  # better than every cluster
    p = draw_prior(toy_corpus, "expert", incumbent, 1, np.random.default_rng(3), unit_space)
    best_cluster = toy_corpus.clusters[0]
    assert any(m.config.values == p.center.values for m in best_cluster.members)


def test_draw_prior_deterministic(toy_corpus, unit_space):
    incumbent = (config_from_values({"x": 0.52}, unit_space), 1.05)
    a = draw_prior(toy_corpus, "advanced", incumbent, 2, np.random.default_rng(7), unit_space)
    b = draw_prior(toy_corpus, "advanced", incumbent, 2, np.random.default_rng(7), unit_space)
    assert a.center.values == b.center.values
    assert a.numeric_stds == b.numeric_stds


def test_prior_index_narrows_stds(toy_corpus, unit_space):
    incumbent = (config_from_values({"x": 0.52}, unit_space), 1.05)
    p1 = draw_prior(toy_corpus, "expert", incumbent, 1, np.random.default_rng(5), unit_space)
    p3 = draw_prior(toy_corpus, "expert", incumbent, 3, np.random.default_rng(5), unit_space)
    assert p3.numeric_stds["x"] == pytest.approx(p1.numeric_stds["x"] / 3)


def test_generate_corpus_smoke(unit_space):
    def bowl(c):
        return (c["x"] - 0.3) ** 2

    entries = generate_corpus(bowl, unit_space, seeds=1, iters=12, rng=np.random.default_rng(0))
    losses = [e.loss for e in entries]
    assert losses == sorted(losses)
    n_inc = sum(e.was_incumbent for e in entries)
    n_other = len(entries) - n_inc
    assert n_inc >= 2  # one run with each acquisition, at least one incumbent each
    assert n_other <= n_inc  # supplements never outnumber incumbents
    assert len(entries) >= 4


def test_corpus_json_roundtrip(toy_corpus, unit_space):
    doc = corpus_to_json(toy_corpus)
    back = corpus_from_json(json.loads(json.dumps(doc)), unit_space)
    assert back.best_known_loss == toy_corpus.best_known_loss
    assert [c.median_loss for c in back.clusters] == [c.median_loss for c in toy_corpus.clusters]
    assert back.clusters[0].members[0].config.values == toy_corpus.clusters[0].members[0].config.values


def test_centers_are_corpus_members(branin_corpus):
    space = get_objective("branin:norm").space
    member_values = [e.config.values for e in branin_corpus.entries]
    mid = branin_corpus.entries[len(branin_corpus.entries) // 2]
    incumbent = (mid.config, mid.loss)
    for policy in ("expert", "advanced", "local", "adversarial"):
        for seed in range(5):
            p = draw_prior(branin_corpus, policy, incumbent, 1, np.random.default_rng(seed), space)
            assert p.center.values in member_values
