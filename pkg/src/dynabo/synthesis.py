"""Scripted prior policies over a clustered corpus of past evaluations.

Exploratory optimization runs (greedy EI plus explorative LCB) produce a
corpus of configuration-loss pairs; the corpus is clustered hierarchically
with Ward updates on the pairwise Gower matrix, clusters are ordered by
median loss, and four policies then draw prior centers that simulate user
informativeness levels from near-optimal to deliberately harmful.
"""

from __future__ import annotations

import json
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from dynabo.engine import RunConfig, RunState, run
from dynabo.priors import Prior, build_synthetic_prior
from dynabo.space import INACTIVE, ConfigSpace, Configuration, gower_matrix
from dynabo.storage import data_dir

POLICIES = ("expert", "advanced", "local", "adversarial")
DEFAULT_CLUSTER_COUNT = 100
DEFAULT_CORPUS_SEEDS = 10
DEFAULT_CORPUS_ITERS = 500

# lean settings for the exploratory data-generation runs; corpus quality is
# driven far more by run count and budget than by surrogate fidelity
EXPLORATION_RUN_PARAMS = dict(
    pool_size=600,
    local_starts=4,
    surrogate_params={"trees_count": 16},
)


@dataclass(frozen=True)
class CorpusEntry:
    config: Configuration
    loss: float
    was_incumbent: bool


@dataclass(frozen=True)
class Cluster:
    members: tuple[CorpusEntry, ...]
    centroid: Configuration
    centroid_encoded: np.ndarray
    median_loss: float


@dataclass(frozen=True)
class ClusterCorpus:
    clusters: tuple[Cluster, ...]  # ascending median loss
    best_known_loss: float
    metadata: dict

    @property
    def entries(self) -> list[CorpusEntry]:
        return [e for c in self.clusters for e in c.members]


# ---------------------------------------------------------------------------
# Corpus generation
# ---------------------------------------------------------------------------


def _exploration_run(objective, space: ConfigSpace, acquisition: str, budget: int, seed: int) -> RunState:
    cfg = RunConfig(
        space=space,
        budget=budget,
        surrogate="rf",
        acquisition=acquisition,
        seed=seed,
        prior_mode="none",
        **EXPLORATION_RUN_PARAMS,
    )
    return run(cfg, objective)


def _split_trials(state: RunState) -> tuple[list[CorpusEntry], list[CorpusEntry]]:
    incumbents, others = [], []
    best = math.inf
    for t in state.trials:
        if t.loss < best:
            best = t.loss
            incumbents.append(CorpusEntry(config=t.config, loss=t.loss, was_incumbent=True))
        else:
            others.append(CorpusEntry(config=t.config, loss=t.loss, was_incumbent=False))
    return incumbents, others


def _builtin_exploration_worker(args: tuple[str, str, int, int]) -> list[tuple[dict, float, bool]]:
    objective_id, acquisition, budget, seed = args
    from dynabo.objectives import get_objective

    obj = get_objective(objective_id)
    state = _exploration_run(obj, obj.space, acquisition, budget, seed)
    incs, others = _split_trials(state)
    out = [(e.config.values, e.loss, True) for e in incs]
    out += [(e.config.values, e.loss, False) for e in others]
    return out


def generate_corpus(
    objective: Callable[[Configuration], float],
    space: ConfigSpace,
    seeds: int = DEFAULT_CORPUS_SEEDS,
    iters: int = DEFAULT_CORPUS_ITERS,
    rng: np.random.Generator | None = None,
    objective_id: str | None = None,
    workers: int = 1,
) -> list[CorpusEntry]:
    """Exploratory runs (EI and LCB, ``seeds`` each) distilled to a sorted corpus.

    Preliminary incumbents from every run are concatenated and supplemented
    with an equal number of non-incumbent evaluations, then the joint list is
    sorted by loss ascending. ``workers > 1`` parallelizes runs across
    processes; that path needs a built-in objective id.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    base_seed = int(rng.integers(2**31 - 1))
    jobs = [
        (acq, base_seed + 1000 * a + s)
        for a, acq in enumerate(("ei", "lcb"))
        for s in range(seeds)
    ]
    incumbents: list[CorpusEntry] = []
    others: list[CorpusEntry] = []
    if workers > 1 and objective_id:
        from dynabo.priors import config_from_values

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(
                _builtin_exploration_worker,
                [(objective_id, acq, iters, seed) for acq, seed in jobs],
            )
            for rows in results:
                for values, loss, was_inc in rows:
                    entry = CorpusEntry(config_from_values(values, space), loss, was_inc)
                    (incumbents if was_inc else others).append(entry)
    else:
        for acq, seed in jobs:
            state = _exploration_run(objective, space, acq, iters, seed)
            inc, oth = _split_trials(state)
            incumbents.extend(inc)
            others.extend(oth)

    n = len(incumbents)
    if others:
        take = min(n, len(others))
        picked = rng.choice(len(others), size=take, replace=False)
        supplement = [others[i] for i in sorted(picked)]
    else:
        supplement = []
    corpus = incumbents + supplement
    corpus.sort(key=lambda e: e.loss)
    return corpus


# ---------------------------------------------------------------------------
# Clustering
# ---------------------------------------------------------------------------


def _centroid(space: ConfigSpace, member_rows: np.ndarray) -> tuple[np.ndarray, Configuration]:
    enc = np.empty(space.dim)
    for i, p in enumerate(space.params):
        col = member_rows[:, i]
        if p.kind == "categorical":
            active = col[col != INACTIVE].astype(int)
            if len(active) == 0:
                enc[i] = INACTIVE
            else:
                enc[i] = float(np.bincount(active, minlength=len(p.categories)).argmax())
        else:
            enc[i] = float(col.mean())  # -1 fills included; may land below the bounds
    return enc, _decode_clamped(space, enc)


def _decode_clamped(space: ConfigSpace, enc: np.ndarray) -> Configuration:
    """Best-effort configuration for a centroid vector (bounds clamped)."""
    values: dict = {}
    active: dict = {}
    for i, p in enumerate(space.params):
        if p.condition is not None:
            parent_name, required = p.condition
            if values.get(parent_name) != required:
                active[p.name] = False
                continue
        active[p.name] = True
        x = enc[i]
        if p.kind == "categorical":
            idx = 0 if x == INACTIVE else int(x)
            values[p.name] = p.categories[idx]
        else:
            v = min(max(x, p.lower), p.upper)
            values[p.name] = int(round(v)) if p.kind == "int" else float(v)
    return Configuration(values=values, active=active)


def cluster_corpus(
    entries: Sequence[CorpusEntry],
    space: ConfigSpace,
    k: int = DEFAULT_CLUSTER_COUNT,
    metadata: dict | None = None,
) -> ClusterCorpus:
    """Agglomerate entries into ``k`` clusters with Ward updates on Gower distances.

    The Lance-Williams Ward recurrence is applied to squared Gower distances;
    cluster centroids are dimension-wise means (numeric) and modes
    (categorical, ties resolved by declaration order). Clusters come back
    ordered by ascending median loss.
    """
    if not entries:
        raise ValueError("empty corpus")
    if len(entries) < k:
        warnings.warn(f"only {len(entries)} entries; lowering cluster count from {k}")
        k = len(entries)
    rows = space.encode_many([e.config for e in entries])
    if len(entries) == 1:
        labels = np.array([1])
    else:
        condensed = squareform(gower_matrix(rows, space), checks=False)
        z = linkage(condensed, method="ward")
        labels = fcluster(z, t=k, criterion="maxclust")

    clusters: list[Cluster] = []
    for label in np.unique(labels):
        idx = np.where(labels == label)[0]
        members = tuple(entries[i] for i in idx)
        enc, centroid = _centroid(space, rows[idx])
        clusters.append(
            Cluster(
                members=members,
                centroid=centroid,
                centroid_encoded=enc,
                median_loss=float(np.median([m.loss for m in members])),
            )
        )
    clusters.sort(key=lambda c: c.median_loss)
    return ClusterCorpus(
        clusters=tuple(clusters),
        best_known_loss=min(e.loss for e in entries),
        metadata=metadata or {},
    )


# ---------------------------------------------------------------------------
# Prior policies
# ---------------------------------------------------------------------------


def draw_prior(
    corpus: ClusterCorpus,
    policy: str,
    incumbent: tuple[Configuration, float],
    prior_index: int,
    rng: np.random.Generator,
    space: ConfigSpace,
) -> Prior:
    """Draw one prior center per the named policy, then widen it by index.

    expert/advanced restrict to clusters at least as good as the incumbent
    (falling back to the single best cluster when none qualifies), local
    stays near the incumbent, adversarial deliberately targets the worst
    regions. Centers are always actual corpus members.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    clusters = corpus.clusters
    inc_config, inc_loss = incumbent

    if policy in ("expert", "advanced"):
        eligible = [c for c in clusters if c.median_loss <= inc_loss]
        if not eligible:
            eligible = [clusters[0]]
        rate = 0.1 if policy == "expert" else 0.15
        w = np.exp(rate * np.arange(len(eligible)))
        cluster = eligible[int(rng.choice(len(eligible), p=w / w.sum()))]
        if policy == "expert":
            center = min(cluster.members, key=lambda m: m.loss)
        else:
            center = cluster.members[int(rng.integers(len(cluster.members)))]
    elif policy == "local":
        inc_row = space.encode(inc_config)[None, :]
        cents = np.vstack([c.centroid_encoded for c in clusters])
        dists = gower_matrix(cents, space, inc_row)[:, 0]
        nearest = np.argsort(dists, kind="stable")[: min(10, len(clusters))]
        cluster = clusters[int(min(nearest))]  # lowest median = smallest index
        center = cluster.members[int(rng.integers(len(cluster.members)))]
    else:  # adversarial
        worst = clusters[-min(5, len(clusters)) :]
        cluster = worst[int(rng.integers(len(worst)))]
        center = max(cluster.members, key=lambda m: m.loss)

    return build_synthetic_prior(center.config, space, prior_index, label=policy)


class ScheduledPolicySource:
    """Prior source for scripted runs: draw per policy at fixed iterations.

    ``first_prior`` lets matched-seed protocols share the initial prior
    across methods; later draws use the run's own incumbent at draw time.
    """

    def __init__(
        self,
        corpus: ClusterCorpus,
        policy: str,
        schedule: Sequence[int],
        space: ConfigSpace,
        rng: np.random.Generator,
        first_prior: Prior | None = None,
        id_prefix: str = "policy",
    ):
        self.corpus = corpus
        self.policy = policy
        self.schedule = sorted(schedule)
        self.space = space
        self.rng = rng
        self.first_prior = first_prior
        self.id_prefix = id_prefix
        self._next = 0
        self._k = 0

    def poll(self, snapshot) -> list:
        from dynabo.engine import PriorSubmission

        subs = []
        while self._next < len(self.schedule) and snapshot.iteration >= self.schedule[self._next]:
            self._k += 1
            if self._k == 1 and self.first_prior is not None:
                prior = self.first_prior
            else:
                prior = draw_prior(
                    self.corpus, self.policy, snapshot.incumbent, self._k, self.rng, self.space
                )
            subs.append(PriorSubmission(prior=prior, id=f"{self.id_prefix}-{self._k}"))
            self._next += 1
        return subs


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def corpus_to_json(corpus: ClusterCorpus) -> dict:
    entries = corpus.entries
    offsets = []
    i = 0
    for c in corpus.clusters:
        offsets.append(list(range(i, i + len(c.members))))
        i += len(c.members)
    return {
        "metadata": corpus.metadata,
        "best_known_loss": corpus.best_known_loss,
        "entries": [
            {
                "values": dict(e.config.values),
                "active": dict(e.config.active),
                "loss": e.loss,
                "was_incumbent": e.was_incumbent,
            }
            for e in entries
        ],
        "clusters": [
            {
                "member_indices": offsets[j],
                "centroid": {"values": dict(c.centroid.values), "active": dict(c.centroid.active)},
                "centroid_encoded": [float(v) for v in c.centroid_encoded],
                "median_loss": c.median_loss,
            }
            for j, c in enumerate(corpus.clusters)
        ],
    }


def corpus_from_json(doc: dict, space: ConfigSpace) -> ClusterCorpus:
    entries = [
        CorpusEntry(
            config=Configuration(values=dict(e["values"]), active=dict(e["active"])),
            loss=float(e["loss"]),
            was_incumbent=bool(e["was_incumbent"]),
        )
        for e in doc["entries"]
    ]
    clusters = []
    for c in doc["clusters"]:
        members = tuple(entries[i] for i in c["member_indices"])
        clusters.append(
            Cluster(
                members=members,
                centroid=Configuration(
                    values=dict(c["centroid"]["values"]), active=dict(c["centroid"]["active"])
                ),
                centroid_encoded=np.array(c["centroid_encoded"]),
                median_loss=float(c["median_loss"]),
            )
        )
    return ClusterCorpus(
        clusters=tuple(clusters),
        best_known_loss=float(doc["best_known_loss"]),
        metadata=dict(doc.get("metadata", {})),
    )


def corpus_cache_path(objective_id: str, space: ConfigSpace, seeds: int, iters: int) -> Path:
    key = f"{objective_id.replace(':', '_')}-{space.content_hash()}-s{seeds}-i{iters}"
    return data_dir() / "corpora" / f"{key}.json"


def load_or_build_corpus(
    objective,
    seeds: int = DEFAULT_CORPUS_SEEDS,
    iters: int = DEFAULT_CORPUS_ITERS,
    k: int = DEFAULT_CLUSTER_COUNT,
    seed: int = 0,
    workers: int = 1,
) -> ClusterCorpus:
    """Clustered corpus for a built-in objective, cached on disk by its key."""
    path = corpus_cache_path(objective.id, objective.space, seeds, iters)
    if path.exists():
        with open(path) as fh:
            return corpus_from_json(json.load(fh), objective.space)
    rng = np.random.default_rng(seed)
    entries = generate_corpus(
        objective.eval,
        objective.space,
        seeds=seeds,
        iters=iters,
        rng=rng,
        objective_id=objective.id,
        workers=workers,
    )
    corpus = cluster_corpus(
        entries,
        objective.space,
        k=k,
        metadata={
            "objective": objective.id,
            "space_hash": objective.space.content_hash(),
            "seeds": seeds,
            "iters": iters,
            "seed": seed,
            "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
        },
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w") as fh:
        json.dump(corpus_to_json(corpus), fh)
    tmp.replace(path)
    return corpus
