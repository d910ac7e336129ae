"""Acquisition maximization: prior-aware random pool plus local hill-climbing.

Candidate pools mix prior-guided and uniform samples. Each active prior gets
a share of the pool that decays exponentially with its age; the combined
prior share is capped at 0.9 so uniform exploration never starves. The best
pool points seed greedy one-exchange local searches with a halving numeric
step schedule. Everything is deterministic given the caller's RNG stream:
ties are broken by generation order, never by evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dynabo.acquisition import AcquisitionContext, alpha_dyna_encoded, ActivePrior
from dynabo.priors import sample_encoded
from dynabo.space import INACTIVE, ConfigSpace, Configuration

DEFAULT_POOL_SIZE = 5000
DEFAULT_LOCAL_STARTS = 10
DEFAULT_ALLOCATION_DECAY = 0.126
PRIOR_FRACTION_CAP = 0.9
STEP_SCALE = 0.2
STEP_LEVELS = 8


@dataclass(frozen=True)
class CandidatePlan:
    """How one candidate pool is split between priors and uniform sampling.

    ``neighbor_steps`` caps the accepted moves per local-search walk; None
    lets each walk run until no neighborhood improves at any step size.
    """

    pool_size: int
    per_prior_counts: dict[str, int]
    uniform_count: int
    local_starts: int = DEFAULT_LOCAL_STARTS
    neighbor_steps: int | None = None

    def __post_init__(self) -> None:
        total = sum(self.per_prior_counts.values())
        if total + self.uniform_count != self.pool_size:
            raise ValueError("per-prior counts plus uniform count must equal the pool size")
        if total > int(PRIOR_FRACTION_CAP * self.pool_size):
            raise ValueError("prior share exceeds the 0.9 cap")


def allocate_candidates(
    active_priors: list[ActivePrior],
    iteration: int,
    pool_size: int = DEFAULT_POOL_SIZE,
    local_starts: int = DEFAULT_LOCAL_STARTS,
    decay: float = DEFAULT_ALLOCATION_DECAY,
    neighbor_steps: int | None = None,
) -> CandidatePlan:
    """Split the pool by per-prior age weights ``exp(-decay * age)``.

    If the weights sum to at most 0.9 they are used as pool fractions
    directly; otherwise they are rescaled to a combined share of exactly 0.9.
    """
    ids = [ap.id for ap in active_priors]
    if len(set(ids)) != len(ids):
        raise ValueError("active priors must carry unique ids")
    weights = []
    for ap in active_priors:
        age = iteration - ap.arrival_iteration
        if age < 1:
            raise ValueError(f"prior {ap.id!r} must be at least one iteration old")
        weights.append(math.exp(-decay * age))
    total = sum(weights)
    counts: dict[str, int] = {}
    if total > PRIOR_FRACTION_CAP:
        fractions = [PRIOR_FRACTION_CAP * w / total for w in weights]
    else:
        fractions = weights
    for ap, f in zip(active_priors, fractions):
        counts[ap.id] = round(f * pool_size)
    # rounding may nudge the total over the cap; trim the largest shares
    cap = int(PRIOR_FRACTION_CAP * pool_size)
    while sum(counts.values()) > cap:
        biggest = max(counts, key=lambda k: counts[k])
        counts[biggest] -= 1
    uniform = pool_size - sum(counts.values())
    return CandidatePlan(
        pool_size=pool_size,
        per_prior_counts=counts,
        uniform_count=uniform,
        local_starts=local_starts,
        neighbor_steps=neighbor_steps,
    )


@dataclass
class _Walk:
    x: np.ndarray
    score: float
    level: int = 0
    moves: int = 0
    done: bool = False


def _numeric_scales(space: ConfigSpace) -> np.ndarray:
    scales = np.zeros(space.dim)
    for i, p in enumerate(space.params):
        if not p.is_numeric:
            continue
        lo, hi = (p.log_bounds() if p.log_scale else (p.lower, p.upper))
        scales[i] = STEP_SCALE * (hi - lo)
    return scales


def _neighbors(
    x: np.ndarray, space: ConfigSpace, rng: np.random.Generator, scales: np.ndarray, level: int
) -> list[np.ndarray]:
    """One-exchange neighborhood: one numeric step per dimension, all category swaps."""
    out: list[np.ndarray] = []
    factor = 0.5**level
    for i, p in enumerate(space.params):
        if x[i] == INACTIVE and p.condition is not None:
            continue
        if p.kind == "categorical":
            for c in range(len(p.categories)):
                if c == x[i]:
                    continue
                nb = x.copy()
                nb[i] = c
                _reresolve(nb, space, rng)
                out.append(nb)
        else:
            nb = x.copy()
            step = rng.standard_normal() * scales[i] * factor
            if p.log_scale:
                lo, hi = p.log_bounds()
                v = math.exp(min(max(math.log(x[i]) + step, lo), hi))
            else:
                v = min(max(x[i] + step, p.lower), p.upper)
            if p.kind == "int":
                v = float(min(max(round(v), p.lower), p.upper))
            if v != x[i]:
                nb[i] = v
                out.append(nb)
    return out


def _draw_dim(p, u: float) -> float:
    """Map one unit draw to a value of dimension ``p``."""
    if p.kind == "categorical":
        return float(min(int(u * len(p.categories)), len(p.categories) - 1))
    if p.log_scale:
        lo, hi = p.log_bounds()
        v = math.exp(lo + u * (hi - lo))
    else:
        v = p.lower + u * (p.upper - p.lower)
    if p.kind == "int":
        v = float(min(max(round(v), p.lower), p.upper))
    return v


def _reresolve(x: np.ndarray, space: ConfigSpace, rng: np.random.Generator) -> None:
    """Re-resolve conditional activation in place after a parent swap."""
    for i, p in enumerate(space.params):
        if p.condition is None:
            continue
        parent_name, required = p.condition
        j = space.index(parent_name)
        req_idx = space.get(parent_name).categories.index(required)
        if x[j] == req_idx:
            if x[i] == INACTIVE:
                x[i] = _draw_dim(p, rng.random())
        else:
            x[i] = INACTIVE


def build_pool(
    ctx: AcquisitionContext,
    space: ConfigSpace,
    rng: np.random.Generator,
    plan: CandidatePlan,
) -> np.ndarray:
    """Assemble the candidate pool: prior blocks in activation order, then uniform."""
    blocks = []
    for ap in ctx.active_priors:
        n = plan.per_prior_counts.get(ap.id, 0)
        if n > 0:
            blocks.append(sample_encoded(ap.prior, space, rng, n))
    if plan.uniform_count > 0:
        blocks.append(space.sample_uniform_encoded(rng, plan.uniform_count))
    return np.vstack(blocks)


def propose_next(
    ctx: AcquisitionContext,
    space: ConfigSpace,
    rng: np.random.Generator,
    pool_size: int = DEFAULT_POOL_SIZE,
    local_starts: int = DEFAULT_LOCAL_STARTS,
    allocation_decay: float = DEFAULT_ALLOCATION_DECAY,
    neighbor_steps: int | None = None,
) -> Configuration:
    """Return the configuration maximizing the prior-weighted acquisition.

    Falls back to the pool point of maximal predictive variance when the
    acquisition is flat zero everywhere (nothing to climb).
    """
    plan = allocate_candidates(
        ctx.active_priors, ctx.iteration, pool_size, local_starts, allocation_decay, neighbor_steps
    )
    pool = build_pool(ctx, space, rng, plan)
    scores = alpha_dyna_encoded(ctx, pool, space)

    if ctx.selection == "ei" and not np.any(scores > 0.0):
        # flat EI everywhere: nothing to climb, explore the most uncertain point
        _, variances = ctx.model.predict_encoded(pool)
        return space.decode(pool[int(np.argmax(variances))])

    order = np.argsort(-scores, kind="stable")[: plan.local_starts]
    walks = [_Walk(x=pool[i].copy(), score=float(scores[i])) for i in order]
    scales = _numeric_scales(space)

    while any(not w.done for w in walks):
        batch: list[np.ndarray] = []
        owners: list[tuple[_Walk, int]] = []
        for w in walks:
            if w.done:
                continue
            nbs = _neighbors(w.x, space, rng, scales, w.level)
            if not nbs:
                w.done = True
                continue
            for nb in nbs:
                owners.append((w, len(batch)))
                batch.append(nb)
        if not batch:
            break
        batch_arr = np.array(batch)
        batch_scores = alpha_dyna_encoded(ctx, batch_arr, space)
        # greedy move per walk; on failure halve the step until levels run out
        by_walk: dict[int, tuple[float, int]] = {}
        for w, idx in owners:
            cur = by_walk.get(id(w))
            if cur is None or batch_scores[idx] > cur[0]:
                by_walk[id(w)] = (float(batch_scores[idx]), idx)
        for w in walks:
            if w.done or id(w) not in by_walk:
                continue
            best_score, idx = by_walk[id(w)]
            if best_score > w.score:
                w.score = best_score
                w.x = batch_arr[idx]
                w.moves += 1
                if plan.neighbor_steps is not None and w.moves >= plan.neighbor_steps:
                    w.done = True
            else:
                w.level += 1
                if w.level >= STEP_LEVELS:
                    w.done = True

    # overall best among pool points and walk endpoints; earliest candidate wins ties
    top = int(np.argmax(scores))
    best_x, best_score = pool[top], float(scores[top])
    for w in walks:
        if w.score > best_score:
            best_x, best_score = w.x, w.score
    return space.decode(best_x)
