"""The optimization loop: initial design, refit, proposal, prior intake.

Each run owns named RNG streams (design / fit / propose / gate / policy)
derived from one seed, so runs are reproducible bit-exactly and the prior
machinery consumes no randomness when no priors are ever submitted. Priors
arrive through a :class:`PriorSource`; the loop drains the source once per
iteration boundary, gates unscreened submissions, and activates accepted
ones so they first influence the *next* proposal (age at least 1).
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Protocol

import numpy as np
from scipy.stats import qmc

from dynabo.acquisition import AcquisitionContext, ActivePrior
from dynabo.gate import GateVerdict, assess_prior
from dynabo.optimizer import propose_next
from dynabo.priors import Prior
from dynabo.space import ConfigSpace, Configuration
from dynabo.surrogates import SurrogateModel, fit_surrogate

PRIOR_MODES = ("none", "scheduled", "random_timing", "interactive", "static")


@dataclass
class RunConfig:
    """Everything that defines a run; see the README for the JSON schema."""

    space: ConfigSpace
    budget: int
    objective_id: str = ""
    surrogate: str = "rf"
    acquisition: str = "ei"
    beta: float | None = None  # defaults to budget / 10
    tau: float = -0.15
    kappa: float = 1.0
    decay_power: int = 2
    n_init: int | None = None  # defaults to max(5, 2 * dim)
    seed: int = 0
    prior_mode: str = "none"
    schedule: tuple[tuple[int, str], ...] = ()
    pool_size: int = 5000
    local_starts: int = 10
    allocation_decay: float = 0.126
    gate_samples: int = 500
    min_trial_seconds: float = 0.0
    surrogate_params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.prior_mode not in PRIOR_MODES:
            raise ValueError(f"unknown prior_mode {self.prior_mode!r}")
        if self.resolved_n_init() >= self.budget:
            raise ValueError("n_init must be smaller than the budget")

    def resolved_n_init(self) -> int:
        return self.n_init if self.n_init is not None else max(5, 2 * self.space.dim)

    def resolved_beta(self) -> float:
        return self.beta if self.beta is not None else self.budget / 10

    def to_json(self) -> dict[str, Any]:
        doc = {
            "space": self.space.to_json(),
            "budget": self.budget,
            "objective": self.objective_id,
            "surrogate": self.surrogate,
            "acquisition": self.acquisition,
            "beta": self.beta,
            "tau": _enc_float(self.tau),
            "kappa": self.kappa,
            "decay_power": self.decay_power,
            "n_init": self.n_init,
            "seed": self.seed,
            "prior_mode": self.prior_mode,
            "schedule": [list(s) for s in self.schedule],
            "pool_size": self.pool_size,
            "local_starts": self.local_starts,
            "allocation_decay": self.allocation_decay,
            "gate_samples": self.gate_samples,
            "min_trial_seconds": self.min_trial_seconds,
        }
        return doc

    @classmethod
    def from_json(cls, doc: dict[str, Any], space: ConfigSpace | None = None) -> "RunConfig":
        if space is None:
            if "space" in doc and doc["space"]:
                space = ConfigSpace.from_json(doc["space"])
            else:
                from dynabo.objectives import get_objective

                space = get_objective(doc["objective"]).space
        return cls(
            space=space,
            budget=int(doc["budget"]),
            objective_id=str(doc.get("objective", "")),
            surrogate=doc.get("surrogate", "rf"),
            acquisition=doc.get("acquisition", "ei"),
            beta=doc.get("beta"),
            tau=_dec_float(doc.get("tau", -0.15)),
            kappa=float(doc.get("kappa", 1.0)),
            decay_power=int(doc.get("decay_power", 2)),
            n_init=doc.get("n_init"),
            seed=int(doc.get("seed", 0)),
            prior_mode=doc.get("prior_mode", "none"),
            schedule=tuple((int(i), str(p)) for i, p in doc.get("schedule", [])),
            pool_size=int(doc.get("pool_size", 5000)),
            local_starts=int(doc.get("local_starts", 10)),
            allocation_decay=float(doc.get("allocation_decay", 0.126)),
            gate_samples=int(doc.get("gate_samples", 500)),
            min_trial_seconds=float(doc.get("min_trial_seconds", 0.0)),
        )


def _enc_float(v: float) -> float | str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _dec_float(v: Any) -> float:
    if isinstance(v, str):
        return float(v)
    return float(v)


# ---------------------------------------------------------------------------
# Events and state
# ---------------------------------------------------------------------------

EVENT_KINDS = (
    "trial",
    "incumbent_update",
    "prior_submitted",
    "prior_verdict",
    "prior_overridden",
    "prior_activated",
    "warning",
)


@dataclass(frozen=True)
class Event:
    seq: int
    kind: str
    iteration: int
    payload: dict[str, Any]
    wall_time: float

    def to_json(self, include_wall_time: bool = True) -> dict[str, Any]:
        doc = {"seq": self.seq, "kind": self.kind, "iteration": self.iteration, "payload": self.payload}
        if include_wall_time:
            doc["wall_time"] = self.wall_time
        return doc


@dataclass(frozen=True)
class Trial:
    config: Configuration
    loss: float
    iteration: int
    source: str  # "init" | "bo"


def config_json(config: Configuration) -> dict[str, Any]:
    return {"values": dict(config.values), "active": dict(config.active)}


@dataclass(frozen=True)
class RunSnapshot:
    """Immutable view of a run, safe to hand to other threads.

    Carries a reference to the last fitted surrogate so the gate and the
    service's slice endpoint can query it without touching the loop.
    """

    space: ConfigSpace
    iteration: int
    trials: tuple[Trial, ...]
    incumbent: tuple[Configuration, float] | None
    active_priors: tuple[ActivePrior, ...]
    model: SurrogateModel | None
    beta: float
    kappa: float
    decay_power: int

    def to_json(self) -> dict[str, Any]:
        return {
            "iteration": self.iteration,
            "trials": [
                {
                    "config": config_json(t.config),
                    "loss": t.loss,
                    "iteration": t.iteration,
                    "source": t.source,
                }
                for t in self.trials
            ],
            "incumbent": (
                None
                if self.incumbent is None
                else {"config": config_json(self.incumbent[0]), "loss": self.incumbent[1]}
            ),
            "active_priors": [
                {
                    "id": ap.id,
                    "arrival_iteration": ap.arrival_iteration,
                    "label": ap.prior.label,
                    "prior": ap.prior.to_json(),
                }
                for ap in self.active_priors
            ],
        }


@dataclass
class RunState:
    """Full trajectory of one optimization run."""

    config: RunConfig
    trials: list[Trial] = field(default_factory=list)
    incumbent: tuple[Configuration, float] | None = None
    active_priors: list[ActivePrior] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)

    @property
    def iteration(self) -> int:
        return len(self.trials)

    def incumbent_loss(self) -> float:
        return self.incumbent[1] if self.incumbent else math.inf

    def snapshot(self, model: SurrogateModel | None = None) -> RunSnapshot:
        return RunSnapshot(
            space=self.config.space,
            iteration=self.iteration,
            trials=tuple(self.trials),
            incumbent=self.incumbent,
            active_priors=tuple(self.active_priors),
            model=model,
            beta=self.config.resolved_beta(),
            kappa=self.config.kappa,
            decay_power=self.config.decay_power,
        )


# ---------------------------------------------------------------------------
# Prior sources
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PriorSubmission:
    """One prior handed to the loop, optionally pre-screened.

    ``verdict`` is None for submissions the loop itself must gate (scripted
    schedules); interactive submissions arrive with the verdict already
    computed against a snapshot. ``kind`` is ``"new"`` or ``"override"``.
    """

    prior: Prior
    id: str
    verdict: GateVerdict | None = None
    kind: str = "new"


class PriorSource(Protocol):
    def poll(self, snapshot: RunSnapshot) -> list[PriorSubmission]: ...


class QueuePriorSource:
    """Thread-safe hand-off from a producer (e.g. the HTTP service) to the loop."""

    def __init__(self, maxsize: int = 64):
        import queue

        self._q: "queue.Queue[PriorSubmission]" = queue.Queue(maxsize=maxsize)

    def submit(self, submission: PriorSubmission) -> None:
        self._q.put(submission, timeout=5.0)

    def poll(self, snapshot: RunSnapshot) -> list[PriorSubmission]:
        out = []
        while True:
            try:
                out.append(self._q.get_nowait())
            except Exception:
                break
        return out


def random_prior_schedule(
    rng: np.random.Generator, budget: int, n_init: int, rate: float = 0.15
) -> list[int]:
    """Iterations at which a simulated user supplies a prior.

    The first prior lands at the first post-init iteration; afterwards, if
    the last prior was given at ``t_i``, iteration ``m`` receives one with
    probability ``1 - exp(-rate * (m - t_i))``.
    """
    if budget < n_init:
        raise ValueError("budget must be >= n_init")
    out = []
    last = None
    for m in range(n_init, budget):
        if last is None:
            out.append(m)
            last = m
            continue
        p = 1.0 - math.exp(-rate * (m - last))
        if rng.random() < p:
            out.append(m)
            last = m
    return out


# ---------------------------------------------------------------------------
# The loop
# ---------------------------------------------------------------------------


def rng_streams(seed: int) -> dict[str, np.random.Generator]:
    """Named, independent RNG streams for one run."""
    names = ("design", "fit", "propose", "gate", "policy")
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {n: np.random.default_rng(c) for n, c in zip(names, children)}


def initial_design(space: ConfigSpace, n: int, rng: np.random.Generator) -> np.ndarray:
    """Scrambled low-discrepancy design covering the space, in encoded form."""
    sampler = qmc.Halton(d=space.dim, scramble=True, seed=rng)
    return space.from_unit_cube(sampler.random(n))


def run(
    cfg: RunConfig,
    objective: Callable[[Configuration], float],
    prior_source: PriorSource | None = None,
    static_prior: Prior | None = None,
    listener: Callable[[Event], None] | None = None,
) -> RunState:
    """Execute one optimization run to its budget and return the trajectory.

    ``static_prior`` reproduces the single-initial-prior baseline: the prior
    is active from the first model-based proposal with a plain ``beta / t``
    decay and is never gated.
    """
    streams = rng_streams(cfg.seed)
    state = RunState(config=cfg)
    space = cfg.space
    n_init = cfg.resolved_n_init()
    beta = cfg.resolved_beta()
    x_rows: list[np.ndarray] = []
    losses: list[float] = []

    def emit(kind: str, payload: dict[str, Any]) -> None:
        ev = Event(
            seq=len(state.events),
            kind=kind,
            iteration=state.iteration,
            payload=payload,
            wall_time=time.time(),
        )
        state.events.append(ev)
        if listener is not None:
            listener(ev)

    def evaluate(config: Configuration, source: str) -> None:
        if cfg.min_trial_seconds > 0:
            time.sleep(cfg.min_trial_seconds)  # pacing knob for interactive sessions
        try:
            loss = float(objective(config))
            if not math.isfinite(loss):
                raise ValueError(f"objective returned non-finite loss {loss}")
        except Exception as exc:  # noqa: BLE001 - failures are imputed, not fatal
            worst = max(losses, default=1.0)
            loss = worst + 0.1 * abs(worst)
            emit("warning", {"message": f"objective failed: {exc}", "imputed_loss": loss})
        x_rows.append(space.encode(config))
        losses.append(loss)
        state.trials.append(Trial(config=config, loss=loss, iteration=len(state.trials) + 1, source=source))
        emit("trial", {"config": config_json(config), "loss": loss, "source": source})
        if state.incumbent is None or loss < state.incumbent[1]:
            state.incumbent = (config, loss)
            emit("incumbent_update", {"config": config_json(config), "loss": loss})

    for row in initial_design(space, n_init, streams["design"]):
        evaluate(space.decode(row), "init")

    static_pending = static_prior is not None

    while state.iteration < cfg.budget:
        t = state.iteration
        model = fit_surrogate(
            cfg.surrogate,
            None,
            space,
            streams["fit"],
            x=np.array(x_rows),
            y=np.array(losses),
            **cfg.surrogate_params,
        )
        for msg in model.warnings:
            emit("warning", {"message": msg})

        if static_pending:
            ap = ActivePrior(prior=static_prior, arrival_iteration=0, id="static-1", decay_power=1)
            state.active_priors.append(ap)
            emit("prior_activated", {"prior_id": ap.id, "arrival_iteration": 0, "label": static_prior.label})
            static_pending = False

        if prior_source is not None:
            snapshot = state.snapshot(model)
            for sub in prior_source.poll(snapshot):
                if sub.kind == "override":
                    emit("prior_overridden", {"prior_id": sub.id})
                    verdict = sub.verdict
                else:
                    emit("prior_submitted", {"prior_id": sub.id, "prior": sub.prior.to_json()})
                    verdict = sub.verdict
                    if verdict is None:
                        verdict = assess_prior(
                            sub.prior,
                            AcquisitionContext(
                                model=model,
                                incumbent_loss=state.incumbent_loss(),
                                iteration=t,
                                beta=beta,
                                kappa=cfg.kappa,
                                decay_power=cfg.decay_power,
                            ),
                            space,
                            state.incumbent[0],
                            streams["gate"],
                            tau=cfg.tau,
                            n_samples=cfg.gate_samples,
                        )
                    emit("prior_verdict", {"prior_id": sub.id, "verdict": verdict.to_json()})
                if verdict is not None and verdict.accepted:
                    ap = ActivePrior(prior=sub.prior, arrival_iteration=t, id=sub.id)
                    state.active_priors.append(ap)
                    emit(
                        "prior_activated",
                        {
                            "prior_id": sub.id,
                            "arrival_iteration": t,
                            "label": sub.prior.label,
                            "overridden": verdict.overridden,
                        },
                    )

        ctx = AcquisitionContext(
            model=model,
            incumbent_loss=state.incumbent_loss(),
            iteration=t + 1,  # the trial being proposed; newest priors have age 1
            beta=beta,
            kappa=cfg.kappa,
            decay_power=cfg.decay_power,
            active_priors=list(state.active_priors),
            selection=cfg.acquisition,
        )
        proposal = propose_next(
            ctx,
            space,
            streams["propose"],
            pool_size=cfg.pool_size,
            local_starts=cfg.local_starts,
            allocation_decay=cfg.allocation_decay,
        )
        evaluate(proposal, "bo")

    return state


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def write_event_log(events: Iterable[Event], path) -> None:
    """JSON Lines event log; wall-clock stamps are omitted so logs are
    byte-identical across runs with the same seed."""
    with open(path, "w") as fh:
        for ev in events:
            fh.write(json.dumps(ev.to_json(include_wall_time=False), sort_keys=True))
            fh.write("\n")


def write_results_csv(state: RunState, path, best_known: float) -> None:
    """Per-iteration incumbent trace: ``iteration,incumbent_loss,regret``."""
    best = math.inf
    with open(path, "w") as fh:
        fh.write("iteration,incumbent_loss,regret\n")
        for t in state.trials:
            best = min(best, t.loss)
            fh.write(f"{t.iteration},{best!r},{max(best - best_known, 0.0)!r}\n")


def regret_trajectory(state: RunState, best_known: float) -> np.ndarray:
    best = np.minimum.accumulate(np.array([t.loss for t in state.trials]))
    return np.maximum(best - best_known, 0.0)
