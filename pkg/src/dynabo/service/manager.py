"""Run lifecycle management for the HTTP service.

One engine thread per run. All interaction crosses two narrow bridges: an
event listener that appends to a broadcast log under a condition variable,
and a prior queue drained once per iteration boundary. Gate verdicts for
interactive submissions are computed synchronously against the latest
iteration-boundary snapshot, so they never block the loop; their staleness
is at most one iteration.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass
from typing import Any

import numpy as np

from dynabo.acquisition import AcquisitionContext
from dynabo.engine import (
    Event,
    PriorSubmission,
    QueuePriorSource,
    RunConfig,
    RunSnapshot,
    run,
)
from dynabo.gate import GateVerdict, assess_prior, override
from dynabo.priors import Prior

ACTIVE_STATUSES = ("created", "running", "awaiting_prior_decision")


class ServiceError(Exception):
    def __init__(self, status_code: int, detail: str):
        super().__init__(detail)
        self.status_code = status_code
        self.detail = detail


@dataclass
class PriorRecord:
    prior_id: str
    prior: Prior
    verdict: GateVerdict
    status: str  # "accepted" | "rejected" | "overridden"


class _BridgeSource:
    """Prior source handed to the engine: drains the queue and captures
    the boundary snapshot (with its fitted surrogate) for the service."""

    def __init__(self, managed: "ManagedRun", inner=None):
        self.managed = managed
        self.queue = QueuePriorSource()
        self.inner = inner

    def poll(self, snapshot: RunSnapshot):
        self.managed._set_snapshot(snapshot)
        subs = self.queue.poll(snapshot)
        if self.inner is not None:
            subs.extend(self.inner.poll(snapshot))
        return subs


class ManagedRun:
    def __init__(self, cfg: RunConfig, objective_eval, source_factory=None):
        self.run_id = str(uuid.uuid4())
        self.cfg = cfg
        self._objective_eval = objective_eval
        self._source_factory = source_factory
        self.status = "created"
        self.error: str | None = None
        self.events: list[Event] = []
        self._lock = threading.Lock()
        self._cond = threading.Condition(self._lock)
        self._snapshot: RunSnapshot | None = None
        self._priors: dict[str, PriorRecord] = {}
        self._prior_counter = 0
        self._source = _BridgeSource(self)
        self._trials: list[dict] = []
        self._incumbent: dict | None = None
        self._thread = threading.Thread(target=self._work, daemon=True, name=f"run-{self.run_id[:8]}")

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        with self._lock:
            self.status = "running"
        self._thread.start()

    def _work(self) -> None:
        try:
            if self._source_factory is not None:
                # may build a corpus; runs on this thread so POST /runs returns fast
                self._source.inner = self._source_factory()
            run(self.cfg, self._objective_eval, prior_source=self._source, listener=self._on_event)
            final = "finished"
        except Exception as exc:  # noqa: BLE001 - reported through the run handle
            self.error = str(exc)
            final = "failed"
        with self._cond:
            self.status = final
            self._cond.notify_all()

    def _on_event(self, ev: Event) -> None:
        with self._cond:
            self.events.append(ev)
            if ev.kind == "trial":
                self._trials.append(
                    {
                        "config": ev.payload["config"],
                        "loss": ev.payload["loss"],
                        "iteration": ev.iteration,
                        "source": ev.payload["source"],
                    }
                )
                if self.status == "awaiting_prior_decision":
                    self.status = "running"
            elif ev.kind == "incumbent_update":
                self._incumbent = {"config": ev.payload["config"], "loss": ev.payload["loss"]}
            self._cond.notify_all()

    def _set_snapshot(self, snapshot: RunSnapshot) -> None:
        with self._lock:
            self._snapshot = snapshot

    # -- queries ---------------------------------------------------------------

    def handle(self) -> dict[str, Any]:
        with self._lock:
            return {"run_id": self.run_id, "status": self.status, "config": self.cfg.to_json()}

    def state(self) -> dict[str, Any]:
        with self._lock:
            active = []
            if self._snapshot is not None:
                active = [
                    {
                        "id": ap.id,
                        "arrival_iteration": ap.arrival_iteration,
                        "label": ap.prior.label,
                        "prior": ap.prior.to_json(),
                    }
                    for ap in self._snapshot.active_priors
                ]
            return {
                "run_id": self.run_id,
                "status": self.status,
                "iteration": len(self._trials),
                "trials": list(self._trials),
                "incumbent": self._incumbent,
                "active_priors": active,
                "priors": [
                    {
                        "prior_id": rec.prior_id,
                        "label": rec.prior.label,
                        "status": rec.status,
                        "verdict": rec.verdict.to_json(),
                        "prior": rec.prior.to_json(),
                    }
                    for rec in self._priors.values()
                ],
                "error": self.error,
            }

    def events_since(self, seq: int) -> tuple[list[Event], str]:
        with self._lock:
            return self.events[seq:], self.status

    def wait_for_events(self, seq: int, timeout: float = 0.5) -> None:
        with self._cond:
            if len(self.events) <= seq and self.status in ACTIVE_STATUSES:
                self._cond.wait(timeout=timeout)

    def snapshot_for_assessment(self) -> RunSnapshot:
        with self._lock:
            if self.status not in ACTIVE_STATUSES:
                raise ServiceError(409, "run is not running")
            snap = self._snapshot
        if snap is None or snap.model is None or snap.incumbent is None:
            raise ServiceError(409, "run has no fitted surrogate yet; retry after the initial design")
        return snap

    # -- prior intake ------------------------------------------------------------

    def submit_prior(self, prior: Prior) -> PriorRecord:
        snap = self.snapshot_for_assessment()
        with self._lock:
            self._prior_counter += 1
            prior_id = f"user-{self._prior_counter}"
            gate_rng = np.random.default_rng(
                np.random.SeedSequence([self.cfg.seed, 0x9A7E, self._prior_counter])
            )
        verdict = assess_prior(
            prior,
            AcquisitionContext(
                model=snap.model,
                incumbent_loss=snap.incumbent[1],
                iteration=snap.iteration,
                beta=snap.beta,
                kappa=snap.kappa,
                decay_power=snap.decay_power,
            ),
            snap.space,
            snap.incumbent[0],
            gate_rng,
            tau=self.cfg.tau,
            n_samples=self.cfg.gate_samples,
        )
        record = PriorRecord(
            prior_id=prior_id,
            prior=prior,
            verdict=verdict,
            status="accepted" if verdict.accepted else "rejected",
        )
        with self._lock:
            self._priors[prior_id] = record
            if not verdict.accepted and self.status == "running":
                self.status = "awaiting_prior_decision"
        self._source.queue.submit(
            PriorSubmission(prior=prior, id=prior_id, verdict=verdict, kind="new")
        )
        return record

    def override_prior(self, prior_id: str) -> PriorRecord:
        with self._lock:
            record = self._priors.get(prior_id)
            if record is None:
                raise ServiceError(404, f"unknown prior {prior_id!r}")
            if record.verdict.accepted:
                raise ServiceError(409, "prior was already accepted")
            if self.status not in ACTIVE_STATUSES:
                raise ServiceError(409, "run is no longer running")
            new_verdict = override(record.verdict)
            record.verdict = new_verdict
            record.status = "overridden"
            if self.status == "awaiting_prior_decision":
                self.status = "running"
        self._source.queue.submit(
            PriorSubmission(prior=record.prior, id=prior_id, verdict=new_verdict, kind="override")
        )
        return record


class RunManager:
    def __init__(self):
        self._runs: dict[str, ManagedRun] = {}
        self._lock = threading.Lock()

    def create(self, cfg: RunConfig, objective_eval, source_factory=None) -> ManagedRun:
        managed = ManagedRun(cfg, objective_eval, source_factory)
        with self._lock:
            self._runs[managed.run_id] = managed
        managed.start()
        return managed

    def get(self, run_id: str) -> ManagedRun:
        with self._lock:
            managed = self._runs.get(run_id)
        if managed is None:
            raise ServiceError(404, f"unknown run {run_id!r}")
        return managed

    def list_handles(self) -> list[dict[str, Any]]:
        with self._lock:
            return [m.handle() for m in self._runs.values()]
