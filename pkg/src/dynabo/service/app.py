"""FastAPI application exposing runs, live event streams, and prior intake."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterator

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from dynabo.engine import RunConfig
from dynabo.objectives import get_objective
from dynabo.priors import Prior
from dynabo.service.manager import ManagedRun, RunManager, ServiceError
from dynabo.service.schemas import (
    OverrideResponse,
    PriorAccepted,
    PriorBody,
    RunConfigModel,
    RunCreated,
    RunHandleModel,
    SliceResponse,
)
from dynabo.space import INACTIVE, ConfigSpace
from dynabo.synthesis import POLICIES, ScheduledPolicySource, load_or_build_corpus

UI_DIR = Path(__file__).parent / "ui_static"


def _build_run_config(body: RunConfigModel) -> tuple[RunConfig, object]:
    try:
        objective = get_objective(body.objective)
    except KeyError as exc:
        raise ServiceError(400, str(exc)) from exc
    if body.space is not None:
        given = ConfigSpace.from_json(body.space.model_dump(exclude_none=True))
        if given.to_json() != objective.space.to_json():
            raise ServiceError(400, "provided space does not match the objective's space")
    for _, policy in body.schedule:
        if policy not in POLICIES:
            raise ServiceError(400, f"unknown policy {policy!r}")
    if body.prior_mode == "scheduled" and not body.schedule:
        raise ServiceError(400, "scheduled prior_mode requires a non-empty schedule")
    cfg = RunConfig(
        space=objective.space,
        budget=body.budget,
        objective_id=body.objective,
        surrogate=body.surrogate,
        acquisition=body.acquisition,
        beta=body.beta,
        tau=float(body.tau),
        kappa=body.kappa,
        decay_power=body.decay_power,
        n_init=body.n_init,
        seed=body.seed,
        prior_mode=body.prior_mode,
        schedule=tuple((int(i), str(p)) for i, p in body.schedule),
        pool_size=body.pool_size,
        local_starts=body.local_starts,
        allocation_decay=body.allocation_decay,
        gate_samples=body.gate_samples,
        min_trial_seconds=body.min_trial_seconds,
    )
    return cfg, objective


def _sse_frame(seq: int | None, kind: str, payload: dict) -> str:
    head = f"id: {seq}\n" if seq is not None else ""
    return f"{head}event: {kind}\ndata: {json.dumps(payload)}\n\n"


def _event_stream(managed: ManagedRun) -> Iterator[str]:
    seq = 0
    while True:
        events, status = managed.events_since(seq)
        for ev in events:
            yield _sse_frame(ev.seq, ev.kind, ev.to_json())
        seq += len(events)
        if status in ("finished", "failed"):
            remaining, _ = managed.events_since(seq)
            for ev in remaining:
                yield _sse_frame(ev.seq, ev.kind, ev.to_json())
            yield _sse_frame(None, "finished", {"status": status, "error": managed.error})
            return
        managed.wait_for_events(seq)


def create_app(manager: RunManager | None = None) -> FastAPI:
    app = FastAPI(title="dynabo control plane", openapi_url="/spec")
    mgr = manager if manager is not None else RunManager()
    app.state.manager = mgr

    @app.exception_handler(ServiceError)
    async def _service_error(_: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status_code, content={"detail": exc.detail})

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_: Request, exc: RequestValidationError):
        detail = json.loads(json.dumps(exc.errors(), default=str))
        return JSONResponse(status_code=400, content={"detail": detail})

    @app.post("/runs", status_code=201, response_model=RunCreated)
    def create_run(body: RunConfigModel):
        cfg, objective = _build_run_config(body)

        source_factory = None
        if body.prior_mode == "scheduled":
            schedule = [int(i) for i, _ in body.schedule]
            policy = body.schedule[0][1]
            corpus_seeds, corpus_iters = body.corpus_seeds, body.corpus_iters

            def source_factory():  # runs on the engine thread; corpus build may take a while
                corpus = load_or_build_corpus(objective, corpus_seeds, corpus_iters)
                rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x50C1]))
                return ScheduledPolicySource(corpus, policy, schedule, cfg.space, rng)

        managed = mgr.create(cfg, objective.eval, source_factory=source_factory)
        return RunCreated(run_id=managed.run_id)

    @app.get("/runs")
    def list_runs():
        return mgr.list_handles()

    @app.get("/runs/{run_id}", response_model=RunHandleModel)
    def get_run(run_id: str):
        return mgr.get(run_id).handle()

    @app.get("/runs/{run_id}/state")
    def get_state(run_id: str):
        return mgr.get(run_id).state()

    @app.get("/runs/{run_id}/events")
    def get_events(run_id: str):
        managed = mgr.get(run_id)
        return StreamingResponse(
            _event_stream(managed),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    @app.post("/runs/{run_id}/priors", response_model=PriorAccepted)
    def submit_prior(run_id: str, body: PriorBody):
        managed = mgr.get(run_id)
        if managed.status in ("finished", "failed"):
            raise ServiceError(409, "run already finished")
        try:
            prior = Prior.from_json(body.model_dump(), managed.cfg.space)
        except (ValueError, KeyError) as exc:
            raise ServiceError(400, f"invalid prior: {exc}") from exc
        record = managed.submit_prior(prior)
        return PriorAccepted(prior_id=record.prior_id, verdict=record.verdict.to_json())

    @app.post("/runs/{run_id}/priors/{prior_id}/override", response_model=OverrideResponse)
    def override_prior(run_id: str, prior_id: str):
        managed = mgr.get(run_id)
        record = managed.override_prior(prior_id)
        return OverrideResponse(prior_id=record.prior_id, verdict=record.verdict.to_json())

    @app.get("/runs/{run_id}/slice", response_model=SliceResponse)
    def surrogate_slice(run_id: str, dim: str, points: int = 41):
        managed = mgr.get(run_id)
        snap = managed.snapshot_for_assessment()
        space = snap.space
        try:
            p = space.get(dim)
        except KeyError as exc:
            raise ServiceError(404, f"unknown hyperparameter {dim!r}") from exc
        anchor = space.encode(snap.incumbent[0])
        i = space.index(dim)
        if anchor[i] == INACTIVE:
            raise ServiceError(409, f"{dim!r} is inactive at the incumbent")
        if p.kind == "categorical":
            xs_out: list = list(p.categories)
            grid = np.arange(len(p.categories), dtype=float)
        elif p.kind == "int":
            step = max(1, int((p.upper - p.lower) // max(1, points - 1)))
            grid = np.arange(p.lower, p.upper + 1, step, dtype=float)
            xs_out = [float(v) for v in grid]
        elif p.log_scale:
            grid = np.geomspace(p.lower, p.upper, points)
            xs_out = [float(v) for v in grid]
        else:
            grid = np.linspace(p.lower, p.upper, points)
            xs_out = [float(v) for v in grid]
        rows = np.tile(anchor, (len(grid), 1))
        rows[:, i] = grid
        mean, var = snap.model.predict_encoded(rows)
        return SliceResponse(
            dim=dim,
            kind=p.kind,
            xs=xs_out,
            mean=[float(v) for v in mean],
            std=[float(v) for v in np.sqrt(np.maximum(var, 0.0))],
            anchor={
                "config": {k: v for k, v in snap.incumbent[0].values.items()},
                "loss": snap.incumbent[1],
            },
        )

    if UI_DIR.is_dir():
        app.mount("/ui", StaticFiles(directory=UI_DIR, html=True), name="ui")

    return app
