"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 runtime failure. Outputs land in
``DYNABO_DATA_DIR`` unless an explicit ``--out``/``--out-dir`` is given.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click
import numpy as np


@click.group()
def cli() -> None:
    """Prior-steerable Bayesian optimization: runs, corpora, benchmarks, service."""


# -- corpus -------------------------------------------------------------------


@cli.group()
def corpus() -> None:
    """Build and cluster prior-policy corpora."""


@corpus.command("generate")
@click.option("--objective", "objective_id", required=True, help="Built-in objective id.")
@click.option("--seeds", default=10, show_default=True)
@click.option("--iters", default=500, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@click.option("--json", "as_json", is_flag=True, help="Print a machine-readable summary.")
def corpus_generate(objective_id, seeds, iters, seed, workers, out_path, as_json):
    """Run exploratory optimizations and persist the raw entry list."""
    from dynabo.objectives import get_objective
    from dynabo.storage import data_dir
    from dynabo.synthesis import generate_corpus

    objective = get_objective(objective_id)
    rng = np.random.default_rng(seed)
    entries = generate_corpus(
        objective.eval,
        objective.space,
        seeds=seeds,
        iters=iters,
        rng=rng,
        objective_id=objective_id,
        workers=workers,
    )
    out = Path(out_path) if out_path else data_dir() / "corpora" / f"{objective_id.replace(':', '_')}-entries.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "metadata": {"objective": objective_id, "seeds": seeds, "iters": iters, "seed": seed},
        "entries": [
            {
                "values": dict(e.config.values),
                "active": dict(e.config.active),
                "loss": e.loss,
                "was_incumbent": e.was_incumbent,
            }
            for e in entries
        ],
    }
    out.write_text(json.dumps(doc))
    summary = {"entries": len(entries), "best_loss": entries[0].loss, "path": str(out)}
    click.echo(json.dumps(summary) if as_json else f"wrote {len(entries)} entries to {out}")


@corpus.command("cluster")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--k", default=100, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@click.option("--json", "as_json", is_flag=True)
def corpus_cluster(in_path, k, out_path, as_json):
    """Cluster a generated entry list into an ordered corpus."""
    from dynabo.objectives import get_objective
    from dynabo.space import Configuration
    from dynabo.storage import data_dir
    from dynabo.synthesis import CorpusEntry, cluster_corpus, corpus_to_json

    doc = json.loads(Path(in_path).read_text())
    objective = get_objective(doc["metadata"]["objective"])
    entries = [
        CorpusEntry(
            config=Configuration(values=dict(e["values"]), active=dict(e["active"])),
            loss=float(e["loss"]),
            was_incumbent=bool(e["was_incumbent"]),
        )
        for e in doc["entries"]
    ]
    clustered = cluster_corpus(entries, objective.space, k=k, metadata=doc["metadata"])
    out = Path(out_path) if out_path else data_dir() / "corpora" / (Path(in_path).stem + f"-k{k}.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(corpus_to_json(clustered)))
    summary = {
        "clusters": len(clustered.clusters),
        "best_loss": clustered.best_known_loss,
        "path": str(out),
    }
    click.echo(json.dumps(summary) if as_json else f"wrote {len(clustered.clusters)} clusters to {out}")


# -- bench ----------------------------------------------------------------------


@cli.group()
def bench() -> None:
    """Batch experiments: method comparisons and tau sweeps."""


def _load_spec(spec_path: str):
    from dynabo.bench import ExperimentSpec

    return ExperimentSpec.from_json(json.loads(Path(spec_path).read_text()))


def _out_dir(option: str | None, stem: str) -> Path:
    from dynabo.storage import data_dir

    out = Path(option) if option else data_dir() / "results" / f"{stem}-{time.strftime('%Y%m%d-%H%M%S')}"
    out.mkdir(parents=True, exist_ok=True)
    return out


@bench.command("run")
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", default=None, type=click.Path(file_okay=False))
@click.option("--workers", default=1, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def bench_run(spec_path, out_dir, workers, as_json):
    """Run the method-comparison grid of an experiment spec."""
    from dynabo.bench import run_experiment
    from dynabo.plotting import plot_regret_curves

    spec = _load_spec(spec_path)
    result = run_experiment(spec, workers=workers)
    out = _out_dir(out_dir, f"bench-{spec.objective_id}-{spec.policy}")
    result.write_csv(out / "results.csv")
    plot_regret_curves(result, out / "curves.svg")
    summary = {"out_dir": str(out), "rows": len(result.records) * spec.budget}
    for method in spec.methods:
        mean, _ = result.mean_curve(method)
        summary[method] = {"final_mean_regret": float(mean[-1])}
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    click.echo(json.dumps(summary) if as_json else f"results in {out}")


@bench.command("sweep-tau")
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", default=None, type=click.Path(file_okay=False))
@click.option("--workers", default=1, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def bench_sweep_tau(spec_path, out_dir, workers, as_json):
    """Sensitivity sweep over the gate threshold grid."""
    from dynabo.bench import sweep_table, tau_sweep, write_sweep_csv

    spec = _load_spec(spec_path)
    result = tau_sweep(spec, workers=workers)
    out = _out_dir(out_dir, f"sweep-{spec.objective_id}-{spec.policy}")
    write_sweep_csv(result, out / "sweep.csv")
    table = sweep_table(result)
    (out / "sweep_summary.json").write_text(json.dumps(table, indent=2, default=str))
    click.echo(json.dumps(table, default=str) if as_json else f"sweep results in {out}")


@bench.command("plot")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def bench_plot(in_path, out_path):
    """Regret curves (SVG) from a results CSV."""
    from dynabo.plotting import plot_regret_csv

    plot_regret_csv(in_path, out_path)
    click.echo(f"wrote {out_path}")


@cli.command("plot")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def plot_cmd(in_path, out_path):
    """Alias for ``bench plot``."""
    from dynabo.plotting import plot_regret_csv

    plot_regret_csv(in_path, out_path)
    click.echo(f"wrote {out_path}")


# -- single run --------------------------------------------------------------------


@cli.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("--seed", default=None, type=int, help="Overrides the config's seed.")
@click.option("--out-dir", default=None, type=click.Path(file_okay=False))
@click.option("--json", "as_json", is_flag=True)
def run_cmd(config_path, seed, out_dir, as_json):
    """One optimization run from a JSON config; writes events and results."""
    from dynabo.engine import RunConfig, run, write_event_log, write_results_csv
    from dynabo.objectives import get_objective
    from dynabo.synthesis import ScheduledPolicySource, load_or_build_corpus

    path = Path(config_path)
    if not path.exists():
        raise click.ClickException(f"config file not found: {path}")
    doc = json.loads(path.read_text())
    cfg = RunConfig.from_json(doc)
    if seed is not None:
        cfg.seed = seed
    objective = get_objective(cfg.objective_id)

    source = None
    if cfg.prior_mode in ("scheduled", "random_timing"):
        corpus = load_or_build_corpus(
            objective, int(doc.get("corpus_seeds", 10)), int(doc.get("corpus_iters", 500))
        )
        from dynabo.engine import random_prior_schedule, rng_streams

        policy = cfg.schedule[0][1] if cfg.schedule else doc.get("policy", "expert")
        if cfg.prior_mode == "random_timing":
            streams = rng_streams(cfg.seed)
            iters = random_prior_schedule(streams["policy"], cfg.budget, cfg.resolved_n_init())
        else:
            iters = [i for i, _ in cfg.schedule]
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x50C1]))
        source = ScheduledPolicySource(corpus, policy, iters, cfg.space, rng)

    out = _out_dir(out_dir, f"run-{cfg.objective_id or 'custom'}-seed{cfg.seed}")
    state = run(cfg, objective.eval, prior_source=source)
    write_event_log(state.events, out / "events.jsonl")
    write_results_csv(state, out / "results.csv", objective.known_min)
    summary = {
        "out_dir": str(out),
        "trials": len(state.trials),
        "incumbent_loss": state.incumbent[1],
        "regret": max(state.incumbent[1] - objective.known_min, 0.0),
    }
    click.echo(json.dumps(summary) if as_json else f"run finished; outputs in {out}")


# -- service ----------------------------------------------------------------------


@cli.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8710, show_default=True)
def serve_cmd(host, port):
    """Start the HTTP control plane (and the dashboard at /ui)."""
    import uvicorn

    from dynabo.service import create_app

    uvicorn.run(create_app(), host=host, port=port, log_level="info")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.UsageError as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 2
    except Exception as exc:  # noqa: BLE001 - surface runtime failures as exit 2
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
