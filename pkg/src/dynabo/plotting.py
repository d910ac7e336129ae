"""Regret-curve figures (SVG) for batch experiment results."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from dynabo.bench import ExperimentResult

_METHOD_STYLE = {
    "vanilla": ("#444444", "-"),
    "static_prior": ("#1f77b4", "--"),
    "dynabo_accept_all": ("#d62728", "-."),
    "dynabo_gated": ("#2ca02c", "-"),
}


def plot_regret_curves(result: ExperimentResult, path: Path | str, log_scale: bool = True) -> None:
    """Mean regret per method with standard-error bands and prior markers."""
    fig, ax = plt.subplots(figsize=(7, 4.2))
    iters = np.arange(1, result.spec.budget + 1)
    for method in result.spec.methods:
        if not any(r.method == method for r in result.records):
            continue
        mean, stderr = result.mean_curve(method)
        color, ls = _METHOD_STYLE.get(method, ("#777777", "-"))
        ax.plot(iters, mean, label=method, color=color, linestyle=ls)
        ax.fill_between(iters, mean - stderr, mean + stderr, color=color, alpha=0.2, linewidth=0)
    for it in result.spec.resolved_schedule():
        ax.axvline(it, color="#999999", linewidth=0.8, linestyle=":")
    if log_scale:
        positives = [v for r in result.records for v in r.regret if v > 0]
        if positives:
            ax.set_yscale("symlog", linthresh=max(min(positives), 1e-8))
    ax.set_xlabel("evaluations")
    ax.set_ylabel("mean simple regret")
    ax.set_title(f"{result.spec.objective_id} / {result.spec.policy} priors / {len({r.seed for r in result.records})} seeds")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_regret_csv(csv_path: Path | str, out_path: Path | str) -> None:
    """Plot straight from a results CSV written by the bench harness."""
    import csv as _csv
    from collections import defaultdict

    by_method: dict[str, dict[int, list[tuple[int, float]]]] = defaultdict(lambda: defaultdict(list))
    with open(csv_path) as fh:
        for row in _csv.DictReader(fh):
            by_method[row["method"]][int(row["seed"])].append(
                (int(row["iteration"]), float(row["regret"]))
            )
    fig, ax = plt.subplots(figsize=(7, 4.2))
    for method, seeds in sorted(by_method.items()):
        curves = []
        for _, pts in sorted(seeds.items()):
            pts.sort()
            curves.append([v for _, v in pts])
        arr = np.array(curves)
        mean = arr.mean(axis=0)
        stderr = arr.std(axis=0, ddof=1) / np.sqrt(len(arr)) if len(arr) > 1 else np.zeros_like(mean)
        color, ls = _METHOD_STYLE.get(method, ("#777777", "-"))
        xs = np.arange(1, arr.shape[1] + 1)
        ax.plot(xs, mean, label=method, color=color, linestyle=ls)
        ax.fill_between(xs, mean - stderr, mean + stderr, color=color, alpha=0.2, linewidth=0)
    ax.set_xlabel("evaluations")
    ax.set_ylabel("mean simple regret")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(out_path, format="svg")
    plt.close(fig)
