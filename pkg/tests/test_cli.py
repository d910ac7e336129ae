import json

from dynabo.cli import main


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    for sub in ("corpus", "bench", "run", "serve", "plot"):
        assert main([sub, "--help"]) == 0, sub


def test_unknown_subcommand_is_usage_error(capsys):
    assert main(["frobnicate"]) == 1


def test_missing_config_is_runtime_error(capsys):
    code = main(["run", "--config", "/nowhere/cfg.json"])
    assert code == 2
    assert "/nowhere/cfg.json" in capsys.readouterr().err


def _write_cfg(tmp_path, **overrides):
    cfg = {
        "objective": "branin",
        "budget": 14,
        "seed": 7,
        "prior_mode": "none",
        "pool_size": 200,
        "local_starts": 3,
        **overrides,
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_run_byte_identical_event_logs(tmp_path, capsys):
    cfg = _write_cfg(tmp_path)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", str(cfg), "--seed", "7", "--out-dir", str(out_a), "--json"]) == 0
    assert main(["run", "--config", str(cfg), "--seed", "7", "--out-dir", str(out_b)]) == 0
    assert (out_a / "events.jsonl").read_bytes() == (out_b / "events.jsonl").read_bytes()
    summary = json.loads(capsys.readouterr().out.splitlines()[0])
    assert summary["trials"] == 14
    header = (out_a / "results.csv").read_text().splitlines()[0]
    assert header == "iteration,incumbent_loss,regret"


def test_corpus_generate_then_cluster(tmp_path, capsys):
    entries_path = tmp_path / "entries.json"
    code = main([
        "corpus", "generate", "--objective", "branin", "--seeds", "1", "--iters", "12",
        "--out", str(entries_path), "--json",
    ])
    assert code == 0
    summary = json.loads(capsys.readouterr().out.splitlines()[-1])
    assert summary["entries"] >= 4

    corpus_path = tmp_path / "corpus.json"
    code = main(["corpus", "cluster", "--in", str(entries_path), "--k", "5", "--out", str(corpus_path), "--json"])
    assert code == 0
    summary = json.loads(capsys.readouterr().out.splitlines()[-1])
    assert summary["clusters"] <= 5
    doc = json.loads(corpus_path.read_text())
    assert doc["clusters"][0]["median_loss"] <= doc["clusters"][-1]["median_loss"]


def test_bench_run_and_plot(tmp_path, capsys):
    spec = {
        "objective": "branin",
        "methods": ["vanilla", "dynabo_gated"],
        "policy": "expert",
        "seeds": 2,
        "budget": 22,
        "corpus_seeds": 1,
        "corpus_iters": 15,
        "run_params": {"pool_size": 200, "local_starts": 3, "surrogate_params": {"trees_count": 8}},
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    out = tmp_path / "bench"
    assert main(["bench", "run", "--spec", str(spec_path), "--out-dir", str(out), "--json"]) == 0
    assert (out / "results.csv").exists()
    assert (out / "curves.svg").read_text().startswith("<?xml")

    svg = tmp_path / "replot.svg"
    assert main(["plot", "--in", str(out / "results.csv"), "--out", str(svg)]) == 0
    assert svg.read_text().lstrip().startswith("<?xml")


def test_bench_sweep_tau_rows(tmp_path, capsys):
    spec = {
        "objective": "branin",
        "policy": "adversarial",
        "seeds": 2,
        "budget": 20,
        "tau_grid": ["-inf", 0.0, "inf"],
        "corpus_seeds": 1,
        "corpus_iters": 15,
        "run_params": {"pool_size": 200, "local_starts": 3, "surrogate_params": {"trees_count": 8}},
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    out = tmp_path / "sweep"
    assert main(["bench", "sweep-tau", "--spec", str(spec_path), "--out-dir", str(out), "--json"]) == 0
    rows = (out / "sweep.csv").read_text().splitlines()
    assert rows[0] == "tau,policy,seed,final_regret,priors_submitted,priors_accepted"
    assert len(rows) - 1 == 3 * 2  # one row per (tau, policy, seed)
