"""End-to-end tests of the command-line harness.

Every test drives ``rewriteopt.cli.main.main`` in-process with a JSON config
in a temp directory, then inspects exit codes and the files written to the
output directory. Datasets and checkpoints are tiny (16-wide encoders, a few
dozen instances) so the whole file runs in well under a minute.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from rewriteopt.cli import checkpoint as ckpt
from rewriteopt.cli.commands import METRICS_HEADER, PER_INSTANCE_HEADER
from rewriteopt.cli.datasets import split_counts
from rewriteopt.cli.errors import ConfigError
from rewriteopt.cli.main import main
from rewriteopt.exprs.model import ExprModel
from rewriteopt.exprs.parser import parse
from rewriteopt.exprs.ast import print_expr
from rewriteopt.nn.layers import EncoderConfig
from rewriteopt.nn.params import ParamStore

ENC = {"hidden_size": 16, "predictor_hidden": 16, "selector_hidden": 16}
ENC_CFG = EncoderConfig(hidden_size=16, predictor_hidden=16, selector_hidden=16)


def _cfg(directory: Path, name: str, obj: dict) -> str:
    path = directory / name
    path.write_text(json.dumps(obj), encoding="utf-8")
    return str(path)


def _read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _report(out_dir: Path) -> dict:
    return json.loads((out_dir / "report.json").read_text(encoding="utf-8"))


def _trace(out_dir: Path) -> list[dict]:
    text = (out_dir / "trace.jsonl").read_text(encoding="utf-8")
    return [json.loads(line) for line in text.splitlines()]


# ---------------------------------------------------------------------------
# shared datasets and runs (module scope keeps the suite fast)


@pytest.fixture(scope="module")
def expr_data(tmp_path_factory) -> Path:
    d = tmp_path_factory.mktemp("expr_data")
    conf = _cfg(d, "gen.json", {"out": str(d / "data"),
                                "gen": {"count": 30, "max_length": 20}})
    assert main(["expr", "gen", "--config", conf, "--seed", "5"]) == 0
    return d / "data"


@pytest.fixture(scope="module")
def jobsched_data(tmp_path_factory) -> Path:
    d = tmp_path_factory.mktemp("js_data")
    conf = _cfg(d, "gen.json", {
        "out": str(d / "data"),
        "gen": {"count": 30, "d": 2, "n_jobs": 30, "a_max": 20, "t_max": 15},
    })
    assert main(["jobsched", "gen", "--config", conf, "--seed", "3"]) == 0
    return d / "data"


@pytest.fixture(scope="module")
def vrp_data(tmp_path_factory) -> Path:
    d = tmp_path_factory.mktemp("vrp_data")
    conf = _cfg(d, "gen.json", {"out": str(d / "data"),
                                "gen": {"count": 30, "n_customers": 6, "capacity": 15}})
    assert main(["vrp", "gen", "--config", conf, "--seed", "4"]) == 0
    return d / "data"


def _train_config(data_dir: Path, out_dir: Path, epochs: int) -> dict:
    return {
        "out": str(out_dir),
        "dataset": str(data_dir),
        "encoder": ENC,
        "train": {"epochs": epochs, "batch_size": 4},
        "rewrite": {"max_iters": 6},
    }


@pytest.fixture(scope="module")
def expr_run(tmp_path_factory, expr_data) -> Path:
    d = tmp_path_factory.mktemp("expr_run")
    out = d / "run"
    conf = _cfg(d, "train.json", _train_config(expr_data, out, epochs=2))
    assert main(["expr", "train", "--config", conf, "--seed", "0"]) == 0
    return out


@pytest.fixture(scope="module")
def jobsched_run(tmp_path_factory, jobsched_data) -> Path:
    d = tmp_path_factory.mktemp("js_run")
    out = d / "run"
    conf = _cfg(d, "train.json", _train_config(jobsched_data, out, epochs=0))
    assert main(["jobsched", "train", "--config", conf, "--seed", "0"]) == 0
    return out


@pytest.fixture(scope="module")
def vrp_run(tmp_path_factory, vrp_data) -> Path:
    d = tmp_path_factory.mktemp("vrp_run")
    out = d / "run"
    conf = _cfg(d, "train.json", _train_config(vrp_data, out, epochs=0))
    assert main(["vrp", "train", "--config", conf, "--seed", "0"]) == 0
    return out


# ---------------------------------------------------------------------------
# argument and config plumbing


def test_config_file_missing(tmp_path):
    assert main(["expr", "gen", "--config", str(tmp_path / "nope.json")]) == 2


def test_config_not_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json", encoding="utf-8")
    assert main(["expr", "gen", "--config", str(path)]) == 2


def test_config_not_an_object(tmp_path):
    path = tmp_path / "list.json"
    path.write_text("[1, 2]", encoding="utf-8")
    assert main(["expr", "gen", "--config", str(path)]) == 2


def test_config_unknown_top_level_key(tmp_path):
    conf = _cfg(tmp_path, "c.json", {"out": "x", "gen": {"count": 3}, "bogus": 1})
    assert main(["expr", "gen", "--config", conf]) == 2


def test_missing_output_directory(tmp_path):
    conf = _cfg(tmp_path, "c.json", {"gen": {"count": 3}})
    assert main(["expr", "gen", "--config", conf]) == 2


def test_threads_must_be_positive(tmp_path):
    conf = _cfg(tmp_path, "c.json", {"out": str(tmp_path / "d"), "gen": {"count": 3}})
    assert main(["expr", "gen", "--config", conf, "--threads", "0"]) == 2


def test_seed_flag_overrides_config_seed(tmp_path):
    a = _cfg(tmp_path, "a.json", {"out": str(tmp_path / "a"), "seed": 1,
                                  "gen": {"count": 10, "max_length": 20}})
    b = _cfg(tmp_path, "b.json", {"out": str(tmp_path / "b"), "seed": 5,
                                  "gen": {"count": 10, "max_length": 20}})
    assert main(["expr", "gen", "--config", a, "--seed", "5"]) == 0
    assert main(["expr", "gen", "--config", b]) == 0
    assert (tmp_path / "a/train.txt").read_bytes() == (tmp_path / "b/train.txt").read_bytes()
    assert json.loads((tmp_path / "a/manifest.json").read_text())["seed"] == 5


def test_out_flag_overrides_config_out(tmp_path):
    conf = _cfg(tmp_path, "c.json", {"out": str(tmp_path / "ignored"),
                                     "gen": {"count": 5, "max_length": 20}})
    assert main(["expr", "gen", "--config", conf, "--out", str(tmp_path / "used")]) == 0
    assert (tmp_path / "used/manifest.json").is_file()
    assert not (tmp_path / "ignored").exists()


def test_log_level_env_var(tmp_path, monkeypatch, capsys):
    conf = _cfg(tmp_path, "c.json", {"out": str(tmp_path / "d"),
                                     "gen": {"count": 5, "max_length": 20}})
    monkeypatch.setenv("REWRITEOPT_LOG", "quiet")
    assert main(["expr", "gen", "--config", conf]) == 0
    assert "wrote" not in capsys.readouterr().err
    monkeypatch.setenv("REWRITEOPT_LOG", "info")
    assert main(["expr", "gen", "--config", conf, "--out", str(tmp_path / "d2")]) == 0
    assert "wrote" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# dataset generation


def test_split_counts_are_eight_one_one():
    assert split_counts(1000) == (800, 100, 100)
    assert split_counts(30) == (24, 3, 3)
    assert split_counts(7) == (5, 0, 2)   # test split absorbs the remainder
    assert split_counts(1) == (0, 0, 1)
    with pytest.raises(ConfigError):
        split_counts(0)


def test_gen_expr_files_and_manifest(expr_data):
    manifest = json.loads((expr_data / "manifest.json").read_text())
    assert manifest["domain"] == "expr"
    assert manifest["seed"] == 5
    assert manifest["counts"] == {"train": 24, "valid": 3, "test": 3}
    assert manifest["files"] == {"train": "train.txt", "valid": "valid.txt",
                                 "test": "test.txt"}
    assert set(manifest["stats"]) == {"mean_length", "max_length", "mean_tree_size"}
    for split, n in manifest["counts"].items():
        lines = (expr_data / f"{split}.txt").read_text().splitlines()
        assert len(lines) == n
        for line in lines:
            assert print_expr(parse(line)) == line   # canonical on disk
            assert len(line) <= 20


def test_gen_same_seed_byte_identical(tmp_path):
    for sub in ("a", "b"):
        conf = _cfg(tmp_path, f"{sub}.json", {"out": str(tmp_path / sub),
                                              "gen": {"count": 12, "max_length": 20}})
        assert main(["expr", "gen", "--config", conf, "--seed", "9"]) == 0
    for name in ("train.txt", "valid.txt", "test.txt", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_gen_different_seed_differs(tmp_path):
    for sub, seed in (("a", 1), ("b", 2)):
        conf = _cfg(tmp_path, f"{sub}.json", {"out": str(tmp_path / sub),
                                              "gen": {"count": 12, "max_length": 20}})
        assert main(["expr", "gen", "--config", conf, "--seed", str(seed)]) == 0
    assert (tmp_path / "a/train.txt").read_bytes() != (tmp_path / "b/train.txt").read_bytes()


def test_gen_requires_count(tmp_path):
    conf = _cfg(tmp_path, "c.json", {"out": str(tmp_path / "d"), "gen": {}})
    assert main(["expr", "gen", "--config", conf]) == 2


def test_gen_rejects_unknown_param(tmp_path):
    conf = _cfg(tmp_path, "c.json", {"out": str(tmp_path / "d"),
                                     "gen": {"count": 5, "n_customers": 4}})
    assert main(["expr", "gen", "--config", conf]) == 2


def test_gen_jobsched_manifest_and_lines(jobsched_data):
    manifest = json.loads((jobsched_data / "manifest.json").read_text())
    assert manifest["domain"] == "jobsched"
    assert manifest["counts"] == {"train": 24, "valid": 3, "test": 3}
    # steady arrivals at rate 0.7 should show up in the summary statistics
    assert abs(manifest["stats"]["empirical_arrival_rate"] - 0.7) < 0.05
    for line in (jobsched_data / "train.jsonl").read_text().splitlines():
        obj = json.loads(line)
        assert obj["t_max"] == 15
        assert all({"id", "rho", "arrival", "duration"} <= set(j) for j in obj["jobs"])


def test_gen_vrp_manifest_and_lines(vrp_data):
    manifest = json.loads((vrp_data / "manifest.json").read_text())
    assert manifest["domain"] == "vrp"
    assert manifest["params"] == {"count": 30, "n_customers": 6, "capacity": 15}
    assert 1.0 <= manifest["stats"]["mean_demand"] <= 9.0
    for line in (vrp_data / "test.jsonl").read_text().splitlines():
        obj = json.loads(line)
        assert len(obj["nodes"]) == 7   # depot + 6 customers
        assert obj["nodes"][0]["demand"] == 0
        assert obj["capacity"] == 15


# ---------------------------------------------------------------------------
# training


def test_train_writes_metrics_and_checkpoint(expr_run):
    assert (expr_run / "checkpoint.json").is_file()
    header, rows = _read_csv(expr_run / "metrics.csv")
    assert header == METRICS_HEADER
    splits = [r[1] for r in rows]
    assert splits == ["valid", "train", "train", "valid", "best_valid"]
    assert [r[0] for r in rows[1:3]] == ["1", "2"]
    for row in rows:
        assert row[-1] == "0.0"   # wall_seconds is pinned when --threads 1
    for row in rows[1:3]:        # train rows carry losses and schedule values
        assert float(row[7]) == 1e-4
        assert float(row[8]) == 0.5
        region, rule, total = float(row[4]), float(row[5]), float(row[6])
        assert total == pytest.approx(rule + 10.0 * region)
    valid_rows = [r for r in rows if r[1] == "valid"]
    best = rows[-1]
    assert float(best[3]) == min(float(r[3]) for r in valid_rows)


def test_train_is_deterministic_across_runs(tmp_path, expr_data):
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        conf = _cfg(tmp_path, f"{sub}.json", _train_config(expr_data, out, epochs=2))
        assert main(["expr", "train", "--config", conf, "--seed", "0"]) == 0
        outs.append(out)
    a, b = outs
    assert (a / "metrics.csv").read_bytes() == (b / "metrics.csv").read_bytes()
    assert (a / "checkpoint.json").read_bytes() == (b / "checkpoint.json").read_bytes()


def test_train_zero_epochs(tmp_path, expr_data):
    out = tmp_path / "run"
    conf = _cfg(tmp_path, "t.json", _train_config(expr_data, out, epochs=0))
    assert main(["expr", "train", "--config", conf, "--seed", "0"]) == 0
    payload = ckpt.load_checkpoint(out / "checkpoint.json")
    assert payload["global_step"] == 0
    _, rows = _read_csv(out / "metrics.csv")
    assert [r[1] for r in rows] == ["valid", "best_valid"]


def test_train_resume_appends_metrics(tmp_path, expr_data):
    out = tmp_path / "run"
    conf = _cfg(tmp_path, "t.json", _train_config(expr_data, out, epochs=2))
    assert main(["expr", "train", "--config", conf, "--seed", "0"]) == 0
    first = _read_csv(out / "metrics.csv")[1]

    # "epochs" counts optimizer steps for this invocation; resuming continues
    # the epoch numbering from the checkpoint's global step.
    resumed = _train_config(expr_data, out, epochs=2)
    resumed["resume"] = True
    conf2 = _cfg(tmp_path, "t2.json", resumed)
    assert main(["expr", "train", "--config", conf2, "--seed", "0"]) == 0
    header, rows = _read_csv(out / "metrics.csv")
    assert header == METRICS_HEADER
    assert rows[: len(first)] == first          # original rows kept verbatim
    appended = rows[len(first):]
    assert appended[0][1] == "train" and appended[0][0] == "3"   # no repeated baseline
    assert [r[0] for r in appended if r[1] == "train"] == ["3", "4"]
    payload = ckpt.load_checkpoint(out / "checkpoint.json")
    assert payload["global_step"] == 4


def test_train_resume_without_checkpoint(tmp_path, expr_data):
    conf_obj = _train_config(expr_data, tmp_path / "run", epochs=1)
    conf_obj["resume"] = True
    conf = _cfg(tmp_path, "t.json", conf_obj)
    assert main(["expr", "train", "--config", conf, "--seed", "0"]) == 2


def test_train_resume_incompatible_encoder(tmp_path, expr_data, expr_run):
    conf_obj = _train_config(expr_data, tmp_path / "run", epochs=1)
    conf_obj["encoder"] = dict(ENC, hidden_size=32)
    conf_obj["resume"] = True
    conf_obj["checkpoint"] = str(expr_run / "checkpoint.json")
    conf = _cfg(tmp_path, "t.json", conf_obj)
    assert main(["expr", "train", "--config", conf, "--seed", "0"]) == 2


def test_train_rejects_unknown_train_key(tmp_path, expr_data):
    conf_obj = _train_config(expr_data, tmp_path / "run", epochs=1)
    conf_obj["train"]["bogus"] = 1
    conf = _cfg(tmp_path, "t.json", conf_obj)
    assert main(["expr", "train", "--config", conf, "--seed", "0"]) == 2


def test_train_missing_dataset_dir(tmp_path):
    conf = _cfg(tmp_path, "t.json", _train_config(tmp_path / "nowhere",
                                                  tmp_path / "run", epochs=1))
    assert main(["expr", "train", "--config", conf, "--seed", "0"]) == 2


def test_train_non_finite_loss_exits_4(tmp_path, expr_data, capsys):
    out = tmp_path / "run"
    conf = _cfg(tmp_path, "t.json", _train_config(expr_data, out, epochs=1))
    assert main(["expr", "train", "--config", conf, "--seed", "0"]) == 0

    # Forge a valid checkpoint whose value head emits astronomically large
    # scores: rollouts still run (equal scores sample uniformly) but the
    # squared critic error overflows to inf on the first batch.
    path = out / "checkpoint.json"
    store = ParamStore(np.random.default_rng(0))
    ExprModel(store, ENC_CFG)
    ckpt.restore_store(ckpt.load_checkpoint(path), store)
    store.get("expr.q.l1.b")[:] = 1e200
    ckpt.save_checkpoint(path, "expr", ENC_CFG, store)

    resumed = _train_config(expr_data, out, epochs=3)
    resumed["resume"] = True
    conf2 = _cfg(tmp_path, "t2.json", resumed)
    assert main(["expr", "train", "--config", conf2, "--seed", "0"]) == 4
    err = capsys.readouterr().err
    assert "numeric failure" in err
    assert "offending episode" in err


# ---------------------------------------------------------------------------
# checkpoint persistence


def test_restored_checkpoint_drives_live_model(tmp_path):
    """Parameters loaded from disk must reach a model built before the load."""
    e = parse("(v0 + 3) * (v1 - v1)")
    store_a = ParamStore(np.random.default_rng(1))
    model_a = ExprModel(store_a, ENC_CFG)
    scores_a = model_a.region_scores(e)
    ckpt.save_checkpoint(tmp_path / "c.json", "expr", ENC_CFG, store_a)

    store_b = ParamStore(np.random.default_rng(2))
    model_b = ExprModel(store_b, ENC_CFG)   # bound to store_b before the restore
    assert not np.allclose(model_b.region_scores(e), scores_a)
    ckpt.restore_store(ckpt.load_checkpoint(tmp_path / "c.json"), store_b)
    np.testing.assert_array_equal(model_b.region_scores(e), scores_a)


def test_checkpoint_round_trip_is_bit_exact(tmp_path, expr_run):
    payload = ckpt.load_checkpoint(expr_run / "checkpoint.json")
    store = ParamStore(np.random.default_rng(3))
    ExprModel(store, ENC_CFG)
    ckpt.restore_store(payload, store)
    ckpt.save_checkpoint(tmp_path / "again.json", "expr", ENC_CFG, store)
    assert (tmp_path / "again.json").read_bytes() == (
        expr_run / "checkpoint.json"
    ).read_bytes()


def test_corrupted_checkpoint_is_a_data_error(tmp_path, expr_data, expr_run):
    bad = tmp_path / "bad.json"
    payload = json.loads((expr_run / "checkpoint.json").read_text())
    payload["global_step"] = 99   # checksum no longer matches
    bad.write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")))
    conf = _cfg(tmp_path, "e.json", {"out": str(tmp_path / "out"),
                                     "dataset": str(expr_data),
                                     "checkpoint": str(bad)})
    assert main(["expr", "eval", "--config", conf, "--seed", "0"]) == 3


def test_checkpoint_domain_mismatch(tmp_path, vrp_data, expr_run):
    conf = _cfg(tmp_path, "e.json", {"out": str(tmp_path / "out"),
                                     "dataset": str(vrp_data),
                                     "checkpoint": str(expr_run / "checkpoint.json")})
    assert main(["vrp", "eval", "--config", conf, "--seed", "0"]) == 2


def test_missing_checkpoint_is_a_config_error(tmp_path, expr_data):
    conf = _cfg(tmp_path, "e.json", {"out": str(tmp_path / "out"),
                                     "dataset": str(expr_data),
                                     "checkpoint": str(tmp_path / "none.json")})
    assert main(["expr", "eval", "--config", conf, "--seed", "0"]) == 2


# ---------------------------------------------------------------------------
# evaluation


def test_eval_report_and_per_instance(tmp_path, expr_data, expr_run):
    out = tmp_path / "out"
    conf = _cfg(tmp_path, "e.json", {"out": str(out), "dataset": str(expr_data),
                                     "checkpoint": str(expr_run / "checkpoint.json")})
    assert main(["expr", "eval", "--config", conf, "--seed", "0"]) == 0
    report = _report(out)
    assert set(report) == {"command", "domain", "split", "seed", "count", "metric",
                           "mean_cost_before", "mean_cost_after", "mean_reduction",
                           "extras"}
    assert report["command"] == "eval"
    assert report["domain"] == "expr"
    assert report["split"] == "test"       # the default split
    assert report["metric"] == "expression_length"
    assert report["count"] == 3
    assert report["mean_reduction"] == pytest.approx(
        report["mean_cost_before"] - report["mean_cost_after"]
    )
    header, rows = _read_csv(out / "per_instance.csv")
    assert header == PER_INSTANCE_HEADER
    assert len(rows) == 3
    for row in rows:
        # the best state seen is returned, so cost can never increase
        assert float(row[2]) <= float(row[1])


def test_eval_explicit_split(tmp_path, expr_data, expr_run):
    out = tmp_path / "out"
    conf = _cfg(tmp_path, "e.json", {"out": str(out), "dataset": str(expr_data),
                                     "split": "valid",
                                     "checkpoint": str(expr_run / "checkpoint.json")})
    assert main(["expr", "eval", "--config", conf, "--seed", "0"]) == 0
    assert _report(out)["split"] == "valid"


def test_eval_missing_split_file(tmp_path, expr_data, expr_run):
    conf = _cfg(tmp_path, "e.json", {"out": str(tmp_path / "out"),
                                     "dataset": str(expr_data), "split": "bogus",
                                     "checkpoint": str(expr_run / "checkpoint.json")})
    assert main(["expr", "eval", "--config", conf, "--seed", "0"]) == 2


def test_eval_is_deterministic(tmp_path, expr_data, expr_run):
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        conf = _cfg(tmp_path, f"{sub}.json", {
            "out": str(out), "dataset": str(expr_data),
            "checkpoint": str(expr_run / "checkpoint.json")})
        assert main(["expr", "eval", "--config", conf, "--seed", "0"]) == 0
        outs.append(out)
    a, b = outs
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    assert (a / "per_instance.csv").read_bytes() == (b / "per_instance.csv").read_bytes()


def test_eval_vrp_reports_initial_route_mean(tmp_path, vrp_data, vrp_run):
    out = tmp_path / "out"
    conf = _cfg(tmp_path, "e.json", {"out": str(out), "dataset": str(vrp_data),
                                     "checkpoint": str(vrp_run / "checkpoint.json")})
    assert main(["vrp", "eval", "--config", conf, "--seed", "0"]) == 0
    report = _report(out)
    assert report["metric"] == "route_cost"
    assert report["extras"]["initial_route_mean"] == pytest.approx(
        report["mean_cost_before"]
    )


def test_eval_jobsched_smoke(tmp_path, jobsched_data, jobsched_run):
    out = tmp_path / "out"
    conf = _cfg(tmp_path, "e.json", {"out": str(out), "dataset": str(jobsched_data),
                                     "checkpoint": str(jobsched_run / "checkpoint.json"),
                                     "eval_rewrite": {"max_iters": 4}})
    assert main(["jobsched", "eval", "--config", conf, "--seed", "0"]) == 0
    report = _report(out)
    assert report["metric"] == "avg_slowdown"
    assert report["mean_cost_after"] <= report["mean_cost_before"]
    assert report["mean_cost_after"] >= 1.0   # slowdown can never drop below 1


# ---------------------------------------------------------------------------
# baselines


def test_baseline_expr_beam_widths(tmp_path, expr_data):
    means = {}
    for width in (1, 4):
        out = tmp_path / f"w{width}"
        conf = _cfg(tmp_path, f"w{width}.json", {
            "out": str(out), "dataset": str(expr_data), "split": "train",
            "baseline": {"name": "beam", "width": width, "max_steps": 8}})
        assert main(["expr", "baseline", "--config", conf, "--seed", "0"]) == 0
        report = _report(out)
        assert report["command"] == "baseline"
        assert report["extras"]["baseline"] == "beam"
        assert report["extras"]["width"] == width
        means[width] = report["mean_cost_after"]
    assert means[4] <= means[1]   # wider beams can only improve the search


def test_baseline_expr_fixpoint(tmp_path, expr_data):
    out = tmp_path / "out"
    conf = _cfg(tmp_path, "c.json", {"out": str(out), "dataset": str(expr_data),
                                     "split": "train", "baseline": {"name": "fixpoint"}})
    assert main(["expr", "baseline", "--config", conf, "--seed", "0"]) == 0
    report = _report(out)
    assert report["mean_cost_after"] <= report["mean_cost_before"]


def test_baseline_jobsched_orderings(tmp_path, jobsched_data):
    means = {}
    for name in ("ejf", "sjf", "sjf-offline"):
        out = tmp_path / name
        conf = _cfg(tmp_path, f"{name}.json", {
            "out": str(out), "dataset": str(jobsched_data), "split": "train",
            "baseline": {"name": name}})
        assert main(["jobsched", "baseline", "--config", conf, "--seed", "0"]) == 0
        report = _report(out)
        means[name] = report["mean_cost_after"]
        # cost_before is always the earliest-job-first schedule
        assert report["mean_cost_before"] == pytest.approx(means["ejf"])
    assert means["sjf-offline"] <= means["sjf"] < means["ejf"]


def test_baseline_vrp_heuristic_ordering(tmp_path, vrp_data):
    means = {}
    for name in ("nn", "cw-greedy", "sweep"):
        out = tmp_path / name
        conf = _cfg(tmp_path, f"{name}.json", {
            "out": str(out), "dataset": str(vrp_data), "split": "train",
            "baseline": {"name": name}})
        assert main(["vrp", "baseline", "--config", conf, "--seed", "0"]) == 0
        means[name] = _report(out)["mean_cost_after"]
    assert means["cw-greedy"] < means["nn"]
    assert means["sweep"] < means["nn"]


def test_baseline_vrp_randomized_deterministic_per_seed(tmp_path, vrp_data):
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        conf = _cfg(tmp_path, f"{sub}.json", {
            "out": str(out), "dataset": str(vrp_data), "split": "test",
            "baseline": {"name": "cw-randomized", "top_m": 3, "depth": 4}})
        assert main(["vrp", "baseline", "--config", conf, "--seed", "7"]) == 0
        outs.append(out)
    a, b = outs
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    report = _report(a)
    assert report["extras"] == {"baseline": "cw-randomized", "top_m": 3, "depth": 4}


def test_baseline_vrp_oracle_rejects_large_instances(tmp_path):
    gen = _cfg(tmp_path, "g.json", {"out": str(tmp_path / "data"),
                                    "gen": {"count": 10, "n_customers": 9,
                                            "capacity": 15}})
    assert main(["vrp", "gen", "--config", gen, "--seed", "0"]) == 0
    conf = _cfg(tmp_path, "c.json", {"out": str(tmp_path / "out"),
                                     "dataset": str(tmp_path / "data"),
                                     "baseline": {"name": "oracle"}})
    assert main(["vrp", "baseline", "--config", conf, "--seed", "0"]) == 3


def test_baseline_unknown_name(tmp_path, expr_data):
    conf = _cfg(tmp_path, "c.json", {"out": str(tmp_path / "out"),
                                     "dataset": str(expr_data),
                                     "baseline": {"name": "bogus"}})
    assert main(["expr", "baseline", "--config", conf, "--seed", "0"]) == 2


def test_baseline_rejects_stray_params(tmp_path, expr_data):
    conf = _cfg(tmp_path, "c.json", {"out": str(tmp_path / "out"),
                                     "dataset": str(expr_data),
                                     "baseline": {"name": "fixpoint", "width": 2}})
    assert main(["expr", "baseline", "--config", conf, "--seed", "0"]) == 2


def test_baseline_requires_name(tmp_path, expr_data):
    conf = _cfg(tmp_path, "c.json", {"out": str(tmp_path / "out"),
                                     "dataset": str(expr_data), "baseline": {}})
    assert main(["expr", "baseline", "--config", conf, "--seed", "0"]) == 2


# ---------------------------------------------------------------------------
# single-instance rewriting and replay


@pytest.fixture()
def expr_instance(tmp_path) -> str:
    path = tmp_path / "inst.txt"
    path.write_text("5 <= (max(v0, 3) + 3)\n", encoding="utf-8")
    return str(path)


def test_rewrite_greedy_from_checkpoint(tmp_path, expr_run, expr_instance):
    out = tmp_path / "out"
    conf = _cfg(tmp_path, "r.json", {"out": str(out), "instance": expr_instance,
                                     "checkpoint": str(expr_run / "checkpoint.json")})
    assert main(["expr", "rewrite", "--config", conf, "--seed", "0"]) == 0
    lines = _trace(out)
    assert lines[0]["type"] == "initial"
    assert lines[0]["state"] == "5 <= max(v0, 3) + 3"
    assert lines[0]["cost"] == 19.0
    assert lines[-1]["type"] == "final"
    assert lines[-1]["cost"] <= lines[0]["cost"]
    assert lines[-1]["steps"] == len(lines) - 2


def test_rewrite_replay_full_chain(tmp_path, expr_instance):
    out = tmp_path / "out"
    conf = _cfg(tmp_path, "r.json", {
        "out": str(out), "instance": expr_instance,
        "replay": [[0, 17], [0, 14], [4, 1], [0, 11]]})
    assert main(["expr", "rewrite", "--config", conf, "--seed", "0"]) == 0
    lines = _trace(out)
    assert [ln["type"] for ln in lines] == ["initial"] + ["step"] * 4 + ["final"]
    steps = lines[1:5]
    assert [s["rule_name"] for s in steps] == [
        "cmp-shift-const", "cmp-minmax-expand", "fold-cmp", "bool-identity"]
    assert [s["reward"] for s in steps] == [4.0, -2.0, 5.0, 11.0]
    assert all(s["q"] is None for s in steps)   # no policy ran
    assert steps[-1]["state_after"] == "1"
    final = lines[-1]
    assert final["state"] == "1"
    assert final["cost"] == 1.0
    assert final["initial_cost"] == 19.0
    # rewards telescope: they sum to the total cost drop of the walk
    assert sum(s["reward"] for s in steps) == final["initial_cost"] - final["terminal_cost"]


def test_rewrite_replay_keeps_best_state_on_uphill_walk(tmp_path, expr_instance):
    out = tmp_path / "out"
    conf = _cfg(tmp_path, "r.json", {"out": str(out), "instance": expr_instance,
                                     "replay": [[0, 17], [0, 14]]})
    assert main(["expr", "rewrite", "--config", conf, "--seed", "0"]) == 0
    final = _trace(out)[-1]
    assert final["state"] == "2 <= max(v0, 3)"   # best state, not the endpoint
    assert final["cost"] == 15.0
    assert final["terminal_cost"] == 17.0


def test_rewrite_replay_validation_errors(tmp_path, expr_instance):
    cases = [
        (3, 2),                 # not a list at all
        ([[0]], 2),             # not a pair
        ([[0, "x"]], 2),        # not integers
        ([[0, True]], 2),       # booleans are not rule indices
        ([[99, 0]], 3),         # no such region
        ([[0, 999]], 3),        # rule index out of range
        ([[0, 0]], 3),          # rule not applicable at that region
    ]
    for i, (replay, expected) in enumerate(cases):
        conf = _cfg(tmp_path, f"r{i}.json", {"out": str(tmp_path / f"o{i}"),
                                             "instance": expr_instance,
                                             "replay": replay})
        assert main(["expr", "rewrite", "--config", conf, "--seed", "0"]) == expected, (
            f"replay={replay!r}"
        )


def test_rewrite_missing_instance_file(tmp_path, expr_run):
    conf = _cfg(tmp_path, "r.json", {"out": str(tmp_path / "out"),
                                     "instance": str(tmp_path / "none.txt"),
                                     "checkpoint": str(expr_run / "checkpoint.json")})
    assert main(["expr", "rewrite", "--config", conf, "--seed", "0"]) == 2


def test_rewrite_unparseable_instance(tmp_path, expr_run):
    path = tmp_path / "inst.txt"
    path.write_text("v0 + )\n", encoding="utf-8")
    conf = _cfg(tmp_path, "r.json", {"out": str(tmp_path / "out"),
                                     "instance": str(path),
                                     "checkpoint": str(expr_run / "checkpoint.json")})
    assert main(["expr", "rewrite", "--config", conf, "--seed", "0"]) == 3


def test_rewrite_jobsched_instance(tmp_path, jobsched_run):
    path = tmp_path / "jobs.jsonl"
    path.write_text(
        '{"id": 0, "rho": [0.6, 0.15], "arrival": 0, "duration": 3}\n'
        '{"id": 1, "rho": [0.55, 0.12], "arrival": 1, "duration": 2}\n',
        encoding="utf-8",
    )
    out = tmp_path / "out"
    conf = _cfg(tmp_path, "r.json", {"out": str(out), "instance": str(path),
                                     "checkpoint": str(jobsched_run / "checkpoint.json"),
                                     "eval_rewrite": {"max_iters": 3}})
    assert main(["jobsched", "rewrite", "--config", conf, "--seed", "0"]) == 0
    lines = _trace(out)
    assert lines[0]["cost"] >= 1.0
    assert lines[-1]["cost"] <= lines[0]["cost"]


def test_rewrite_vrp_instance(tmp_path, vrp_run):
    inst = {"nodes": [{"x": 0.0, "y": 0.0, "demand": 0},
                      {"x": 0.3, "y": 0.4, "demand": 3},
                      {"x": 0.6, "y": 0.8, "demand": 4}],
            "capacity": 10}
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(inst) + "\n", encoding="utf-8")
    out = tmp_path / "out"
    conf = _cfg(tmp_path, "r.json", {"out": str(out), "instance": str(path),
                                     "checkpoint": str(vrp_run / "checkpoint.json"),
                                     "eval_rewrite": {"max_iters": 4}})
    assert main(["vrp", "rewrite", "--config", conf, "--seed", "0"]) == 0
    lines = _trace(out)
    assert lines[-1]["cost"] <= lines[0]["cost"]
