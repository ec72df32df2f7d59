"""Command implementations: gen, train, eval, baseline, rewrite.

Every command reads a JSON config object, takes an effective seed and an
output directory, and writes only into that directory. All emitted files
are deterministic functions of (config, seed) in single-threaded mode:
JSON is dumped with sorted keys, CSV rows use repr() of float64 values, and
wall-clock fields are written as 0.0 unless more than one thread is in use.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import time
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from rewriteopt.cli import datasets as ds
from rewriteopt.cli.checkpoint import (
    check_compatible,
    encoder_from_payload,
    load_checkpoint,
    restore_store,
    save_checkpoint,
)
from rewriteopt.cli.errors import ConfigError, DataError
from rewriteopt.core.domain import Domain, RewriteConfig, Trajectory, TrajectoryStep
from rewriteopt.core.episode import greedy_rewrite
from rewriteopt.exprs.ast import print_expr, tree_size
from rewriteopt.exprs.beam import beam_search_simplify, fixpoint_simplify
from rewriteopt.exprs.domain import ExprDomain
from rewriteopt.exprs.model import ExprModel
from rewriteopt.exprs.parser import ParseError, parse
from rewriteopt.exprs.rules import RULE_NAMES
from rewriteopt.jobsched.baselines import (
    ejf_schedule,
    sjf_offline,
    sjf_schedule,
    sjfs_schedule,
)
from rewriteopt.jobsched.domain import JobSchedDomain
from rewriteopt.jobsched.model import JobSchedModel
from rewriteopt.jobsched.schedule import avg_slowdown
from rewriteopt.jobsched.workload import jobs_from_jsonl
from rewriteopt.nn.layers import EncoderConfig
from rewriteopt.nn.params import ParamStore
from rewriteopt.train.loop import Dataset, EpochMetrics, TrainConfig, train
from rewriteopt.vrp.domain import VrpDomain
from rewriteopt.vrp.heuristics import cw_savings, sweep_heuristic
from rewriteopt.vrp.instance import VrpInstance
from rewriteopt.vrp.model import VrpModel
from rewriteopt.vrp.oracle import brute_force_optimal
from rewriteopt.vrp.route import nn_initial_route, route_cost

DOMAINS = ("expr", "jobsched", "vrp")

METRICS_HEADER = [
    "epoch",
    "split",
    "mean_cost_before",
    "mean_cost_after",
    "region_loss",
    "rule_loss",
    "total_loss",
    "lr",
    "p_continue",
    "wall_seconds",
]

PER_INSTANCE_HEADER = ["index", "cost_before", "cost_after", "steps", "wall_seconds"]

_METRIC_NAMES = {
    "expr": "expression_length",
    "jobsched": "avg_slowdown",
    "vrp": "route_cost",
}

_PARAMS_INIT_KEY = (987654321,)

_REWRITE_KEYS = {f.name for f in dataclasses.fields(RewriteConfig)}
_TRAIN_KEYS = {f.name for f in dataclasses.fields(TrainConfig)} - {"seed"}
_ENCODER_KEYS = {f.name for f in dataclasses.fields(EncoderConfig)}
_JOBSCHED_MODEL_KEYS = {"d_resources", "t_max", "w"}


# --------------------------------------------------------------------------
# config plumbing


def _as_dict(config: dict, key: str) -> dict:
    obj = config.get(key, {})
    if not isinstance(obj, dict):
        raise ConfigError(f"config key {key!r} must be an object")
    return obj


def _check_keys(obj: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"unknown {where} keys: {unknown}")


def encoder_from_config(obj: Optional[dict]) -> EncoderConfig:
    """Encoder widths from config; omitted fields fall back to desk scale
    when "desk" is set or the object is empty, else to full scale."""
    obj = dict(obj or {})
    _check_keys(obj, _ENCODER_KEYS | {"desk"}, "encoder")
    desk = bool(obj.pop("desk")) if "desk" in obj else not obj
    base = EncoderConfig.desk() if desk else EncoderConfig()
    try:
        return dataclasses.replace(base, **obj)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad encoder config: {exc}") from exc


def rewrite_from_config(obj: Optional[dict]) -> RewriteConfig:
    if obj is None:
        obj = {}
    _check_keys(obj, _REWRITE_KEYS, "rewrite")
    try:
        return RewriteConfig(**obj)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad rewrite config: {exc}") from exc


def train_from_config(obj: Optional[dict], seed: int) -> TrainConfig:
    if obj is None:
        obj = {}
    _check_keys(obj, _TRAIN_KEYS, "train")
    try:
        return TrainConfig(seed=seed, **obj)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad train config: {exc}") from exc


def model_meta_from_config(domain_name: str, config: dict) -> dict:
    obj = _as_dict(config, "model")
    if domain_name == "jobsched":
        _check_keys(obj, _JOBSCHED_MODEL_KEYS, "model")
        return {
            "d_resources": int(obj.get("d_resources", 2)),
            "t_max": int(obj.get("t_max", 15)),
            "w": int(obj.get("w", 10)),
        }
    _check_keys(obj, set(), "model")
    return {}


def build_domain(domain_name: str, meta: dict) -> Domain:
    if domain_name == "expr":
        return ExprDomain()
    if domain_name == "jobsched":
        return JobSchedDomain(w=meta.get("w", 10))
    if domain_name == "vrp":
        return VrpDomain()
    raise ConfigError(f"unknown domain {domain_name!r}")


def build_model(
    domain_name: str, store: ParamStore, encoder_cfg: EncoderConfig, meta: dict
):
    if domain_name == "expr":
        return ExprModel(store, encoder_cfg)
    if domain_name == "jobsched":
        return JobSchedModel(
            store,
            encoder_cfg,
            d_resources=meta.get("d_resources", 2),
            t_max=meta.get("t_max", 15),
            w=meta.get("w", 10),
        )
    if domain_name == "vrp":
        return VrpModel(store, encoder_cfg)
    raise ConfigError(f"unknown domain {domain_name!r}")


def _fresh_store(seed: int) -> ParamStore:
    rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=_PARAMS_INIT_KEY))
    )
    return ParamStore(rng)


def _require_path(config: dict, key: str) -> Path:
    if key not in config or not isinstance(config[key], str):
        raise ConfigError(f"config key {key!r} (a path) is required")
    return Path(config[key])


def _dataset_dir(config: dict) -> Path:
    path = _require_path(config, "dataset")
    if not path.is_dir():
        raise ConfigError(f"dataset directory {path} does not exist")
    return path


def load_states(domain_name: str, domain: Domain, data_dir, split: str) -> list:
    """Initial rewriting states for one dataset split."""
    if domain_name == "expr":
        return ds.load_expr_split(data_dir, split)
    if domain_name == "jobsched":
        out = []
        for jobs, t_max in ds.load_jobsched_split(data_dir, split):
            if not jobs:
                raise DataError(f"empty workload in {split} split")
            out.append(domain.initial_state(jobs, t_max=t_max))
        return out
    if domain_name == "vrp":
        return [
            domain.initial_state(inst) for inst in ds.load_vrp_split(data_dir, split)
        ]
    raise ConfigError(f"unknown domain {domain_name!r}")


def _load_model_from_checkpoint(domain_name: str, config: dict):
    """Build (domain, model, store, encoder, meta) from a checkpoint path."""
    path = _require_path(config, "checkpoint")
    if not path.is_file():
        raise ConfigError(f"checkpoint {path} does not exist")
    payload = load_checkpoint(path)
    if "encoder" in config or "model" in config:
        encoder_cfg = encoder_from_config(config.get("encoder"))
        meta = model_meta_from_config(domain_name, config)
        check_compatible(payload, domain_name, encoder_cfg, meta)
    else:
        if payload["domain"] != domain_name:
            raise ConfigError(
                f"checkpoint is for domain {payload['domain']!r}, not {domain_name!r}"
            )
        encoder_cfg = encoder_from_payload(payload)
        meta = payload.get("model_meta", {})
    domain = build_domain(domain_name, meta)
    store = _fresh_store(0)
    model = build_model(domain_name, store, encoder_cfg, meta)
    restore_store(payload, store)
    return domain, model, store, encoder_cfg, meta


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, obj) -> None:
    path.write_text(
        json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def _metrics_row(m: EpochMetrics) -> list[str]:
    return [
        str(m.epoch),
        m.split,
        _fmt(m.mean_cost_before),
        _fmt(m.mean_cost_after),
        _fmt(m.region_loss),
        _fmt(m.rule_loss),
        _fmt(m.total_loss),
        _fmt(m.lr),
        _fmt(m.p_continue),
        _fmt(m.wall_seconds),
    ]


# --------------------------------------------------------------------------
# commands


def cmd_gen(
    domain_name: str,
    config: dict,
    seed: int,
    out_dir: Path,
    n_threads: int,
    log: Callable[[str], None],
) -> None:
    params = _as_dict(config, "gen")
    if "count" not in params:
        raise ConfigError("gen config needs a 'count'")
    manifest = ds.gen_dataset(domain_name, params, seed, out_dir)
    log(
        f"wrote {manifest['counts']} to {out_dir} "
        f"(stats: {json.dumps(manifest['stats'], sort_keys=True)})"
    )


def cmd_train(
    domain_name: str,
    config: dict,
    seed: int,
    out_dir: Path,
    n_threads: int,
    log: Callable[[str], None],
) -> None:
    data_dir = _dataset_dir(config)
    encoder_cfg = encoder_from_config(config.get("encoder"))
    meta = model_meta_from_config(domain_name, config)
    domain = build_domain(domain_name, meta)
    train_cfg = train_from_config(config.get("train"), seed)
    rollout_cfg = rewrite_from_config(config.get("rewrite"))
    eval_cfg = (
        rewrite_from_config(config.get("eval_rewrite"))
        if "eval_rewrite" in config
        else rollout_cfg
    )
    store = _fresh_store(seed)
    model = build_model(domain_name, store, encoder_cfg, meta)

    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt_path = (
        Path(config["checkpoint"]) if "checkpoint" in config
        else out_dir / "checkpoint.json"
    )
    metrics_path = out_dir / "metrics.csv"
    resume = bool(config.get("resume", False))
    if resume:
        if not ckpt_path.is_file():
            raise ConfigError(f"cannot resume: checkpoint {ckpt_path} does not exist")
        payload = load_checkpoint(ckpt_path)
        check_compatible(payload, domain_name, encoder_cfg, meta)
        restore_store(payload, store)
        log(f"resumed from {ckpt_path} at step {store.global_step}")
    mode = "a" if resume and metrics_path.is_file() else "w"

    dataset = Dataset(
        train=load_states(domain_name, domain, data_dir, "train"),
        valid=load_states(domain_name, domain, data_dir, "valid"),
    )
    with open(metrics_path, mode, encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if mode == "w":
            writer.writerow(METRICS_HEADER)

        def on_row(m: EpochMetrics) -> None:
            writer.writerow(_metrics_row(m))
            fh.flush()

        def on_eval(step: int) -> None:
            save_checkpoint(ckpt_path, domain_name, encoder_cfg, store, meta)

        report = train(
            domain,
            model,
            store,
            dataset,
            train_cfg,
            rollout_cfg,
            eval_cfg=eval_cfg,
            n_threads=n_threads,
            on_row=on_row,
            on_eval=on_eval,
            log=log,
        )
    save_checkpoint(ckpt_path, domain_name, encoder_cfg, store, meta)
    if report.best_valid is not None:
        best = report.best_valid
        log(
            f"best held-out cost {best.mean_cost_after:.4f} "
            f"(from {best.mean_cost_before:.4f}) at step {best.epoch}"
        )
    log(f"wrote {ckpt_path} and {metrics_path}")


def _report(
    domain_name: str,
    command: str,
    split: str,
    seed: int,
    rows: list[list],
    extras: dict,
) -> dict:
    before = [r[1] for r in rows]
    after = [r[2] for r in rows]
    mean_before = float(np.mean(before)) if rows else 0.0
    mean_after = float(np.mean(after)) if rows else 0.0
    report = {
        "command": command,
        "domain": domain_name,
        "split": split,
        "seed": seed,
        "count": len(rows),
        "metric": _METRIC_NAMES[domain_name],
        "mean_cost_before": mean_before,
        "mean_cost_after": mean_after,
        "mean_reduction": mean_before - mean_after,
        "extras": extras,
    }
    return report


def cmd_eval(
    domain_name: str,
    config: dict,
    seed: int,
    out_dir: Path,
    n_threads: int,
    log: Callable[[str], None],
) -> None:
    data_dir = _dataset_dir(config)
    split = config.get("split", "test")
    domain, model, _store, _enc, _meta = _load_model_from_checkpoint(
        domain_name, config
    )
    eval_cfg = rewrite_from_config(config.get("eval_rewrite"))
    states = load_states(domain_name, domain, data_dir, split)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, s0 in enumerate(states):
        t0 = time.perf_counter()
        best_state, traj = greedy_rewrite(domain, model, s0, eval_cfg)
        wall = 0.0 if n_threads == 1 else time.perf_counter() - t0
        rows.append(
            [i, float(domain.cost(s0)), float(domain.cost(best_state)), len(traj), wall]
        )
    extras = {}
    if domain_name == "vrp":
        extras["initial_route_mean"] = (
            float(np.mean([r[1] for r in rows])) if rows else 0.0
        )
    report = _report(domain_name, "eval", split, seed, rows, extras)
    _write_json(out_dir / "report.json", report)
    _write_csv(
        out_dir / "per_instance.csv",
        PER_INSTANCE_HEADER,
        [[r[0], _fmt(r[1]), _fmt(r[2]), r[3], _fmt(r[4])] for r in rows],
    )
    log(
        f"eval over {len(rows)} {split} instances: "
        f"{report['mean_cost_before']:.4f} -> {report['mean_cost_after']:.4f}"
    )


def _expr_baseline(name: str, params: dict) -> Callable:
    if name == "fixpoint":
        _check_keys(params, {"name"}, "baseline")
        return lambda e, i: fixpoint_simplify(e)
    if name == "beam":
        _check_keys(params, {"name", "width", "max_steps"}, "baseline")
        width = int(params.get("width", 4))
        max_steps = int(params.get("max_steps", 12))
        return lambda e, i: beam_search_simplify(e, beam_width=width, max_steps=max_steps)
    raise ConfigError(f"unknown expr baseline {name!r}")


def _jobsched_baseline(name: str, params: dict, w: int) -> Callable:
    if name == "ejf":
        _check_keys(params, {"name"}, "baseline")
        return lambda jobs, t_max, i: ejf_schedule(jobs, w=w, t_max=t_max)
    if name == "sjf":
        _check_keys(params, {"name"}, "baseline")
        return lambda jobs, t_max, i: sjf_schedule(jobs, w=w, t_max=t_max)
    if name == "sjfs":
        _check_keys(params, {"name", "k"}, "baseline")
        k = int(params.get("k", 5))
        return lambda jobs, t_max, i: sjfs_schedule(jobs, w=w, k=k, t_max=t_max)
    if name == "sjf-offline":
        _check_keys(params, {"name"}, "baseline")
        return lambda jobs, t_max, i: sjf_offline(jobs, t_max=t_max)
    raise ConfigError(f"unknown jobsched baseline {name!r}")


def _vrp_baseline(name: str, params: dict, seed: int) -> Callable:
    if name == "nn":
        _check_keys(params, {"name"}, "baseline")
        return lambda inst, i: nn_initial_route(inst)
    if name == "cw-greedy":
        _check_keys(params, {"name"}, "baseline")
        return lambda inst, i: cw_savings(inst, mode="greedy")
    if name == "cw-randomized":
        _check_keys(params, {"name", "top_m", "depth"}, "baseline")
        top_m = int(params.get("top_m", 5))
        depth = int(params.get("depth", 5))
        return lambda inst, i: cw_savings(
            inst,
            mode="randomized",
            top_m=top_m,
            depth=depth,
            rng=ds.instance_rng(seed, i),
        )
    if name == "sweep":
        _check_keys(params, {"name"}, "baseline")
        return lambda inst, i: sweep_heuristic(inst, mode="basic")
    if name == "sweep-randomized":
        _check_keys(params, {"name", "restarts"}, "baseline")
        restarts = int(params.get("restarts", 5))
        return lambda inst, i: sweep_heuristic(
            inst, mode="randomized", restarts=restarts, rng=ds.instance_rng(seed, i)
        )
    if name == "oracle":
        _check_keys(params, {"name"}, "baseline")

        def run(inst, i):
            try:
                route, _cost = brute_force_optimal(inst)
            except ValueError as exc:
                raise DataError(str(exc)) from exc
            return route

        return run
    raise ConfigError(f"unknown vrp baseline {name!r}")


def cmd_baseline(
    domain_name: str,
    config: dict,
    seed: int,
    out_dir: Path,
    n_threads: int,
    log: Callable[[str], None],
) -> None:
    data_dir = _dataset_dir(config)
    split = config.get("split", "test")
    params = _as_dict(config, "baseline")
    if "name" not in params:
        raise ConfigError("baseline config needs a 'name'")
    name = params["name"]
    meta = model_meta_from_config(domain_name, config)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    if domain_name == "expr":
        run = _expr_baseline(name, params)
        exprs = ds.load_expr_split(data_dir, split)
        for i, e in enumerate(exprs):
            t0 = time.perf_counter()
            result = run(e, i)
            wall = 0.0 if n_threads == 1 else time.perf_counter() - t0
            rows.append(
                [i, float(len(print_expr(e))), float(len(print_expr(result))), 0, wall]
            )
    elif domain_name == "jobsched":
        w = meta.get("w", 10)
        run = _jobsched_baseline(name, params, w)
        for i, (jobs, t_max) in enumerate(ds.load_jobsched_split(data_dir, split)):
            if not jobs:
                raise DataError(f"empty workload in {split} split")
            t0 = time.perf_counter()
            result = run(jobs, t_max, i)
            wall = 0.0 if n_threads == 1 else time.perf_counter() - t0
            initial = avg_slowdown(ejf_schedule(jobs, w=w, t_max=t_max))
            rows.append([i, float(initial), float(avg_slowdown(result)), 0, wall])
    elif domain_name == "vrp":
        run = _vrp_baseline(name, params, seed)
        for i, inst in enumerate(ds.load_vrp_split(data_dir, split)):
            t0 = time.perf_counter()
            route = run(inst, i)
            wall = 0.0 if n_threads == 1 else time.perf_counter() - t0
            initial = route_cost(nn_initial_route(inst), inst)
            rows.append([i, float(initial), float(route_cost(route, inst)), 0, wall])
    else:
        raise ConfigError(f"unknown domain {domain_name!r}")
    extras = {"baseline": name}
    extras.update(
        {k: v for k, v in params.items() if k != "name"}
    )
    report = _report(domain_name, "baseline", split, seed, rows, extras)
    _write_json(out_dir / "report.json", report)
    _write_csv(
        out_dir / "per_instance.csv",
        PER_INSTANCE_HEADER,
        [[r[0], _fmt(r[1]), _fmt(r[2]), r[3], _fmt(r[4])] for r in rows],
    )
    log(
        f"baseline {name} over {len(rows)} {split} instances: "
        f"mean cost {report['mean_cost_after']:.4f}"
    )


def _load_instance(domain_name: str, domain: Domain, path: Path, meta: dict):
    if not path.is_file():
        raise ConfigError(f"instance file {path} does not exist")
    text = path.read_text(encoding="utf-8")
    lines = [line for line in text.splitlines() if line.strip()]
    if domain_name == "expr":
        if not lines:
            raise DataError(f"{path}: no expression found")
        try:
            return parse(lines[0], strict_range=False)
        except ParseError as exc:
            raise DataError(f"{path}: {exc}") from exc
    if domain_name == "jobsched":
        try:
            jobs = jobs_from_jsonl(text)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DataError(f"{path}: bad workload: {exc}") from exc
        if not jobs:
            raise DataError(f"{path}: workload has no jobs")
        return domain.initial_state(jobs, t_max=meta.get("t_max", 15))
    if domain_name == "vrp":
        if not lines:
            raise DataError(f"{path}: no instance found")
        try:
            return domain.initial_state(VrpInstance.from_json(json.loads(lines[0])))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DataError(f"{path}: bad instance: {exc}") from exc
    raise ConfigError(f"unknown domain {domain_name!r}")


def _forced_trajectory(domain, s0, moves: list) -> tuple:
    """Apply an explicit (region, rule) sequence, mirroring greedy_rewrite's
    return shape. Steps carry q_value/rule_logprob of nan (no policy ran)."""
    state = s0
    best_state, best_cost = s0, float(domain.cost(s0))
    steps = []
    for t, pair in enumerate(moves):
        if (
            not isinstance(pair, (list, tuple))
            or len(pair) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in pair)
        ):
            raise ConfigError(
                f"replay step {t} must be a [region, rule] pair of integers, got {pair!r}"
            )
        region, rule = pair
        if region not in domain.region_set(state):
            raise DataError(f"replay step {t}: {region} is not a region of the current state")
        if not (0 <= rule < domain.rule_count(state)):
            raise DataError(f"replay step {t}: rule {rule} out of range")
        if not domain.applicable(state, region, rule):
            raise DataError(f"replay step {t}: rule {rule} not applicable at region {region}")
        cost_before = float(domain.cost(state))
        snapshot = domain.serialize_state(state)
        state = domain.apply(state, region, rule)
        cost_after = float(domain.cost(state))
        steps.append(
            TrajectoryStep(
                state_snapshot=snapshot,
                region=region,
                rule=rule,
                reward=cost_before - cost_after,
                q_value=float("nan"),
                rule_logprob=float("nan"),
            )
        )
        if cost_after < best_cost:
            best_state, best_cost = state, cost_after
    traj = Trajectory(
        steps=steps,
        final_state=state,
        initial_cost=float(domain.cost(s0)),
        final_cost=float(domain.cost(state)),
    )
    return best_state, traj


def cmd_rewrite(
    domain_name: str,
    config: dict,
    seed: int,
    out_dir: Path,
    n_threads: int,
    log: Callable[[str], None],
) -> None:
    replay = config.get("replay")
    if replay is not None:
        if not isinstance(replay, list):
            raise ConfigError("replay must be a list of [region, rule] pairs")
        meta = model_meta_from_config(domain_name, config)
        domain = build_domain(domain_name, meta)
        instance_path = _require_path(config, "instance")
        s0 = _load_instance(domain_name, domain, instance_path, meta)
        best_state, traj = _forced_trajectory(domain, s0, replay)
    else:
        domain, model, _store, _enc, meta = _load_model_from_checkpoint(
            domain_name, config
        )
        instance_path = _require_path(config, "instance")
        s0 = _load_instance(domain_name, domain, instance_path, meta)
        eval_cfg = rewrite_from_config(config.get("eval_rewrite"))
        best_state, traj = greedy_rewrite(domain, model, s0, eval_cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [
        {
            "type": "initial",
            "state": domain.serialize_state(s0),
            "cost": float(domain.cost(s0)),
        }
    ]
    state = s0
    for t, step in enumerate(traj.steps):
        state = domain.apply(state, step.region, step.rule)
        entry = {
            "type": "step",
            "index": t,
            "region": step.region,
            "rule": step.rule,
            "reward": float(step.reward),
            "q": None if math.isnan(step.q_value) else float(step.q_value),
            "state_after": domain.serialize_state(state),
        }
        if domain_name == "expr":
            entry["rule_name"] = RULE_NAMES[step.rule]
            entry["length"] = len(print_expr(state))
            entry["tree_size"] = tree_size(state)
        lines.append(entry)
    lines.append(
        {
            "type": "final",
            "state": domain.serialize_state(best_state),
            "cost": float(domain.cost(best_state)),
            "terminal_cost": float(domain.cost(state)),
            "initial_cost": float(domain.cost(s0)),
            "steps": len(traj),
        }
    )
    trace_path = out_dir / "trace.jsonl"
    trace_path.write_text(
        "".join(json.dumps(obj, sort_keys=True) + "\n" for obj in lines),
        encoding="utf-8",
    )
    log(
        f"rewrote {instance_path.name}: cost {lines[0]['cost']:.4f} -> "
        f"{lines[-1]['cost']:.4f} in {len(traj)} steps ({trace_path})"
    )
