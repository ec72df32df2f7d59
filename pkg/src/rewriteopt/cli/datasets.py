"""Dataset generation, splits, and loading for the three domains.

File layout under a dataset directory:

- expressions: ``train.txt`` / ``valid.txt`` / ``test.txt``, one canonical
  expression string per line (UTF-8).
- scheduling: ``train.jsonl`` / ..., one workload per line as
  ``{"jobs": [{"id", "rho", "arrival", "duration"}, ...], "t_max": int}``.
- routing: ``train.jsonl`` / ..., one instance per line as
  ``{"nodes": [{"x", "y", "demand"}, ...], "capacity": int}``.

Plus ``manifest.json`` recording the domain, seed, generation parameters,
per-split counts, and summary statistics. Splits are 8/1/1:
``train = count * 8 // 10``, ``valid = count // 10``, and the remainder is
the test split.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from rewriteopt.cli.errors import ConfigError, DataError
from rewriteopt.exprs.ast import print_expr, tree_size
from rewriteopt.exprs.generator import random_expr
from rewriteopt.exprs.parser import ParseError, parse
from rewriteopt.jobsched.workload import Job, WorkloadConfig, gen_workload
from rewriteopt.vrp.instance import VrpInstance, gen_instance

SPLITS = ("train", "valid", "test")

_EXPR_GEN_KEYS = {"count", "max_depth", "max_length", "n_vars"}
_JOBSCHED_GEN_KEYS = {
    "count",
    "d",
    "arrival_mode",
    "arrival_rate",
    "resource_mode",
    "length_mode",
    "n_jobs",
    "t_max",
    "a_max",
}
_VRP_GEN_KEYS = {"count", "n_customers", "capacity"}


def split_counts(count: int) -> tuple[int, int, int]:
    """8/1/1 split; the test split absorbs the remainder."""
    if count < 1:
        raise ConfigError("gen count must be at least 1")
    n_train = count * 8 // 10
    n_valid = count // 10
    return n_train, n_valid, count - n_train - n_valid


def instance_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,)))
    )


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"unknown {where} keys: {unknown}")


def split_path(domain_name: str, data_dir, split: str) -> Path:
    ext = "txt" if domain_name == "expr" else "jsonl"
    return Path(data_dir) / f"{split}.{ext}"


def gen_dataset(domain_name: str, params: dict, seed: int, out_dir) -> dict:
    """Generate, split, and write a dataset; returns the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    count = int(params.get("count", 0))
    n_train, n_valid, n_test = split_counts(count)

    if domain_name == "expr":
        _check_keys(params, _EXPR_GEN_KEYS, "expr gen")
        max_depth = int(params.get("max_depth", 5))
        max_length = int(params.get("max_length", 30))
        n_vars = int(params.get("n_vars", 5))
        lines = []
        sizes = []
        for i in range(count):
            e = random_expr(
                instance_rng(seed, i),
                max_depth=max_depth,
                max_length=max_length,
                n_vars=n_vars,
            )
            lines.append(print_expr(e))
            sizes.append(tree_size(e))
        stats = {
            "mean_length": float(np.mean([len(s) for s in lines])),
            "max_length": int(max(len(s) for s in lines)),
            "mean_tree_size": float(np.mean(sizes)),
        }
        gen_params = {
            "count": count,
            "max_depth": max_depth,
            "max_length": max_length,
            "n_vars": n_vars,
        }
    elif domain_name == "jobsched":
        _check_keys(params, _JOBSCHED_GEN_KEYS, "jobsched gen")
        wl_kwargs = {k: v for k, v in params.items() if k != "count"}
        try:
            cfg = WorkloadConfig(**wl_kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad workload parameters: {exc}") from exc
        lines = []
        n_jobs_seen = []
        for i in range(count):
            jobs = gen_workload(cfg, instance_rng(seed, i))
            n_jobs_seen.append(len(jobs))
            lines.append(
                json.dumps(
                    {
                        "t_max": cfg.t_max,
                        "jobs": [
                            {
                                "id": j.id,
                                "rho": list(j.rho),
                                "arrival": j.arrival,
                                "duration": j.duration,
                            }
                            for j in jobs
                        ],
                    },
                    sort_keys=True,
                )
            )
        stats = {
            "empirical_arrival_rate": float(np.mean(n_jobs_seen) / (cfg.a_max + 1)),
            "mean_jobs_per_workload": float(np.mean(n_jobs_seen)),
        }
        gen_params = {"count": count}
        gen_params.update(
            {
                "d": cfg.d,
                "arrival_mode": cfg.arrival_mode,
                "arrival_rate": cfg.arrival_rate,
                "resource_mode": cfg.resource_mode,
                "length_mode": cfg.length_mode,
                "n_jobs": cfg.n_jobs,
                "t_max": cfg.t_max,
                "a_max": cfg.a_max,
            }
        )
    elif domain_name == "vrp":
        _check_keys(params, _VRP_GEN_KEYS, "vrp gen")
        n_customers = int(params.get("n_customers", 20))
        capacity = int(params.get("capacity", 30))
        lines = []
        demands = []
        for i in range(count):
            try:
                inst = gen_instance(n_customers, capacity, instance_rng(seed, i))
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            demands.extend(int(d) for d in inst.demands[1:])
            lines.append(json.dumps(inst.to_json(), sort_keys=True))
        stats = {"mean_demand": float(np.mean(demands))}
        gen_params = {"count": count, "n_customers": n_customers, "capacity": capacity}
    else:
        raise ConfigError(f"unknown domain {domain_name!r}")

    bounds = {
        "train": (0, n_train),
        "valid": (n_train, n_train + n_valid),
        "test": (n_train + n_valid, count),
    }
    files = {}
    for split in SPLITS:
        lo, hi = bounds[split]
        path = split_path(domain_name, out, split)
        path.write_text(
            "".join(line + "\n" for line in lines[lo:hi]), encoding="utf-8"
        )
        files[split] = path.name
    manifest = {
        "domain": domain_name,
        "seed": seed,
        "params": gen_params,
        "counts": {s: bounds[s][1] - bounds[s][0] for s in SPLITS},
        "files": files,
        "stats": stats,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return manifest


def _read_lines(path: Path) -> list[str]:
    if not path.is_file():
        raise ConfigError(f"dataset file {path} does not exist")
    return [
        line for line in path.read_text(encoding="utf-8").splitlines() if line.strip()
    ]


def load_expr_split(data_dir, split: str) -> list:
    """Parse a corpus file into expression trees."""
    out = []
    path = split_path("expr", data_dir, split)
    for n, line in enumerate(_read_lines(path), start=1):
        try:
            out.append(parse(line, strict_range=False))
        except ParseError as exc:
            raise DataError(f"{path}:{n}: {exc}") from exc
    return out


def load_jobsched_split(data_dir, split: str) -> list[tuple[list[Job], int]]:
    """Load workloads as (jobs, t_max) pairs."""
    out = []
    path = split_path("jobsched", data_dir, split)
    for n, line in enumerate(_read_lines(path), start=1):
        try:
            obj = json.loads(line)
            jobs = [
                Job(
                    id=int(j["id"]),
                    rho=tuple(float(r) for r in j["rho"]),
                    arrival=int(j["arrival"]),
                    duration=int(j["duration"]),
                )
                for j in obj["jobs"]
            ]
            out.append((jobs, int(obj.get("t_max", 15))))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DataError(f"{path}:{n}: bad workload line: {exc}") from exc
    return out


def load_vrp_split(data_dir, split: str) -> list[VrpInstance]:
    out = []
    path = split_path("vrp", data_dir, split)
    for n, line in enumerate(_read_lines(path), start=1):
        try:
            out.append(VrpInstance.from_json(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DataError(f"{path}:{n}: bad instance line: {exc}") from exc
    return out
