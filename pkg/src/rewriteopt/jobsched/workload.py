"""Workload generation for the single-machine scheduling domain.

A workload is a list of jobs, each with a resource demand vector, an integer
arrival timestep and an integer duration. At most one job arrives per
timestep; the arrival process runs over timesteps 0..a_max inclusive.
"""

from __future__ import annotations

import dataclasses
import json
from typing import Iterable

import numpy as np

_ARRIVAL_MODES = ("steady", "dynamic")
_RESOURCE_MODES = ("uniform", "non-uniform")
_LENGTH_MODES = ("short", "long", "non-uniform")

# Duration ranges (inclusive) for the length modes.
_SHORT_RANGE = (1, 3)
_LONG_RANGE = (10, 15)
# Fraction of short jobs in the bimodal "non-uniform" length mode.
_SHORT_FRACTION = 0.8

# Resource ranges for the two job classes.
_DOMINANT_RANGE = (0.5, 1.0)
_AUXILIARY_RANGE = (0.1, 0.2)


@dataclasses.dataclass(frozen=True)
class Job:
    """One job: demand vector, arrival timestep, duration in timesteps."""

    id: int
    rho: tuple[float, ...]
    arrival: int
    duration: int

    def __post_init__(self) -> None:
        if self.arrival < 0:
            raise ValueError(f"job {self.id}: arrival must be >= 0")
        if self.duration < 1:
            raise ValueError(f"job {self.id}: duration must be >= 1")
        for r in self.rho:
            if not 0.0 <= r <= 1.0:
                raise ValueError(f"job {self.id}: resource demand {r} outside [0, 1]")


@dataclasses.dataclass(frozen=True)
class WorkloadConfig:
    """Knobs for :func:`gen_workload`.

    ``n_jobs`` caps the sequence length; with the default arrival rate the
    cap rarely binds and sequences average ``arrival_rate * (a_max + 1)``
    jobs.
    """

    d: int = 2
    arrival_mode: str = "steady"
    arrival_rate: float = 0.7
    resource_mode: str = "non-uniform"
    length_mode: str = "non-uniform"
    n_jobs: int = 50
    t_max: int = 15
    a_max: int = 50

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.arrival_mode not in _ARRIVAL_MODES:
            raise ValueError(f"arrival_mode must be one of {_ARRIVAL_MODES}")
        if self.resource_mode not in _RESOURCE_MODES:
            raise ValueError(f"resource_mode must be one of {_RESOURCE_MODES}")
        if self.length_mode not in _LENGTH_MODES:
            raise ValueError(f"length_mode must be one of {_LENGTH_MODES}")
        if not 0.0 < self.arrival_rate <= 1.0:
            raise ValueError("arrival_rate must be in (0, 1]")
        if self.n_jobs < 1 or self.t_max < 1 or self.a_max < 0:
            raise ValueError("n_jobs and t_max must be >= 1, a_max >= 0")
        if self.length_mode == "long" and self.t_max < _LONG_RANGE[1]:
            raise ValueError("t_max too small for the long length mode")


def _draw_duration(cfg: WorkloadConfig, rng: np.random.Generator) -> int:
    if cfg.length_mode == "short":
        lo, hi = _SHORT_RANGE
    elif cfg.length_mode == "long":
        lo, hi = _LONG_RANGE
    elif rng.random() < _SHORT_FRACTION:
        lo, hi = _SHORT_RANGE
    else:
        lo, hi = _LONG_RANGE
    return int(rng.integers(lo, hi + 1))


def _draw_resources(cfg: WorkloadConfig, rng: np.random.Generator) -> tuple[float, ...]:
    d = cfg.d
    dom_lo, dom_hi = _DOMINANT_RANGE
    aux_lo, aux_hi = _AUXILIARY_RANGE
    if cfg.resource_mode == "uniform":
        # Each job demands a single class of resource across all dims.
        lo, hi = (dom_lo, dom_hi) if rng.random() < 0.5 else (aux_lo, aux_hi)
        return tuple(float(rng.uniform(lo, hi)) for _ in range(d))
    # Non-uniform: every dim is dominant or auxiliary on a fair coin, with at
    # least one of each class (so d=2 gives exactly one dominant dim).
    dom_mask = rng.random(d) < 0.5
    if not dom_mask.any():
        dom_mask[int(rng.integers(0, d))] = True
    if dom_mask.all() and d > 1:
        dom_mask[int(rng.integers(0, d))] = False
    rho = np.where(
        dom_mask, rng.uniform(dom_lo, dom_hi, d), rng.uniform(aux_lo, aux_hi, d)
    )
    return tuple(float(x) for x in rho)


def gen_workload(cfg: WorkloadConfig, rng: np.random.Generator) -> list[Job]:
    """Sample a job sequence.

    One Bernoulli arrival trial per timestep 0..a_max; the dynamic mode
    redraws the rate uniformly from (0, 1] at every timestep. Per-job demand
    vectors always fit the machine alone (every component is <= 1), so
    scheduling never rejects a job.
    """
    jobs: list[Job] = []
    for t in range(cfg.a_max + 1):
        if len(jobs) >= cfg.n_jobs:
            break
        if cfg.arrival_mode == "dynamic":
            rate = 1.0 - float(rng.random())  # uniform on (0, 1]
        else:
            rate = cfg.arrival_rate
        if rng.random() >= rate:
            continue
        duration = _draw_duration(cfg, rng)
        rho = _draw_resources(cfg, rng)
        jobs.append(Job(id=len(jobs), rho=rho, arrival=t, duration=duration))
    return jobs


def jobs_to_jsonl(jobs: Iterable[Job]) -> str:
    """One JSON object per line: {id, rho, arrival, duration}."""
    lines = []
    for job in jobs:
        lines.append(
            json.dumps(
                {
                    "id": job.id,
                    "rho": list(job.rho),
                    "arrival": job.arrival,
                    "duration": job.duration,
                },
                sort_keys=True,
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


def jobs_from_jsonl(text: str) -> list[Job]:
    jobs = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        jobs.append(
            Job(
                id=int(obj["id"]),
                rho=tuple(float(r) for r in obj["rho"]),
                arrival=int(obj["arrival"]),
                duration=int(obj["duration"]),
            )
        )
    return jobs
