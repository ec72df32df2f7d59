"""Schedules as value types: per-job begin times plus a usage timeline.

All operations treat schedules as immutable; anything that changes begin
times builds a new object. The machine runs every job it has capacity for
concurrently: at each timestep the demands of running jobs must sum to at
most 1 per resource dimension.
"""

from __future__ import annotations

import json
from typing import Optional, Sequence

import numpy as np

from rewriteopt.jobsched.workload import Job

# Sentinel node id for the machine in DAGs and rule spaces.
MACHINE = -1

# Capacity slack: demand sums involve at most a few dozen float additions,
# so genuine overloads exceed this while rounding noise never does.
CAP_EPS = 1e-12


def horizon_for(jobs: Sequence[Job], t_max: int) -> int:
    """Upper bound on any completion time reachable by our placements.

    Even a fully serialized schedule ends by max arrival + total work; the
    extra t_max rows keep embedding windows in-bounds.
    """
    if not jobs:
        return t_max + 2
    max_a = max(j.arrival for j in jobs)
    total = sum(j.duration for j in jobs)
    return max_a + total + t_max + 2


class Schedule:
    """Immutable assignment of begin times for a fixed job list."""

    __slots__ = ("jobs", "begins", "t_max", "usage")

    def __init__(
        self,
        jobs: Sequence[Job],
        begins: Sequence[int] | np.ndarray,
        t_max: int = 15,
        usage: Optional[np.ndarray] = None,
    ) -> None:
        self.jobs = tuple(jobs)
        arr = np.asarray(begins, dtype=np.int64).copy()
        if arr.shape != (len(self.jobs),):
            raise ValueError("begins must have one entry per job")
        self.t_max = int(t_max)
        if usage is None:
            usage = self._build_usage(arr)
        self.begins = arr
        self.usage = usage
        self.begins.flags.writeable = False
        self.usage.flags.writeable = False

    def _build_usage(self, begins: np.ndarray) -> np.ndarray:
        d = len(self.jobs[0].rho) if self.jobs else 1
        usage = np.zeros((horizon_for(self.jobs, self.t_max), d), dtype=np.float64)
        for job, b in zip(self.jobs, begins):
            usage[b : b + job.duration] += np.asarray(job.rho)
        return usage

    @property
    def n_jobs(self) -> int:
        return len(self.jobs)

    @property
    def d(self) -> int:
        return len(self.jobs[0].rho) if self.jobs else 1

    def completion(self, j: int) -> int:
        return int(self.begins[j]) + self.jobs[j].duration

    def completions(self) -> np.ndarray:
        durs = np.array([j.duration for j in self.jobs], dtype=np.int64)
        return self.begins + durs

    def slowdown(self, j: int) -> float:
        job = self.jobs[j]
        return (self.completion(j) - job.arrival) / job.duration

    def check(self) -> None:
        """Raise ValueError on any invariant violation."""
        for j, job in enumerate(self.jobs):
            if self.begins[j] < job.arrival:
                raise ValueError(f"job {job.id} begins before arrival")
        fresh = self._build_usage(self.begins)
        if fresh.shape != self.usage.shape or not np.allclose(
            fresh, self.usage, atol=1e-9
        ):
            raise ValueError("usage timeline inconsistent with begin times")
        if np.any(self.usage > 1.0 + CAP_EPS):
            t, d = np.unravel_index(int(np.argmax(self.usage)), self.usage.shape)
            raise ValueError(f"capacity exceeded at t={t}, dim={d}")

    def with_begins(self, begins: np.ndarray, usage: Optional[np.ndarray] = None) -> "Schedule":
        return Schedule(self.jobs, begins, self.t_max, usage=usage)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Schedule):
            return NotImplemented
        return self.jobs == other.jobs and bool(np.array_equal(self.begins, other.begins))

    def __hash__(self) -> int:
        return hash((self.jobs, self.begins.tobytes()))

    def __repr__(self) -> str:
        return f"Schedule(n_jobs={self.n_jobs}, begins={self.begins.tolist()})"


def earliest_feasible(
    usage: np.ndarray, rho: np.ndarray, duration: int, t_min: int
) -> int:
    """Smallest t >= t_min where ``rho`` fits on ``usage`` for ``duration`` steps."""
    horizon = usage.shape[0]
    if t_min + duration > horizon:
        raise ValueError("usage horizon too small for placement")
    bad = np.any(usage + rho > 1.0 + CAP_EPS, axis=1)
    if not bad.any():
        return t_min
    # Window sums over the conflict mask: zero means the whole window fits.
    cs = np.zeros(horizon + 1, dtype=np.int64)
    np.cumsum(bad, out=cs[1:])
    last = horizon - duration
    window = cs[duration : last + duration + 1] - cs[: last + 1]
    free = np.nonzero(window[t_min:] == 0)[0]
    if free.size == 0:
        raise ValueError("usage horizon too small for placement")
    return t_min + int(free[0])


def avg_slowdown(schedule: Schedule, jobs: Optional[Sequence[Job]] = None) -> float:
    """Mean of (completion - arrival) / duration over all jobs; >= 1 when feasible."""
    jobs = schedule.jobs if jobs is None else tuple(jobs)
    if not jobs:
        raise ValueError("avg_slowdown needs at least one job")
    total = 0.0
    for j, job in enumerate(jobs):
        total += (int(schedule.begins[j]) + job.duration - job.arrival) / job.duration
    return total / len(jobs)


def schedule_to_jsonl(schedule: Schedule) -> str:
    """One JSON object per line: {id, begin, end, slowdown}."""
    lines = []
    for j, job in enumerate(schedule.jobs):
        lines.append(
            json.dumps(
                {
                    "id": job.id,
                    "begin": int(schedule.begins[j]),
                    "end": schedule.completion(j),
                    "slowdown": schedule.slowdown(j),
                },
                sort_keys=True,
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")
