"""Fixed-width job feature vectors for the scheduling encoder."""

from __future__ import annotations

import numpy as np

from rewriteopt.jobsched.schedule import MACHINE, Schedule


def job_embedding(j: int, schedule: Schedule) -> np.ndarray:
    """Length D*(t_max+1)+1: own demand, usage rows while running (zero-padded
    out to t_max rows), then the job's current slowdown. The machine node
    embeds as the zero vector."""
    d = schedule.d
    t_max = schedule.t_max
    size = d * (t_max + 1) + 1
    if j == MACHINE:
        return np.zeros(size, dtype=np.float64)
    if not 0 <= j < schedule.n_jobs:
        raise ValueError(f"unknown job id {j}")
    job = schedule.jobs[j]
    b = int(schedule.begins[j])
    out = np.zeros(size, dtype=np.float64)
    out[:d] = job.rho
    rows = schedule.usage[b : b + job.duration]
    out[d : d + d * job.duration] = rows.reshape(-1)
    out[-1] = schedule.slowdown(j)
    return out
