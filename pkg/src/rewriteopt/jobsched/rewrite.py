"""The local rewrite: move one job behind another job's completion.

Moving job j after job j' pins j's begin to j's new support (the completion
of j', or the arrival of j for the machine node), clears every job whose
placement interacts with the new interval, and re-places those at their
earliest feasible begins in topological order. A final repair pass re-places
any job left starting later than its arrival with nothing completing at its
begin; each repair strictly decreases that begin, so the pass terminates.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from rewriteopt.jobsched.dag import ScheduleDag
from rewriteopt.jobsched.schedule import MACHINE, Schedule, earliest_feasible

_DEFAULT_W = 10


def _supported(begins: np.ndarray, durs: np.ndarray, arrivals: np.ndarray, j: int) -> bool:
    if begins[j] == arrivals[j]:
        return True
    comps = begins + durs
    comps[j] = -1  # a job cannot support itself
    return bool(np.any(comps == begins[j]))


def rewrite_move(schedule: Schedule, j: int, jp: int) -> Schedule:
    """Return the schedule with job j re-anchored after node jp.

    jp is a job index or MACHINE. The two guard cases (the new support would
    precede j's arrival, or j already starts there) return the input object
    unchanged.
    """
    jobs = schedule.jobs
    n = len(jobs)
    if not 0 <= j < n:
        raise ValueError(f"unknown job id {j}")
    if jp != MACHINE and not 0 <= jp < n:
        raise ValueError(f"unknown target id {jp}")
    if j == jp:
        raise ValueError("cannot move a job after itself")

    job = jobs[j]
    old_b = int(schedule.begins[j])
    if jp == MACHINE:
        target = job.arrival
        if target == old_b:
            return schedule
    else:
        c_jp = schedule.completion(jp)
        if c_jp < job.arrival or c_jp == old_b:
            return schedule
        target = c_jp

    durs = np.array([x.duration for x in jobs], dtype=np.int64)
    arrivals = np.array([x.arrival for x in jobs], dtype=np.int64)
    rhos = [np.asarray(x.rho, dtype=np.float64) for x in jobs]
    begins = schedule.begins.copy()
    usage = schedule.usage.copy()

    new_end = target + job.duration
    usage[old_b : old_b + job.duration] -= rhos[j]

    # Jobs whose interval meets [target, new_end), plus any beginning exactly
    # at new_end (their support may shift with the move).
    comps = begins + durs
    window = [
        i
        for i in range(n)
        if i != j
        and ((begins[i] < new_end and comps[i] > target) or begins[i] == new_end)
    ]
    for i in window:
        usage[begins[i] : comps[i]] -= rhos[i]

    begins[j] = target
    usage[target:new_end] += rhos[j]

    for i in sorted(window, key=lambda i: (int(schedule.begins[i]), i)):
        b = earliest_feasible(usage, rhos[i], int(durs[i]), int(arrivals[i]))
        begins[i] = b
        usage[b : b + durs[i]] += rhos[i]

    # Repair pass: re-place jobs whose begin lost its supporting completion.
    while True:
        orphans = [
            i
            for i in range(n)
            if begins[i] > arrivals[i] and not _supported(begins, durs, arrivals, i)
        ]
        if not orphans:
            break
        i = min(orphans, key=lambda i: (int(begins[i]), i))
        usage[begins[i] : begins[i] + durs[i]] -= rhos[i]
        b = earliest_feasible(usage, rhos[i], int(durs[i]), int(arrivals[i]))
        if b >= begins[i]:
            raise AssertionError("repair failed to move an unsupported job earlier")
        begins[i] = b
        usage[b : b + durs[i]] += rhos[i]

    return schedule.with_begins(begins, usage=usage)


def jobsched_rule_space(
    j: int, dag: ScheduleDag, w: int = _DEFAULT_W
) -> list[Optional[int]]:
    """Candidate new supports for job j, zero-padded to length 2w.

    Candidates are the machine node plus every other job whose completion is
    no earlier than j's arrival, keyed by the begin time they would give j.
    The list keeps the w nearest candidates at or before j's current begin
    and the w nearest after it, in ascending key order; missing slots are
    None.
    """
    schedule = dag.schedule
    jobs = schedule.jobs
    n = schedule.n_jobs
    if not 0 <= j < n:
        raise ValueError(f"unknown job id {j}")
    b_j = int(schedule.begins[j])
    a_j = jobs[j].arrival
    cands: list[tuple[int, int, int]] = [(a_j, 0, MACHINE)]
    for i in range(n):
        if i == j:
            continue
        c_i = schedule.completion(i)
        if c_i >= a_j:
            cands.append((c_i, 1, i))
    cands.sort()
    earlier = [c for c in cands if c[0] <= b_j][-w:]
    later = [c for c in cands if c[0] > b_j][:w]
    slots: list[Optional[int]] = [c[2] for c in earlier + later]
    slots.extend([None] * (2 * w - len(slots)))
    return slots
