"""Construction baselines: EJF, SJF, SJF with k-lookahead, offline SJF.

The online policies replay time with a bounded pending queue: arrivals enter
the queue, jobs that fit start immediately, and whenever the queue holds more
than W jobs the policy must commit one right away (at its earliest feasible
begin, which may lie in the future).
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from rewriteopt.jobsched.schedule import (
    Schedule,
    earliest_feasible,
    horizon_for,
)
from rewriteopt.jobsched.workload import Job

_DEFAULT_W = 10


def _sjf_key(jobs: Sequence[Job]) -> Callable[[int], tuple]:
    return lambda i: (jobs[i].duration, jobs[i].arrival, jobs[i].id, i)


class _ReplayState:
    """Mutable cursor over an in-progress online replay."""

    __slots__ = ("jobs", "rhos", "order", "begins", "usage", "pending", "next_arr", "t", "comps")

    def __init__(self, jobs: Sequence[Job], t_max: int) -> None:
        self.jobs = tuple(jobs)
        d = len(jobs[0].rho)
        self.rhos = tuple(np.asarray(j.rho, dtype=np.float64) for j in jobs)
        self.order = sorted(range(len(jobs)), key=lambda i: (jobs[i].arrival, jobs[i].id, i))
        self.begins = np.full(len(jobs), -1, dtype=np.int64)
        self.usage = np.zeros((horizon_for(jobs, t_max), d), dtype=np.float64)
        self.pending: list[int] = []
        self.next_arr = 0
        self.t = 0
        self.comps: list[int] = []

    def clone(self) -> "_ReplayState":
        other = object.__new__(_ReplayState)
        other.jobs = self.jobs
        other.rhos = self.rhos
        other.order = self.order
        other.begins = self.begins.copy()
        other.usage = self.usage.copy()
        other.pending = list(self.pending)
        other.next_arr = self.next_arr
        other.t = self.t
        other.comps = list(self.comps)
        return other

    def fits_at(self, i: int, t: int) -> bool:
        dur = self.jobs[i].duration
        seg = self.usage[t : t + dur]
        return bool(np.all(seg + self.rhos[i] <= 1.0 + 1e-12))

    def commit(self, i: int, b: int) -> None:
        dur = self.jobs[i].duration
        self.begins[i] = b
        self.usage[b : b + dur] += self.rhos[i]
        self.comps.append(b + dur)

    def next_event(self) -> int:
        cand = [c for c in self.comps if c > self.t]
        if self.next_arr < len(self.jobs):
            cand.append(self.jobs[self.order[self.next_arr]].arrival)
        if not cand:
            raise RuntimeError("replay stalled with pending jobs")  # unreachable
        return min(cand)


# choose(state, candidates, forced) -> the job index to commit next.
_Chooser = Callable[[_ReplayState, list[int], bool], int]


def _run_online(st: _ReplayState, w: int, choose: _Chooser) -> None:
    jobs = st.jobs
    n = len(jobs)
    while True:
        while st.next_arr < n and jobs[st.order[st.next_arr]].arrival == st.t:
            st.pending.append(st.order[st.next_arr])
            st.next_arr += 1
        while True:
            fits = [i for i in st.pending if st.fits_at(i, st.t)]
            if not fits:
                break
            c = choose(st, fits, False)
            st.pending.remove(c)
            st.commit(c, st.t)
        while len(st.pending) > w:
            c = choose(st, st.pending, True)
            st.pending.remove(c)
            job = jobs[c]
            b = earliest_feasible(st.usage, st.rhos[c], job.duration, st.t)
            st.commit(c, b)
        if st.next_arr >= n and not st.pending:
            return
        st.t = st.next_event()


def _require_jobs(jobs: Sequence[Job]) -> None:
    if not jobs:
        raise ValueError("scheduling needs at least one job")


def ejf_schedule(jobs: Sequence[Job], w: int = _DEFAULT_W, t_max: int = 15) -> Schedule:
    """Commit jobs at earliest feasible begins in (arrival, id) order."""
    _require_jobs(jobs)
    st = _ReplayState(jobs, t_max)
    for i in st.order:
        job = jobs[i]
        b = earliest_feasible(st.usage, st.rhos[i], job.duration, job.arrival)
        st.commit(i, b)
    return Schedule(jobs, st.begins, t_max, usage=st.usage)


def sjf_schedule(jobs: Sequence[Job], w: int = _DEFAULT_W, t_max: int = 15) -> Schedule:
    """Always start the shortest queued job that fits right now."""
    _require_jobs(jobs)
    key = _sjf_key(jobs)

    def choose(st: _ReplayState, cands: list[int], forced: bool) -> int:
        return min(cands, key=key)

    st = _ReplayState(jobs, t_max)
    _run_online(st, w, choose)
    return Schedule(jobs, st.begins, t_max, usage=st.usage)


def _finish_sjf_slowdown(st: _ReplayState, w: int) -> float:
    key = _sjf_key(st.jobs)

    def choose(state: _ReplayState, cands: list[int], forced: bool) -> int:
        return min(cands, key=key)

    _run_online(st, w, choose)
    total = 0.0
    for i, job in enumerate(st.jobs):
        total += (int(st.begins[i]) + job.duration - job.arrival) / job.duration
    return total / len(st.jobs)


def sjfs_schedule(
    jobs: Sequence[Job], w: int = _DEFAULT_W, k: int = 5, t_max: int = 15
) -> Schedule:
    """SJF with search: try each of the k shortest candidates, finish the
    replay greedily, and commit whichever choice yields the lowest mean
    slowdown."""
    _require_jobs(jobs)
    if k < 1:
        raise ValueError("k must be >= 1")
    key = _sjf_key(jobs)

    def choose(st: _ReplayState, cands: list[int], forced: bool) -> int:
        short = sorted(cands, key=key)[:k]
        if len(short) == 1:
            return short[0]
        best_i = short[0]
        best_sd = np.inf
        for c in short:
            sim = st.clone()
            sim.pending.remove(c)
            if forced:
                job = sim.jobs[c]
                b = earliest_feasible(sim.usage, sim.rhos[c], job.duration, sim.t)
            else:
                b = sim.t
            sim.commit(c, b)
            sd = _finish_sjf_slowdown(sim, w)
            if sd < best_sd - 1e-12:
                best_sd = sd
                best_i = c
        return best_i

    st = _ReplayState(jobs, t_max)
    _run_online(st, w, choose)
    return Schedule(jobs, st.begins, t_max, usage=st.usage)


def sjf_offline(jobs: Sequence[Job], t_max: int = 15) -> Schedule:
    """Ignore the queue: place jobs in (duration, arrival, id) order at their
    earliest feasible begins. Still respects arrivals (begin >= arrival)."""
    _require_jobs(jobs)
    st = _ReplayState(jobs, t_max)
    for i in sorted(range(len(jobs)), key=_sjf_key(jobs)):
        job = jobs[i]
        b = earliest_feasible(st.usage, st.rhos[i], job.duration, job.arrival)
        st.commit(i, b)
    return Schedule(jobs, st.begins, t_max, usage=st.usage)
