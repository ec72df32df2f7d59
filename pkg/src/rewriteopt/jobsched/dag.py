"""DAG view of a schedule: which completions support which begin times.

A job starting at its arrival hangs off the machine node; any other job must
start exactly when at least one job completes, and gets an edge from every
such job. Edges always point forward in time, so the graph is acyclic.
"""

from __future__ import annotations

import dataclasses

from rewriteopt.jobsched.schedule import MACHINE, Schedule


@dataclasses.dataclass(frozen=True)
class ScheduleDag:
    schedule: Schedule
    # parents[j] lists supporting node ids for job j; MACHINE appears alone.
    parents: tuple[tuple[int, ...], ...]
    # Job indices sorted by (begin, id): a topological order.
    topo: tuple[int, ...]

    @property
    def n_jobs(self) -> int:
        return len(self.parents)


def build_dag(schedule: Schedule) -> ScheduleDag:
    begins = schedule.begins
    comps = schedule.completions()
    parents = []
    for j, job in enumerate(schedule.jobs):
        if begins[j] == job.arrival:
            parents.append((MACHINE,))
            continue
        supp = tuple(i for i in range(schedule.n_jobs) if i != j and comps[i] == begins[j])
        if not supp:
            raise ValueError(
                f"job {job.id} begins at {int(begins[j])} after arrival "
                f"{job.arrival} with no completion at that time"
            )
        parents.append(supp)
    topo = tuple(sorted(range(schedule.n_jobs), key=lambda i: (int(begins[i]), i)))
    return ScheduleDag(schedule=schedule, parents=tuple(parents), topo=topo)
