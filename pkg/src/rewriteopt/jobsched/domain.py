"""Domain adapter: schedules as rewriting states.

Regions are job indices; the rule space is the fixed-width candidate list
from `jobsched_rule_space` (2w slots), so rule k means "re-anchor the region
job after candidate k". Padded slots are inapplicable. Guard no-ops stay
applicable and simply earn zero reward.
"""

from __future__ import annotations

from typing import Any, Sequence

from rewriteopt.core.domain import Domain
from rewriteopt.jobsched.baselines import ejf_schedule
from rewriteopt.jobsched.dag import build_dag
from rewriteopt.jobsched.rewrite import jobsched_rule_space, rewrite_move
from rewriteopt.jobsched.schedule import Schedule, avg_slowdown
from rewriteopt.jobsched.workload import Job


class JobSchedDomain(Domain):
    name = "jobsched"

    def __init__(self, w: int = 10) -> None:
        if w < 1:
            raise ValueError("w must be >= 1")
        self.w = w

    def initial_state(self, jobs: Sequence[Job], t_max: int = 15) -> Schedule:
        return ejf_schedule(jobs, w=self.w, t_max=t_max)

    def region_set(self, state: Schedule) -> list[int]:
        return list(range(state.n_jobs))

    def rule_count(self, state: Schedule) -> int:
        return 2 * self.w

    def rule_candidates(self, state: Schedule, region: int) -> list:
        return jobsched_rule_space(region, build_dag(state), w=self.w)

    def applicable(self, state: Schedule, region: int, rule: int) -> bool:
        if not 0 <= rule < 2 * self.w:
            return False
        return self.rule_candidates(state, region)[rule] is not None

    def apply(self, state: Schedule, region: int, rule: int) -> Schedule:
        target = self.rule_candidates(state, region)[rule]
        if target is None:
            raise ValueError(f"rule {rule} is a padded slot for region {region}")
        return rewrite_move(state, region, target)

    def cost(self, state: Schedule) -> float:
        return avg_slowdown(state)

    def serialize_state(self, state: Schedule) -> Any:
        return {
            "jobs": [
                [j.id, list(j.rho), j.arrival, j.duration] for j in state.jobs
            ],
            "begins": state.begins.tolist(),
            "t_max": state.t_max,
        }

    def deserialize_state(self, obj: Any) -> Schedule:
        jobs = [
            Job(id=int(i), rho=tuple(float(x) for x in rho), arrival=int(a), duration=int(t))
            for i, rho, a, t in obj["jobs"]
        ]
        return Schedule(jobs, obj["begins"], t_max=int(obj["t_max"]))
