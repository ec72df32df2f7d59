"""Online job scheduling on a single multi-resource machine.

States are complete schedules of all arrived jobs; local rewrites move one
job behind another job's completion (or back to its arrival) and repair the
surrounding placements.
"""

from rewriteopt.jobsched.workload import (
    Job,
    WorkloadConfig,
    gen_workload,
    jobs_from_jsonl,
    jobs_to_jsonl,
)
from rewriteopt.jobsched.schedule import (
    CAP_EPS,
    MACHINE,
    Schedule,
    avg_slowdown,
    earliest_feasible,
    schedule_to_jsonl,
)
from rewriteopt.jobsched.baselines import (
    ejf_schedule,
    sjf_offline,
    sjf_schedule,
    sjfs_schedule,
)
from rewriteopt.jobsched.dag import ScheduleDag, build_dag
from rewriteopt.jobsched.rewrite import jobsched_rule_space, rewrite_move
from rewriteopt.jobsched.embed import job_embedding
from rewriteopt.jobsched.domain import JobSchedDomain

__all__ = [
    "CAP_EPS",
    "MACHINE",
    "Job",
    "JobSchedDomain",
    "Schedule",
    "ScheduleDag",
    "WorkloadConfig",
    "avg_slowdown",
    "build_dag",
    "earliest_feasible",
    "ejf_schedule",
    "gen_workload",
    "job_embedding",
    "jobs_from_jsonl",
    "jobs_to_jsonl",
    "jobsched_rule_space",
    "rewrite_move",
    "schedule_to_jsonl",
    "sjf_offline",
    "sjf_schedule",
    "sjfs_schedule",
]
