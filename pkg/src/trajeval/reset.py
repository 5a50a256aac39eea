"""
Reset planning and execution.

After a full pass over the benchmark, inverse tasks put the device back:
one job per task-level link, and one job per distinct app-level reset no
matter how many tasks share it.  ``None`` and ``Infeasible`` tasks add no
jobs.  A job counts as restored when all of its own conditions matched,
whether or not the agent also said it was finished.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .agents import AgentAdapter
from .evalengine import Outcome
from .metrics import TaskResult
from .runner import RunConfig, run_task
from .simenv import DeviceEnv
from .trajectory import ResetCategory, TaskSpec, Trajectory


class DanglingResetRef(LookupError):
    pass


@dataclass(frozen=True)
class ResetJob:
    reset_task_id: str
    category: ResetCategory
    serves: Tuple[str, ...]
    reset_spec: TaskSpec


@dataclass(frozen=True)
class EpochPlan:
    benchmark_order: Tuple[str, ...]
    jobs: Tuple[ResetJob, ...]


def plan_epoch(tasks: Sequence[TaskSpec], reset_specs: Mapping[str, TaskSpec]) -> EpochPlan:
    jobs: List[ResetJob] = []
    app_level: Dict[str, int] = {}
    for task in tasks:
        cat = task.reset_category
        if cat not in (ResetCategory.TASK_LEVEL, ResetCategory.APP_LEVEL):
            continue
        rid = task.reset_task_id
        if rid not in reset_specs:
            raise DanglingResetRef(f"{task.task_id}: reset task {rid!r} not found")
        if cat is ResetCategory.APP_LEVEL and rid in app_level:
            i = app_level[rid]
            job = jobs[i]
            jobs[i] = ResetJob(rid, cat, job.serves + (task.task_id,), job.reset_spec)
            continue
        if cat is ResetCategory.APP_LEVEL:
            app_level[rid] = len(jobs)
        jobs.append(ResetJob(rid, cat, (task.task_id,), reset_specs[rid]))
    return EpochPlan(tuple(t.task_id for t in tasks), tuple(jobs))


@dataclass(frozen=True)
class JobResult:
    job: ResetJob
    result: TaskResult
    trajectory: Optional[Trajectory] = None

    @property
    def outcome(self) -> Outcome:
        return self.result.outcome

    @property
    def restored(self) -> bool:
        return self.result.all_matched


@dataclass(frozen=True)
class ResetReport:
    jobs: Tuple[JobResult, ...]
    run: int = 0
    restored: Optional[bool] = None  # digest check, when a baseline was given

    @property
    def reset_sr(self) -> Optional[Fraction]:
        if not self.jobs:
            return None
        return Fraction(sum(j.restored for j in self.jobs), len(self.jobs))


def execute_resets(
    plan: EpochPlan,
    agent: AgentAdapter,
    env: DeviceEnv,
    config: RunConfig = RunConfig(),
    run: int = 0,
    baseline_digest: Optional[str] = None,
) -> ResetReport:
    """Run every job through the normal loop, noise off, in plan order."""
    results = []
    for job in plan.jobs:
        traj, result = run_task(job.reset_spec, agent, env, config, run=run, role="reset", noise=False)
        results.append(JobResult(job, result, traj))
    restored = None if baseline_digest is None else verify_restoration(env, baseline_digest)
    return ResetReport(tuple(results), run=run, restored=restored)


def capture_baseline(env: DeviceEnv) -> str:
    return env.persistent_digest()


def verify_restoration(env: DeviceEnv, baseline_digest: str) -> bool:
    return env.persistent_digest() == baseline_digest
