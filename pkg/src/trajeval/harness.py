"""
Benchmark orchestration and offline re-evaluation.

Output layout of a run directory::

    run.json                           config echo, seed, task order, human labels
    trajectories/run{r}/{task}.jsonl   one file per benchmark trajectory
    resets/run{r}/{reset}.jsonl        reset job trajectories
    resets/run{r}/restoration.json     job list and digest check for the epoch
    report.json                        RunReport
    summary.csv                        subset x difficulty table

``report.json`` is a pure function of the other files, which is what
:func:`reevaluate` relies on.
"""

from __future__ import annotations

import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .agents import AgentAdapter
from .metrics import EmptyResultSet, TaskResult
from .reset import EpochPlan, JobResult, ResetJob, ResetReport, capture_baseline, plan_epoch, verify_restoration
from .report import RunReport
from .runner import RunConfig, evaluate_trajectory, run_task
from .simenv import DeviceEnv
from .trajectory import (
    ResetCategory,
    SchemaError,
    TaskCorpus,
    TaskSpec,
    Termination,
    Trajectory,
    load_corpus,
    load_trajectory_file,
    save_trajectory,
)

log = logging.getLogger(__name__)

__all__ = ["RunConfig", "run_task", "run_benchmark", "reevaluate", "UnknownTaskId", "write_run"]


class UnknownTaskId(LookupError):
    pass


def _as_corpus(tasks: Union[TaskCorpus, Sequence[TaskSpec]]) -> TaskCorpus:
    if isinstance(tasks, TaskCorpus):
        return tasks
    return TaskCorpus(tuple(tasks))


def _quarantined(task: TaskSpec, run: int, role: str, exc: BaseException) -> Tuple[Trajectory, TaskResult]:
    traj = Trajectory(
        task_id=task.task_id,
        steps=(),
        termination=Termination.STEP_LIMIT,
        run=run,
        role=role,
        error=f"{type(exc).__name__}: {exc}",
    )
    return traj, evaluate_trajectory(traj, task)


def _errors(trajectories: Sequence[Trajectory]) -> Tuple[Dict[str, Any], ...]:
    return tuple(
        {"run": t.run, "role": t.role, "task_id": t.task_id, "error": t.error} for t in trajectories if t.error
    )


class BenchmarkRun:
    """Everything a benchmark produces; ``report`` is derived from the rest."""

    def __init__(
        self,
        corpus: TaskCorpus,
        config: RunConfig,
        trajectories: List[Trajectory],
        results: List[TaskResult],
        resets: List[ResetReport],
        human_labels: Optional[Mapping[str, bool]] = None,
    ):
        self.corpus = corpus
        self.config = config
        self.trajectories = trajectories
        self.results = results
        self.resets = resets
        self.human_labels = dict(human_labels) if human_labels else None
        reset_trajs = [j.trajectory for rr in resets for j in rr.jobs if j.trajectory is not None]
        self.report = RunReport(
            results=tuple(results),
            resets=tuple(resets),
            config=config.echo(),
            seed=config.seed,
            errors=_errors([*trajectories, *reset_trajs]),
            human_labels=self.human_labels,
        )


def run_benchmark(
    tasks: Union[TaskCorpus, Sequence[TaskSpec]],
    adapter: AgentAdapter,
    env: Union[DeviceEnv, Callable[[], DeviceEnv]],
    config: RunConfig = RunConfig(),
    reset_agent: Optional[AgentAdapter] = None,
    human_labels: Optional[Mapping[str, bool]] = None,
) -> BenchmarkRun:
    """
    Run every task ``config.runs_per_task`` times, one epoch per run.

    Each epoch is the full task list in order followed by its reset plan
    (run by ``reset_agent``, defaulting to ``adapter``).  A task that raises
    is recorded as an empty ``StepLimit`` trajectory carrying the error and
    the batch carries on.  Writes files when ``config.output_dir`` is set.
    """
    corpus = _as_corpus(tasks)
    if not corpus.tasks:
        raise EmptyResultSet("no tasks to run")
    device = env() if callable(env) and not isinstance(env, DeviceEnv) else env
    reset_agent = reset_agent or adapter
    plan = plan_epoch(corpus.tasks, corpus.reset_specs)

    trajectories: List[Trajectory] = []
    results: List[TaskResult] = []
    resets: List[ResetReport] = []
    for run in range(config.runs_per_task):
        baseline = capture_baseline(device)
        for task in corpus.tasks:
            try:
                traj, result = run_task(task, adapter, device, config, run=run)
            except Exception as exc:
                log.warning("run %d task %s quarantined: %s", run, task.task_id, exc)
                traj, result = _quarantined(task, run, "benchmark", exc)
            trajectories.append(traj)
            results.append(result)
        resets.append(_run_resets(plan, reset_agent, device, config, run, baseline))

    out = BenchmarkRun(corpus, config, trajectories, results, resets, human_labels)
    if config.output_dir is not None:
        write_run(out, config.output_dir)
    return out


def _run_resets(
    plan: EpochPlan, agent: AgentAdapter, env: DeviceEnv, config: RunConfig, run: int, baseline: str
) -> ResetReport:
    jobs = []
    for job in plan.jobs:
        try:
            traj, result = run_task(job.reset_spec, agent, env, config, run=run, role="reset", noise=False)
        except Exception as exc:
            traj, result = _quarantined(job.reset_spec, run, "reset", exc)
        jobs.append(JobResult(job, result, traj))
    return ResetReport(tuple(jobs), run=run, restored=verify_restoration(env, baseline))


# ------------------------------------------------------------------ files


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


def write_run(run: BenchmarkRun, out_dir: Union[str, Path]) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "config": run.config.echo(),
        "seed": run.config.seed,
        "tasks": [t.task_id for t in run.corpus.tasks],
        "runs": run.config.runs_per_task,
        "human_labels": run.human_labels,
    }
    (out / "run.json").write_text(_dump(meta), encoding="utf-8")
    for t in run.trajectories:
        save_trajectory(t, out / "trajectories" / f"run{t.run}" / f"{t.task_id}.jsonl")
    for rr in run.resets:
        rdir = out / "resets" / f"run{rr.run}"
        rdir.mkdir(parents=True, exist_ok=True)
        for j in rr.jobs:
            save_trajectory(j.trajectory, rdir / f"{j.job.reset_task_id}.jsonl")
        restoration = {
            "jobs": [
                {"reset_task_id": j.job.reset_task_id, "category": j.job.category.value, "serves": list(j.job.serves)}
                for j in rr.jobs
            ],
            "restored": rr.restored,
        }
        (rdir / "restoration.json").write_text(_dump(restoration), encoding="utf-8")
    (out / "report.json").write_text(run.report.to_json(), encoding="utf-8")
    (out / "summary.csv").write_text(run.report.summary_csv(), encoding="utf-8")
    return out


def _config_from_echo(echo: Mapping[str, Any]) -> RunConfig:
    return RunConfig(step_multiplier=Fraction(echo.get("step_multiplier", "3")))


def reevaluate(
    source: Union[str, Path, Sequence[Union[str, Path]]],
    task_file: Union[str, Path, TaskCorpus],
    human_labels: Optional[Mapping[str, bool]] = None,
) -> RunReport:
    """
    Recompute a RunReport from stored trajectories alone.

    ``source`` is a run directory (reproduces its ``report.json`` exactly)
    or a list of benchmark trajectory files.  No device or agent is used.
    """
    corpus = task_file if isinstance(task_file, TaskCorpus) else load_corpus(task_file)
    known = corpus.by_id
    order = {t.task_id: i for i, t in enumerate(corpus.tasks)}

    meta: Dict[str, Any] = {}
    if isinstance(source, (str, Path)) and Path(source).is_dir():
        run_dir = Path(source)
        meta = json.loads((run_dir / "run.json").read_text(encoding="utf-8"))
        files = sorted((run_dir / "trajectories").glob("run*/*.jsonl"))
    else:
        run_dir = None
        files = [Path(source)] if isinstance(source, (str, Path)) else [Path(p) for p in source]

    config = _config_from_echo(meta.get("config", {}))
    trajectories = []
    for f in files:
        traj = load_trajectory_file(f)
        if traj.task_id not in order:
            raise UnknownTaskId(f"{f}: task {traj.task_id!r} is not in the task file")
        traj.validate(config.step_limit(known[traj.task_id]))
        trajectories.append(traj)
    trajectories.sort(key=lambda t: (t.run, order[t.task_id]))
    results = [evaluate_trajectory(t, known[t.task_id]) for t in trajectories]

    resets: List[ResetReport] = []
    reset_trajs: List[Trajectory] = []
    if run_dir is not None:
        reset_ids = corpus.reset_specs
        for r in range(meta.get("runs", 0)):
            rdir = run_dir / "resets" / f"run{r}"
            info = json.loads((rdir / "restoration.json").read_text(encoding="utf-8"))
            jobs = []
            for j in info["jobs"]:
                rid = j["reset_task_id"]
                if rid not in reset_ids:
                    raise UnknownTaskId(f"reset task {rid!r} is not in the task file")
                spec = reset_ids[rid]
                traj = load_trajectory_file(rdir / f"{rid}.jsonl")
                traj.validate(config.step_limit(spec))
                reset_trajs.append(traj)
                job = ResetJob(rid, ResetCategory(j["category"]), tuple(j["serves"]), spec)
                jobs.append(JobResult(job, evaluate_trajectory(traj, spec), traj))
            resets.append(ResetReport(tuple(jobs), run=r, restored=info["restored"]))

    if not results:
        raise EmptyResultSet("no trajectories to evaluate")
    labels = human_labels if human_labels is not None else meta.get("human_labels")
    return RunReport(
        results=tuple(results),
        resets=tuple(resets),
        config=meta.get("config", {}),
        seed=meta.get("seed"),
        errors=_errors([*trajectories, *reset_trajs]),
        human_labels=labels,
    )


def load_human_labels(path: Union[str, Path]) -> Dict[str, bool]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict) or not all(isinstance(v, bool) for v in doc.values()):
        raise SchemaError("human labels must be an object mapping task_id to true/false")
    return doc
