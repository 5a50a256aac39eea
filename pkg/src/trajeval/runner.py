"""The single-step trajectory loop: observe, act, translate, execute."""

from __future__ import annotations

import logging
import math
import time
import zlib
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from .actions import Action, ActionKind, ActionParseError, format_unified, translate_agent_output
from .agents import AgentAdapter
from .evalengine import classify_outcome, match_trajectory, sub_sr
from .metrics import TaskResult, task_difficulty
from .noise import OFF, NoiseConfig, NoiseInjector
from .simenv import DeviceEnv
from .trajectory import Step, Subset, TaskSpec, Termination, Trajectory
from .uitree import digest_xml

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    step_multiplier: Fraction = Fraction(3)
    # Pause after each executed action; honoured only by live devices.
    wait_ms: int = 0
    noise: NoiseConfig = OFF
    # Subsets whose tasks run with noise; the rest always run clean.
    noise_subsets: Tuple[Subset, ...] = (Subset.NOISE_ROBUST,)
    runs_per_task: int = 1
    output_dir: Optional[Path] = None

    def __post_init__(self):
        m = Fraction(self.step_multiplier)
        if m <= 0:
            raise ValueError("step_multiplier must be positive")
        object.__setattr__(self, "step_multiplier", m)
        if self.wait_ms < 0:
            raise ValueError("wait_ms must be non-negative")
        if self.runs_per_task < 1:
            raise ValueError("runs_per_task must be >= 1")
        object.__setattr__(self, "noise_subsets", tuple(Subset(s) for s in self.noise_subsets))

    @property
    def seed(self) -> int:
        return self.noise.seed

    def step_limit(self, task: TaskSpec) -> int:
        return math.ceil(self.step_multiplier * task.golden_steps)

    def echo(self) -> Dict[str, Any]:
        n = self.noise
        return {
            "step_multiplier": f"{self.step_multiplier.numerator}/{self.step_multiplier.denominator}",
            "wait_ms": self.wait_ms,
            "noise": {
                "probability": f"{n.probability.numerator}/{n.probability.denominator}",
                "enabled_types": [k.value for k in n.enabled_types],
                "seed": n.seed,
            },
            "noise_subsets": [s.value for s in self.noise_subsets],
            "runs_per_task": self.runs_per_task,
        }


def derive_seed(base: int, run: int, task_id: str) -> int:
    return zlib.crc32(f"{base}:{run}:{task_id}".encode("utf-8"))


def evaluate_trajectory(traj: Trajectory, task: TaskSpec) -> TaskResult:
    report = match_trajectory(traj, task.condition)
    return TaskResult(
        task_id=task.task_id,
        outcome=classify_outcome(traj, report),
        sub_sr=sub_sr(report),
        steps_taken=len(traj.steps),
        golden_steps=task.golden_steps,
        subset=task.subset,
        difficulty=task_difficulty(task.subset, task.golden_steps, task.exploration_abilities),
        noise_types_fired=dict(sorted(traj.noise_fired.items())),
        run=traj.run,
        clause_hits=report.clause_hits,
        error=traj.error,
    )


def run_task(
    task: TaskSpec,
    adapter: AgentAdapter,
    env: DeviceEnv,
    config: RunConfig = RunConfig(),
    run: int = 0,
    role: str = "benchmark",
    noise: bool = True,
) -> Tuple[Trajectory, TaskResult]:
    """
    Drive one task to completion and evaluate it.

    The device is positioned at the task app's initial page first.  The loop
    stops on a ``finished`` action or at the step limit.  Output that cannot
    be translated burns the step as a ``wait()`` tagged with the error; an
    adapter exception truncates the trajectory (termination ``StepLimit``).
    """
    env.launch(task.app_id)
    noisy = noise and config.noise.enabled and task.subset in config.noise_subsets
    seed = derive_seed(config.seed, run, task.task_id) if noisy else None
    injector = NoiseInjector(config.noise if noisy else OFF, seed or 0)
    limit = config.step_limit(task)
    adapter.start(task)

    steps = []
    history = []
    termination = Termination.STEP_LIMIT
    failure: Optional[str] = None
    for i in range(limit):
        obs = injector.observe(env)
        try:
            raw = adapter.act(obs, task.instruction, tuple(history))
        except Exception as exc:  # adapters are black boxes
            failure = f"AdapterFailure: {type(exc).__name__}: {exc}"
            log.warning("%s: %s", task.task_id, failure)
            break
        error = None
        try:
            action = translate_agent_output(raw, adapter.translator)
        except ActionParseError as exc:
            action, error = Action.wait(), f"untranslatable: {exc}"
        if action.kind is ActionKind.FINISHED:
            steps.append(Step(i, obs, action, None, error))
            termination = Termination.FINISHED_ACTION
            break
        tag = injector.step(i, action, env)
        if config.wait_ms and getattr(env, "live", False):
            time.sleep(config.wait_ms / 1000)
        steps.append(Step(i, obs, action, tag.value if tag else None, error))
        history.append((digest_xml(obs), format_unified(action)))

    traj = Trajectory(
        task_id=task.task_id,
        steps=tuple(steps),
        termination=termination,
        seed=seed,
        run=run,
        role=role,
        error=failure,
    )
    return traj, evaluate_trajectory(traj, task)
