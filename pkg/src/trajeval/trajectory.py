"""
Tasks, steps and trajectories, and their on-disk formats.

Task file (JSON)::

    {"tasks": [TaskSpec, ...], "reset_tasks": [TaskSpec, ...]}

Trajectory file (JSON Lines), one record per line::

    {"record": "header", "task_id": ..., "seed": ..., "run": ..., "role": "benchmark"|"reset"}
    {"record": "step", "index": 0, "ui_xml": "...", "action": "click(...)", "noise": null}
    ...
    {"record": "footer", "termination": "FinishedAction"|"StepLimit", "error": null}
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .actions import Action, ActionKind, format_unified, parse_unified_action
from .condlang import ConditionError, ConditionSet, parse_condition_set, pretty_print
from .uitree import UiTree, parse_ui_tree

PathLike = Union[str, Path]


class TrajectoryIoError(OSError):
    pass


class SchemaError(ValueError):
    pass


class InvariantViolation(ValueError):
    pass


class Subset(str, Enum):
    BASE = "Base"
    LONG_TAIL = "LongTail"
    LONG_HORIZON = "LongHorizon"
    GUI_REASONING = "GuiReasoning"
    NOISE_ROBUST = "NoiseRobust"


class ExplorationAbility(str, Enum):
    ICON_UNDERSTANDING = "IconUnderstanding"
    HIDDEN_FUNCTION_DISCOVERY = "HiddenFunctionDiscovery"
    HIERARCHICAL_NAVIGATION = "HierarchicalNavigation"

    @property
    def weight(self) -> Fraction:
        return ABILITY_WEIGHTS[self]


ABILITY_WEIGHTS = {
    ExplorationAbility.ICON_UNDERSTANDING: Fraction(1, 2),
    ExplorationAbility.HIDDEN_FUNCTION_DISCOVERY: Fraction(1),
    ExplorationAbility.HIERARCHICAL_NAVIGATION: Fraction(2),
}


class ResetCategory(str, Enum):
    TASK_LEVEL = "TaskLevel"
    APP_LEVEL = "AppLevel"
    NONE = "None"
    INFEASIBLE = "Infeasible"


class Termination(str, Enum):
    FINISHED_ACTION = "FinishedAction"
    STEP_LIMIT = "StepLimit"


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    app_id: str
    instruction: str
    subset: Subset
    golden_steps: int
    condition: ConditionSet
    exploration_abilities: Tuple[ExplorationAbility, ...] = ()
    reset_category: ResetCategory = ResetCategory.NONE
    reset_task_id: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "subset", Subset(self.subset))
        object.__setattr__(self, "reset_category", ResetCategory(self.reset_category))
        object.__setattr__(
            self,
            "exploration_abilities",
            tuple(ExplorationAbility(a) for a in self.exploration_abilities),
        )
        if isinstance(self.golden_steps, bool) or not isinstance(self.golden_steps, int) or self.golden_steps < 1:
            raise InvariantViolation(f"{self.task_id}: golden_steps must be a positive integer")
        linked = self.reset_category in (ResetCategory.TASK_LEVEL, ResetCategory.APP_LEVEL)
        if linked and not self.reset_task_id:
            raise InvariantViolation(f"{self.task_id}: {self.reset_category.value} reset needs reset_task_id")
        if not linked and self.reset_task_id:
            raise InvariantViolation(f"{self.task_id}: {self.reset_category.value} tasks carry no reset_task_id")

    @property
    def exploration_weight(self) -> Fraction:
        return sum((a.weight for a in self.exploration_abilities), Fraction(0))

    def step_limit(self, multiplier: Union[int, Fraction] = 3) -> int:
        return math.ceil(Fraction(multiplier) * self.golden_steps)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "task_id": self.task_id,
            "app_id": self.app_id,
            "instruction": self.instruction,
            "subset": self.subset.value,
            "golden_steps": self.golden_steps,
            "exploration_abilities": [a.value for a in self.exploration_abilities],
            "condition": pretty_print(self.condition),
            "reset_category": self.reset_category.value,
            "reset_task_id": self.reset_task_id,
        }


@dataclass(frozen=True)
class Step:
    index: int
    ui_xml: str
    action: Action
    noise: Optional[str] = None
    error: Optional[str] = None

    @cached_property
    def tree(self) -> UiTree:
        return parse_ui_tree(self.ui_xml)


@dataclass(frozen=True)
class Trajectory:
    task_id: str
    steps: Tuple[Step, ...]
    termination: Termination
    seed: Optional[int] = None
    run: int = 0
    role: str = "benchmark"
    error: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "termination", Termination(self.termination))
        self.validate()

    def validate(self, step_limit: Optional[int] = None) -> None:
        for i, step in enumerate(self.steps):
            if step.index != i:
                raise InvariantViolation(f"{self.task_id}: step {i} carries index {step.index}")
        if self.termination is Termination.FINISHED_ACTION:
            if not self.steps or self.steps[-1].action.kind is not ActionKind.FINISHED:
                raise InvariantViolation(f"{self.task_id}: FinishedAction termination without a finished step")
        if step_limit is not None and len(self.steps) > step_limit:
            raise InvariantViolation(f"{self.task_id}: {len(self.steps)} steps exceed limit {step_limit}")

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def noise_fired(self) -> Counter:
        return Counter(s.noise for s in self.steps if s.noise)


# ------------------------------------------------------------------ tasks

_TASK_FIELDS = {
    "task_id",
    "app_id",
    "instruction",
    "subset",
    "golden_steps",
    "exploration_abilities",
    "condition",
    "reset_category",
    "reset_task_id",
}


def task_from_dict(d: Mapping[str, Any]) -> TaskSpec:
    if not isinstance(d, Mapping):
        raise SchemaError("task entry must be an object")
    keys = set(d)
    if keys != _TASK_FIELDS:
        problems = []
        if _TASK_FIELDS - keys:
            problems.append(f"missing {sorted(_TASK_FIELDS - keys)}")
        if keys - _TASK_FIELDS:
            problems.append(f"unexpected {sorted(keys - _TASK_FIELDS)}")
        raise SchemaError(f"task {d.get('task_id', '?')}: {'; '.join(problems)}")
    try:
        condition = parse_condition_set(d["condition"])
    except ConditionError as exc:
        raise SchemaError(f"task {d['task_id']}: bad condition: {exc}") from exc
    try:
        return TaskSpec(
            task_id=d["task_id"],
            app_id=d["app_id"],
            instruction=d["instruction"],
            subset=Subset(d["subset"]),
            golden_steps=d["golden_steps"],
            condition=condition,
            exploration_abilities=tuple(ExplorationAbility(a) for a in d["exploration_abilities"]),
            reset_category=ResetCategory(d["reset_category"]),
            reset_task_id=d["reset_task_id"],
        )
    except ValueError as exc:
        if isinstance(exc, InvariantViolation):
            raise
        raise SchemaError(f"task {d['task_id']}: {exc}") from exc


@dataclass(frozen=True)
class TaskCorpus:
    tasks: Tuple[TaskSpec, ...]
    reset_tasks: Tuple[TaskSpec, ...] = ()

    @property
    def by_id(self) -> Dict[str, TaskSpec]:
        return {t.task_id: t for t in (*self.tasks, *self.reset_tasks)}

    @property
    def reset_specs(self) -> Dict[str, TaskSpec]:
        return {t.task_id: t for t in self.reset_tasks}


def validate_corpus(corpus: TaskCorpus) -> None:
    """Cross-task invariants: unique ids and resolvable reset links."""
    if not corpus.tasks:
        raise SchemaError("task list must be non-empty")
    seen = set()
    for t in (*corpus.tasks, *corpus.reset_tasks):
        if t.task_id in seen:
            raise InvariantViolation(f"duplicate task_id {t.task_id!r}")
        seen.add(t.task_id)
    reset_ids = {t.task_id for t in corpus.reset_tasks}
    for t in corpus.tasks:
        if t.reset_task_id and t.reset_task_id not in reset_ids:
            raise InvariantViolation(f"{t.task_id}: reset task {t.reset_task_id!r} not defined")
    for t in corpus.reset_tasks:
        if t.reset_category is not ResetCategory.NONE:
            raise InvariantViolation(f"reset task {t.task_id} must itself need no reset")


def _read_json(path: PathLike) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise TrajectoryIoError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from exc


def corpus_from_obj(doc: Any) -> TaskCorpus:
    if not isinstance(doc, Mapping) or "tasks" not in doc:
        raise SchemaError("task document must be an object with a 'tasks' array")
    extra = set(doc) - {"tasks", "reset_tasks"}
    if extra:
        raise SchemaError(f"unexpected top-level keys {sorted(extra)}")
    if not isinstance(doc["tasks"], list) or not doc["tasks"]:
        raise SchemaError("task list must be non-empty")
    corpus = TaskCorpus(
        tasks=tuple(task_from_dict(d) for d in doc["tasks"]),
        reset_tasks=tuple(task_from_dict(d) for d in doc.get("reset_tasks", [])),
    )
    validate_corpus(corpus)
    return corpus


def load_corpus(path: PathLike) -> TaskCorpus:
    return corpus_from_obj(_read_json(path))


def load_task_file(path: PathLike) -> List[TaskSpec]:
    return list(load_corpus(path).tasks)


def save_corpus(corpus: TaskCorpus, path: PathLike) -> None:
    doc = {
        "tasks": [t.to_dict() for t in corpus.tasks],
        "reset_tasks": [t.to_dict() for t in corpus.reset_tasks],
    }
    Path(path).write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


# ----------------------------------------------------------- trajectories

_HEADER_FIELDS = {"record", "task_id", "seed", "run", "role"}
_STEP_FIELDS = {"record", "index", "ui_xml", "action", "noise", "error"}
_STEP_IGNORED = {"screenshot_path"}
_FOOTER_FIELDS = {"record", "termination", "error"}


def _dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, allow_nan=False)


def trajectory_to_jsonl(t: Trajectory) -> str:
    lines = [_dumps({"record": "header", "task_id": t.task_id, "seed": t.seed, "run": t.run, "role": t.role})]
    for s in t.steps:
        lines.append(
            _dumps(
                {
                    "record": "step",
                    "index": s.index,
                    "ui_xml": s.ui_xml,
                    "action": format_unified(s.action),
                    "noise": s.noise,
                    "error": s.error,
                }
            )
        )
    lines.append(_dumps({"record": "footer", "termination": t.termination.value, "error": t.error}))
    return "\n".join(lines) + "\n"


def save_trajectory(t: Trajectory, path: PathLike) -> None:
    p = Path(path)
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(trajectory_to_jsonl(t), encoding="utf-8")
    except OSError as exc:
        raise TrajectoryIoError(f"cannot write {path}: {exc}") from exc


def _check_keys(rec: Mapping[str, Any], allowed: set, ignored: Iterable[str] = (), where: str = "") -> None:
    keys = set(rec) - set(ignored)
    if keys != allowed:
        raise SchemaError(
            f"{where}: expected fields {sorted(allowed)}, got {sorted(keys)}"
        )


def trajectory_from_records(records: Sequence[Mapping[str, Any]], where: str = "trajectory") -> Trajectory:
    if len(records) < 2:
        raise SchemaError(f"{where}: needs a header and a footer record")
    header, *body, footer = records
    if header.get("record") != "header" or footer.get("record") != "footer":
        raise SchemaError(f"{where}: first record must be a header and last a footer")
    _check_keys(header, _HEADER_FIELDS, where=f"{where} header")
    _check_keys(footer, _FOOTER_FIELDS, where=f"{where} footer")
    steps = []
    for rec in body:
        if rec.get("record") != "step":
            raise SchemaError(f"{where}: unexpected record {rec.get('record')!r}")
        _check_keys(rec, _STEP_FIELDS, _STEP_IGNORED, where=f"{where} step")
        if not isinstance(rec["index"], int) or not isinstance(rec["ui_xml"], str):
            raise SchemaError(f"{where}: bad step field types")
        steps.append(
            Step(
                index=rec["index"],
                ui_xml=rec["ui_xml"],
                action=parse_unified_action(rec["action"]),
                noise=rec["noise"],
                error=rec["error"],
            )
        )
    try:
        termination = Termination(footer["termination"])
    except ValueError:
        raise SchemaError(f"{where}: unknown termination {footer['termination']!r}") from None
    return Trajectory(
        task_id=header["task_id"],
        steps=tuple(steps),
        termination=termination,
        seed=header["seed"],
        run=header["run"],
        role=header["role"],
        error=footer["error"],
    )


def load_trajectory_file(path: PathLike) -> Trajectory:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise TrajectoryIoError(f"cannot read {path}: {exc}") from exc
    records = []
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}:{n}: invalid JSON: {exc}") from exc
    return trajectory_from_records(records, where=str(path))
