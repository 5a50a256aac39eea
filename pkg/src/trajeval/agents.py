"""
Agent adapter contract and scripted test agents.

An adapter is a black box: the harness hands it the current observation
XML, the task instruction and the history of ``(observation digest,
unified action)`` pairs, and gets back one raw model turn.  ``translator``
names the dialect used to turn that text into a unified action.
"""

from __future__ import annotations

import json
import random
from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Protocol, Sequence, Tuple, Union

from .actions import Action, format_unified, parse_unified_action
from .trajectory import TaskSpec

History = Tuple[Tuple[str, str], ...]
GoldenActions = Mapping[str, Sequence[Action]]


class AgentAdapter(Protocol):
    translator: str

    def start(self, task: TaskSpec) -> None: ...

    def act(self, observation: str, instruction: str, history: History) -> str: ...


def load_golden_actions(path: Union[str, Path]) -> Dict[str, List[Action]]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return {task_id: [parse_unified_action(a) for a in actions] for task_id, actions in doc.items()}


def _turn(action: Action, thought: str) -> str:
    return f"Thought: {thought}\nAction: {format_unified(action)}"


class ScriptedAgent:
    """Base class; subclasses implement :meth:`next_action`."""

    translator = "thought-action"

    def __init__(self):
        self.task: Optional[TaskSpec] = None

    def start(self, task: TaskSpec) -> None:
        self.task = task

    def act(self, observation: str, instruction: str, history: History) -> str:
        step = len(history)
        return _turn(self.next_action(observation, step), f"{type(self).__name__} step {step}")

    def next_action(self, observation: str, step: int) -> Action:
        raise NotImplementedError


class GoldenReplayer(ScriptedAgent):
    """Replays a task's golden action list, then declares the task finished."""

    def __init__(self, golden: GoldenActions):
        super().__init__()
        self.golden = golden

    def next_action(self, observation: str, step: int) -> Action:
        actions = self.golden[self.task.task_id]
        return actions[step] if step < len(actions) else Action.finished()


class EarlyStopper(ScriptedAgent):
    """Plays ``k`` steps (golden prefix when available, else ``wait()``), then finishes."""

    def __init__(self, k: int, golden: Optional[GoldenActions] = None):
        super().__init__()
        self.k = k
        self.golden = golden or {}

    def next_action(self, observation: str, step: int) -> Action:
        if step >= self.k:
            return Action.finished("done")
        actions = [a for a in self.golden.get(self.task.task_id, ()) if a.kind.value != "finished"]
        return actions[step] if step < len(actions) else Action.wait()


class Looper(ScriptedAgent):
    """Repeats one action forever; never finishes."""

    def __init__(self, action: Action):
        super().__init__()
        self.action = action

    def next_action(self, observation: str, step: int) -> Action:
        return self.action


class PopupBlindLooper(ScriptedAgent):
    """Cycles through the golden non-finished actions and never clicks a pop-up's close element."""

    def __init__(self, golden: GoldenActions):
        super().__init__()
        self.golden = golden

    def next_action(self, observation: str, step: int) -> Action:
        actions = [a for a in self.golden[self.task.task_id] if a.kind.value != "finished"]
        if not actions:
            return Action.wait()
        return actions[step % len(actions)]


class FlakyAgent(ScriptedAgent):
    """
    Succeeds on an attempt with probability ``reliability``.

    Each (task, attempt number) gets its own seeded coin, so the success
    pattern is reproducible and independent of the order tasks are run in.
    A successful attempt replays the golden actions; a failed one finishes
    immediately.
    """

    def __init__(self, golden: GoldenActions, reliability: float = 0.6, seed: int = 0):
        super().__init__()
        self.golden = golden
        self.reliability = reliability
        self.seed = seed
        self.attempts: Dict[str, int] = defaultdict(int)
        self.succeeding = False

    def coin(self, task_id: str, attempt: int) -> bool:
        return random.Random(f"{self.seed}:{task_id}:{attempt}").random() < self.reliability

    def start(self, task: TaskSpec) -> None:
        super().start(task)
        attempt = self.attempts[task.task_id]
        self.attempts[task.task_id] += 1
        self.succeeding = self.coin(task.task_id, attempt)

    def next_action(self, observation: str, step: int) -> Action:
        if not self.succeeding:
            return Action.finished("gave up")
        actions = self.golden[self.task.task_id]
        return actions[step] if step < len(actions) else Action.finished()


class RawScriptAgent:
    """Emits a fixed list of raw turns (then ``finished``); for exercising translation paths."""

    def __init__(self, turns: Sequence[str], translator: str = "thought-action"):
        self.turns = list(turns)
        self.translator = translator

    def start(self, task: TaskSpec) -> None:
        pass

    def act(self, observation: str, instruction: str, history: History) -> str:
        step = len(history)
        if step < len(self.turns):
            return self.turns[step]
        return "Action: finished(content='')"
