"""Rule-based success conditions, trajectory evaluation and mock devices for GUI agents."""

from .actions import Action, ActionKind, format_unified, parse_unified_action, translate_agent_output
from .condlang import eval_clause, eval_selector, parse_condition_set, pretty_print
from .evalengine import MatchReport, Outcome, classify_outcome, match_trajectory, sub_sr
from .harness import reevaluate, run_benchmark
from .metrics import Difficulty, TaskResult, agreement, pass_at_k, success_rate
from .noise import NoiseConfig, NoiseKind
from .reset import execute_resets, plan_epoch, verify_restoration
from .report import RunReport
from .runner import RunConfig, run_task
from .simenv import DeviceEnv, MockApp, load_apps
from .trajectory import TaskSpec, Trajectory, load_corpus, load_task_file, load_trajectory_file, save_trajectory
from .uitree import UiTree, parse_ui_tree

__version__ = "0.1.0"
