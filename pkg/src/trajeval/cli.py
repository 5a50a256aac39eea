"""Command line: run, eval, reset, report, validate."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import List, Optional, Sequence

from .actions import Action
from .agents import EarlyStopper, FlakyAgent, GoldenReplayer, Looper, PopupBlindLooper, load_golden_actions
from .harness import load_human_labels, reevaluate, run_benchmark
from .metrics import EmptyResultSet
from .noise import NoiseConfig, NoiseKind
from .reset import capture_baseline, execute_resets, plan_epoch
from .report import summary_csv
from .runner import RunConfig, run_task
from .simenv import AppDefinitionError, DeviceEnv, load_apps
from .trajectory import InvariantViolation, ResetCategory, SchemaError, TaskCorpus, TrajectoryIoError, load_corpus
from .evalengine import Outcome

log = logging.getLogger("trajeval")

AGENTS = ("golden", "early-stopper", "flaky", "looper", "popup-blind")
EXIT_CONFIG = 2


def bundled(rel: str) -> Path:
    return Path(str(resources.files("trajeval").joinpath("data", rel)))


class ConfigError(Exception):
    pass


def _seed(value: Optional[int]) -> int:
    if value is not None:
        return value
    env = os.environ.get("TRAJEVAL_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"TRAJEVAL_SEED={env!r} is not an integer") from None


def _noise(args) -> NoiseConfig:
    seed = _seed(args.seed)
    p = Fraction(args.noise_prob) if args.noise_prob is not None else Fraction(0)
    if p == 0:
        return NoiseConfig(probability=Fraction(0), seed=seed)
    kinds = tuple(NoiseKind)
    if args.noise_types:
        try:
            kinds = tuple(NoiseKind(k.strip()) for k in args.noise_types.split(",") if k.strip())
        except ValueError as exc:
            raise ConfigError(f"--noise-types: {exc}") from None
    return NoiseConfig(probability=p, enabled_types=kinds, seed=seed)


def _config(args) -> RunConfig:
    try:
        return RunConfig(
            step_multiplier=Fraction(args.step_multiplier),
            noise=_noise(args),
            runs_per_task=args.runs,
            output_dir=Path(args.out) if args.out else None,
        )
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(str(exc)) from None


def make_agent(name: str, golden, seed: int = 0):
    if name == "golden":
        return GoldenReplayer(golden)
    if name == "early-stopper":
        return EarlyStopper(0, golden)
    if name == "flaky":
        return FlakyAgent(golden, reliability=0.6, seed=seed)
    if name == "looper":
        return Looper(Action.wait())
    if name == "popup-blind":
        return PopupBlindLooper(golden)
    raise ConfigError(f"unknown agent {name!r}")


def _load(args):
    corpus = load_corpus(args.tasks)
    apps = load_apps(args.apps)
    golden = load_golden_actions(args.golden)
    return corpus, apps, golden


def _print_summary(report: dict, out=None) -> None:
    out = out or sys.stdout
    overall = report["aggregate"]["overall"]
    if overall:
        out.write(
            f"tasks={overall['n']} SR={overall['sr']['pct']:.2f}% SubSR={overall['sub_sr']['pct']:.2f}% "
            f"StepRatio={overall['mean_step_ratio']['value']:.2f}\n"
        )
    for k, v in report["aggregate"]["pass_at_k"].items():
        out.write(f"pass@{k}={v['pct']:.2f}%\n")
    for rr in report["reset"]:
        sr = rr["reset_sr"]
        out.write(
            f"reset run{rr['run']}: jobs={len(rr['jobs'])} "
            f"reset_sr={'n/a' if sr is None else format(sr['pct'], '.2f') + '%'} restored={rr['restored']}\n"
        )
    for e in report["errors"]:
        out.write(f"error: run{e['run']} {e['task_id']}: {e['error']}\n")


def cmd_run(args) -> int:
    config = _config(args)
    corpus, apps, golden = _load(args)
    labels = load_human_labels(args.human_labels) if args.human_labels else None
    agent = make_agent(args.agent, golden, seed=config.seed)
    result = run_benchmark(corpus, agent, DeviceEnv(apps), config, reset_agent=GoldenReplayer(golden), human_labels=labels)
    _print_summary(result.report.to_dict())
    if config.output_dir:
        print(f"wrote {config.output_dir}")
    return 0


def cmd_eval(args) -> int:
    source = args.source[0] if len(args.source) == 1 else args.source
    labels = load_human_labels(args.human_labels) if args.human_labels else None
    report = reevaluate(source, args.tasks, human_labels=labels)
    text = report.to_json()
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_reset(args) -> int:
    config = RunConfig(step_multiplier=Fraction(args.step_multiplier))
    corpus, apps, golden = _load(args)
    env = DeviceEnv(apps)
    plan = plan_epoch(corpus.tasks, corpus.reset_specs)
    baseline = capture_baseline(env)
    rep = execute_resets(plan, GoldenReplayer(golden), env, config, baseline_digest=baseline)
    for j in rep.jobs:
        print(f"{j.job.reset_task_id} ({j.job.category.value}) serves {','.join(j.job.serves)}: {j.outcome.value}")
    print(f"jobs={len(rep.jobs)} restored={rep.restored}")
    return 0


def cmd_report(args) -> int:
    run_dir = Path(args.out)
    doc = json.loads((run_dir / "report.json").read_text(encoding="utf-8"))
    (run_dir / "summary.csv").write_text(summary_csv(doc), encoding="utf-8")
    _print_summary(doc)
    return 0


def lint(corpus: TaskCorpus, apps, golden) -> List[str]:
    """Corpus problems beyond what the loaders already reject."""
    problems = []
    for t in (*corpus.tasks, *corpus.reset_tasks):
        if t.app_id not in apps:
            problems.append(f"{t.task_id}: app {t.app_id!r} not installed")
        if t.reset_category is ResetCategory.INFEASIBLE and t.reset_task_id:
            problems.append(f"{t.task_id}: Infeasible task must not link a reset")
        if t.task_id not in golden:
            problems.append(f"{t.task_id}: no golden actions")
        elif len(golden[t.task_id]) != t.golden_steps:
            problems.append(f"{t.task_id}: {len(golden[t.task_id])} golden actions but golden_steps={t.golden_steps}")
    if problems:
        return problems
    # Every golden script must solve its task on a fresh device, and its reset must then succeed.
    resets = corpus.reset_specs
    for t in corpus.tasks:
        env, agent = DeviceEnv(apps), GoldenReplayer(golden)
        _, r = run_task(t, agent, env, RunConfig())
        if r.outcome is not Outcome.SUCCESS:
            problems.append(f"{t.task_id}: golden replay ends {r.outcome.value}")
        if t.reset_task_id:
            _, r = run_task(resets[t.reset_task_id], agent, env, RunConfig(), role="reset")
            if r.outcome is not Outcome.SUCCESS:
                problems.append(f"{t.task_id}: reset {t.reset_task_id} ends {r.outcome.value}")
    return problems


def cmd_validate(args) -> int:
    corpus, apps, golden = _load(args)
    problems = lint(corpus, apps, golden)
    for p in problems:
        print(p)
    if problems:
        return 1
    print(f"ok: {len(corpus.tasks)} tasks, {len(corpus.reset_tasks)} reset tasks, {len(apps)} apps")
    return 0


def _corpus_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tasks", default=str(bundled("corpus/tasks.json")), help="task file (default: bundled corpus)")
    p.add_argument("--apps", default=str(bundled("apps")), help="mock app file or directory")
    p.add_argument("--golden", default=str(bundled("corpus/golden.json")), help="golden action file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trajeval", description="Condition-based GUI trajectory evaluation on mock devices.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the benchmark with a scripted agent")
    _corpus_args(p)
    p.add_argument("--agent", choices=AGENTS, default="golden")
    p.add_argument("--seed", type=int, default=None, help="base seed (falls back to $TRAJEVAL_SEED, then 0)")
    p.add_argument("--noise-prob", default=None, help="per-step noise probability, e.g. 0.2 or 1/5 (default: off)")
    p.add_argument("--noise-types", default=None, help="comma list of Repeat,Unexecuted,Delay,PopUp")
    p.add_argument("--step-multiplier", default="3")
    p.add_argument("--runs", type=int, default=1, help="runs per task (for pass@k)")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--human-labels", default=None, help="JSON {task_id: bool} for agreement metrics")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="re-evaluate stored trajectories offline")
    p.add_argument("source", nargs="+", help="run directory, or trajectory files")
    p.add_argument("--tasks", default=str(bundled("corpus/tasks.json")))
    p.add_argument("--human-labels", default=None)
    p.add_argument("--report", default=None, help="write report JSON here instead of stdout")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("reset", help="execute the reset plan on a fresh mock device")
    _corpus_args(p)
    p.add_argument("--step-multiplier", default="3")
    p.set_defaults(func=cmd_reset)

    p = sub.add_parser("report", help="recompute summary.csv from a run's report.json")
    p.add_argument("--out", required=True, help="run directory")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("validate", help="lint the corpus and replay golden actions")
    _corpus_args(p)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (
        ConfigError,
        SchemaError,
        InvariantViolation,
        TrajectoryIoError,
        AppDefinitionError,
        EmptyResultSet,
        LookupError,
        OSError,
        ValueError,
    ) as exc:
        print(f"trajeval: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
