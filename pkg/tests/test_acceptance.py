"""
Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line to the terminal, even
under output capture, and the lines are repeated in the run summary.
"""

import json
import math
import random
import sys
import time
from collections import Counter
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, given, settings

sys.path.insert(0, str(Path(__file__).parent))

from trajeval.actions import Action  # noqa: E402
from trajeval.agents import EarlyStopper, FlakyAgent, GoldenReplayer, PopupBlindLooper, load_golden_actions  # noqa: E402
from trajeval.condlang import Selector, eval_selector, parse_condition_set, pretty_print  # noqa: E402
from trajeval.evalengine import MatchReport, Outcome, classify_outcome, match_trajectory  # noqa: E402
from trajeval.harness import reevaluate, run_benchmark  # noqa: E402
from trajeval.metrics import ConfusionCounts, Difficulty, agreement_from_counts, percent  # noqa: E402
from trajeval.noise import NoiseConfig, NoiseKind, apply_noise, resolve_noise, sample_noise  # noqa: E402
from trajeval.reset import capture_baseline, execute_resets, plan_epoch, verify_restoration  # noqa: E402
from trajeval.report import success_matrix  # noqa: E402
from trajeval.runner import RunConfig, run_task  # noqa: E402
from trajeval.simenv import DeviceEnv, load_apps  # noqa: E402
from trajeval.trajectory import ResetCategory, Step, Subset, Termination, Trajectory, load_corpus, load_trajectory_file  # noqa: E402
from trajeval.uitree import parse_ui_tree  # noqa: E402

from conftest import APPS, GOLDEN, TASKS  # noqa: E402
from oracles import (  # noqa: E402
    brute_assignment,
    brute_clause,
    brute_select,
    condition_sets,
    random_condition_set,
    random_point,
    random_pred,
    random_tree_xml,
)

FIXTURES = json.loads((Path(__file__).parent / "fixtures" / "conditions.json").read_text(encoding="utf-8"))

CORPUS = load_corpus(TASKS)
APP_DEFS = load_apps(APPS)
GOLDEN_ACTIONS = load_golden_actions(GOLDEN)


def fresh_env():
    return DeviceEnv(APP_DEFS)


LINES = []
_config = {}


@pytest.fixture(autouse=True)
def _remember_config(request):
    _config["pytest"] = request.config


def report_line(number, title, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else "")
    LINES.append(line)
    config = _config.get("pytest")
    capman = config.pluginmanager.getplugin("capturemanager") if config else None
    reporter = config.pluginmanager.getplugin("terminalreporter") if config else None
    if capman and reporter:
        with capman.global_and_fixture_disabled():
            reporter.write_line("")
            reporter.write_line(line)
    else:
        print(line, flush=True)
    return line


class Check:
    """Collects named sub-checks so a criterion reports what failed."""

    def __init__(self):
        self.failures = []

    def __call__(self, cond, what):
        if not cond:
            self.failures.append(what)
        return cond

    @property
    def ok(self):
        return not self.failures


def finish(number, title, check, detail=""):
    report_line(number, title, check.ok, detail if check.ok else "; ".join(check.failures[:5]))
    assert check.ok, check.failures


# ------------------------------------------------------------------ 1


def test_criterion_01_confusion_arithmetic():
    c = Check()
    t0 = time.perf_counter()
    rows = [
        (ConfusionCounts(534, 5, 22, 519), ("49.91", "51.48", "97.50")),
        (ConfusionCounts(9, 0, 0, 51), ("15.00", "15.00", "100.00")),
    ]
    for counts, expected in rows:
        a = agreement_from_counts(counts)
        got = (a.auto_sr, a.human_sr, a.accuracy)
        for name, value, want in zip(("auto_sr", "human_sr", "accuracy"), got, expected):
            exact = Decimal(value.numerator) / Decimal(value.denominator) * 100
            c(abs(exact - Decimal(want)) <= Decimal("0.005"), f"{counts} {name} {exact} vs {want}")
            c(percent(value) == Decimal(want), f"{counts} {name} rounds to {percent(value)}")
    ms = (time.perf_counter() - t0) * 1000
    c(ms < 100, f"took {ms:.1f} ms")
    finish(1, "confusion arithmetic", c, f"{ms:.2f} ms")


# ------------------------------------------------------------------ 2

TRUTH = {
    (True, Termination.FINISHED_ACTION): Outcome.SUCCESS,
    (True, Termination.STEP_LIMIT): Outcome.OVERDUE_TERMINATION,
    (False, Termination.FINISHED_ACTION): Outcome.EARLY_TERMINATION,
    (False, Termination.STEP_LIMIT): Outcome.FAILURE,
}


def _random_traj(rng, max_steps=8):
    steps = []
    for i in range(rng.randint(0, max_steps)):
        p = random_point(rng)
        steps.append(Step(i, random_tree_xml(rng, 12), Action.wait() if p is None else Action.click(p.x, p.y)))
    finished = rng.random() < 0.5
    if finished:
        steps.append(Step(len(steps), "<hierarchy />", Action.finished()))
    return Trajectory("t", tuple(steps), Termination.FINISHED_ACTION if finished else Termination.STEP_LIMIT)


def test_criterion_02_outcome_classifier():
    c = Check()
    for (matched, term), want in TRUTH.items():
        last = Action.finished() if term is Termination.FINISHED_ACTION else Action.wait()
        traj = Trajectory("t", (Step(0, "<a/>", Action.wait()), Step(1, "<a/>", last)), term)
        got = classify_outcome(traj, MatchReport((0, 1) if matched else (0, None)))
        c(got is want, f"{matched}/{term.value} -> {got.value}")
    for seed in range(200):
        rng = random.Random(20_000 + seed)
        cs = random_condition_set(rng, max_clauses=3, max_selectors=2, depth=3)
        traj = _random_traj(rng)
        truth = [[brute_clause(cl, s.ui_xml, s.action.interaction_point) for s in traj.steps] for cl in cs.clauses]
        m, _ = brute_assignment(truth)
        want = TRUTH[m == len(cs.clauses), traj.termination]
        got = classify_outcome(traj, match_trajectory(traj, cs))
        c(got is want, f"seed {seed}: {got.value} vs {want.value}")
    finish(2, "outcome classifier", c, "4 exhaustive + 200 randomized")


# ------------------------------------------------------------------ 3


def test_criterion_03_dsl_oracle_equivalence():
    c = Check()
    t0 = time.perf_counter()
    disagreements = 0
    for seed in range(1000):
        rng = random.Random(30_000 + seed)
        xml = random_tree_xml(rng, 50)
        pred = random_pred(rng, 4)
        point = random_point(rng)
        m = eval_selector(Selector(pred), parse_ui_tree(xml), point)
        expected = brute_select(pred, xml, point)
        if (m.index if m else None) != (expected[0] if expected else None):
            disagreements += 1
    secs = time.perf_counter() - t0
    c(disagreements == 0, f"{disagreements} disagreements")
    c(secs < 10, f"took {secs:.1f} s")
    finish(3, "DSL oracle equivalence", c, f"1000 cases, 0 disagreements, {secs:.2f} s")


# ------------------------------------------------------------------ 4


def test_criterion_04_ordered_matching():
    c = Check()
    for seed in range(500):
        rng = random.Random(40_000 + seed)
        cs = random_condition_set(rng, max_clauses=3, max_selectors=2, depth=3)
        traj = _random_traj(rng, 8)
        truth = [[brute_clause(cl, s.ui_xml, s.action.interaction_point) for s in traj.steps] for cl in cs.clauses]
        m, _ = brute_assignment(truth)
        r = match_trajectory(traj, cs)
        c(r.matched_count == m, f"seed {seed}: matched_count {r.matched_count} vs {m}")
        c(r.all_matched == (m == len(cs.clauses)), f"seed {seed}: all_matched")
    finish(4, "ordered matching vs exhaustive search", c, "500 cases")


# ------------------------------------------------------------------ 5


def test_criterion_05_parser_round_trip():
    c = Check()
    for name, text in FIXTURES.items():
        try:
            cs = parse_condition_set(text)
        except Exception as exc:
            c(False, f"{name}: {exc}")
            continue
        c(parse_condition_set(pretty_print(cs)) == cs, f"{name} round trip")

    generated = []

    @settings(max_examples=500, deadline=None, database=None, suppress_health_check=list(HealthCheck))
    @given(condition_sets)
    def round_trip(cs):
        generated.append(1)
        assert parse_condition_set(pretty_print(cs)) == cs

    try:
        round_trip()
    except AssertionError as exc:
        c(False, f"generated set: {exc}")
    c(len(generated) >= 500, f"only {len(generated)} generated sets")
    finish(5, "parser fixtures and round trip", c, f"{len(FIXTURES)} fixtures + {len(generated)} generated")


# ------------------------------------------------------------------ 6


def test_criterion_06_noise_statistics():
    c = Check()
    cfg = NoiseConfig(probability=Fraction(1, 5), seed=12345)
    rng = random.Random(cfg.seed)
    schedule = [sample_noise(rng, cfg) for _ in range(10_000)]
    rng2 = random.Random(cfg.seed)
    c(schedule == [sample_noise(rng2, cfg) for _ in range(10_000)], "schedule not reproducible")
    fired = [k for k in schedule if k is not None]
    rate = len(fired) / 10_000
    c(0.188 <= rate <= 0.212, f"fire rate {rate:.4f}")
    n = len(fired)
    sigma = math.sqrt(n * 0.25 * 0.75)
    counts = Counter(fired)
    for kind in NoiseKind:
        c(abs(counts[kind] - n / 4) <= 3 * sigma, f"{kind.value}: {counts[kind]} of {n}")
    per_type = ", ".join(f"{k.value}={counts[k]}" for k in NoiseKind)
    finish(6, "noise statistics", c, f"rate {rate:.4f}; {per_type}")


# ------------------------------------------------------------------ 7


def test_criterion_07_noise_semantics():
    c = Check()
    task = CORPUS.by_id["blog_avatar"]
    first = GOLDEN_ACTIONS[task.task_id][0]

    env, ref = fresh_env().launch("miniblog"), fresh_env().launch("miniblog")
    apply_noise(NoiseKind.REPEAT, first, env)
    ref.execute(first).execute(first)
    c(env.digest() == ref.digest(), "Repeat differs from two executions")

    env = fresh_env().launch("miniblog")
    before = env.digest()
    apply_noise(NoiseKind.UNEXECUTED, first, env)
    c(env.digest() == before, "Unexecuted changed state")

    env, ref = fresh_env().launch("miniblog"), fresh_env().launch("miniblog")
    obs = apply_noise(NoiseKind.DELAY, first, env)
    ref.execute(first)
    c(obs.xml != ref.observe(), "Delay did not mask the page")
    revealed = resolve_noise(obs.event, Action.wait(), env)
    c(revealed.xml == ref.observe() and env.digest() == ref.digest(), "wait did not reveal the post-action page")

    env = fresh_env().launch("miniblog")
    obs = apply_noise(NoiseKind.POPUP, first, env)
    cb = obs.event.close_bounds
    outside = Action.click(cb.x1 - 1, cb.y1)
    blocked = resolve_noise(obs.event, outside, env)
    c(not blocked.event.resolved and blocked.xml == obs.xml, "PopUp resolved by outside click")
    closed = resolve_noise(obs.event, Action.click((cb.x1 + cb.x2) // 2, (cb.y1 + cb.y2) // 2), env)
    c(closed.event.resolved and closed.xml == env.observe(), "PopUp not dismissed by close click")

    cfg = RunConfig(
        noise=NoiseConfig(probability=Fraction(1), enabled_types=(NoiseKind.POPUP,)), noise_subsets=(task.subset,)
    )
    traj, result = run_task(task, PopupBlindLooper(GOLDEN_ACTIONS), fresh_env(), cfg)
    limit = cfg.step_limit(task)
    c(len(traj.steps) == limit and traj.termination is Termination.STEP_LIMIT, f"{len(traj.steps)} steps vs cap {limit}")
    c(result.outcome is Outcome.FAILURE, f"PopupBlindLooper ended {result.outcome.value}")
    finish(7, "noise semantics end to end", c, f"PopupBlindLooper stopped at cap {limit} with Failure")


# ------------------------------------------------------------------ 8


def test_criterion_08_end_to_end_mock_benchmark():
    c = Check()
    t0 = time.perf_counter()
    c(len(CORPUS.tasks) >= 12, f"corpus has {len(CORPUS.tasks)} tasks")
    run = run_benchmark(CORPUS, GoldenReplayer(GOLDEN_ACTIONS), fresh_env)
    c(all(r.outcome is Outcome.SUCCESS for r in run.results), "golden SR below 100%")
    c(all(r.step_ratio == 1 for r in run.results), "step_ratio != 1.0")

    by_steps = {t.golden_steps: t for t in CORPUS.tasks if t.subset is not Subset.GUI_REASONING}
    want_steps = {7: Difficulty.EASY, 8: Difficulty.MEDIUM, 19: Difficulty.MEDIUM, 20: Difficulty.HARD}
    results = {r.task_id: r for r in run.results}
    for steps, want in want_steps.items():
        t = by_steps.get(steps)
        c(t is not None and results[t.task_id].difficulty is want, f"golden {steps} bucket")
    reasoning = [results[t.task_id] for t in CORPUS.tasks if t.subset is Subset.GUI_REASONING]
    weights = {t.exploration_weight: results[t.task_id].difficulty for t in CORPUS.tasks if t.subset is Subset.GUI_REASONING}
    want_weights = {Fraction(1, 2): Difficulty.EASY, Fraction(3): Difficulty.HARD, Fraction(4): Difficulty.HARD}
    for w, want in want_weights.items():
        c(weights.get(w) is want, f"weight {w} bucket {weights.get(w)}")
    steps_buckets = {r.difficulty for r in run.results if r.subset is not Subset.GUI_REASONING}
    c(steps_buckets == set(Difficulty), f"step buckets {steps_buckets}")
    c({r.difficulty for r in reasoning} == set(Difficulty), "weight buckets not all populated")

    early = run_benchmark(CORPUS, EarlyStopper(0), fresh_env, reset_agent=GoldenReplayer(GOLDEN_ACTIONS))
    c(all(r.outcome is Outcome.EARLY_TERMINATION for r in early.results), "EarlyStopper not 100% EarlyTermination")
    secs = time.perf_counter() - t0
    c(secs < 30, f"took {secs:.1f} s")
    finish(8, "end-to-end mock benchmark", c, f"{len(CORPUS.tasks)} tasks, SR 100%, {secs:.2f} s")


# ------------------------------------------------------------------ 9


def test_criterion_09_reset():
    c = Check()
    plan_all = plan_epoch(CORPUS.tasks, CORPUS.reset_specs)
    app_jobs = [j for j in plan_all.jobs if j.category is ResetCategory.APP_LEVEL]
    c(len(app_jobs) == 1 and len(app_jobs[0].serves) == 3, f"app-level jobs {[j.serves for j in app_jobs]}")

    env = fresh_env()
    agent = GoldenReplayer(GOLDEN_ACTIONS)
    baseline = capture_baseline(env)
    mutating = CORPUS.by_id["shop_senior_on"]
    run_task(mutating, agent, env)
    c(not verify_restoration(env, baseline), "task did not mutate state")
    report = execute_resets(plan_epoch([mutating], CORPUS.reset_specs), agent, env, baseline_digest=baseline)
    c(report.restored is True, "digest not restored")

    env = fresh_env()
    baseline = capture_baseline(env)
    for t in CORPUS.tasks:
        run_task(t, agent, env)
    report = execute_resets(plan_all, agent, env, baseline_digest=baseline)
    c(report.restored is True, "full epoch not restored")
    finish(9, "reset restoration and dedup", c, f"{len(plan_all.jobs)} jobs for the full epoch")


# ------------------------------------------------------------------ 10


def test_criterion_10_reevaluation(tmp_path):
    c = Check()
    cfg = RunConfig(noise=NoiseConfig(probability=Fraction(1, 5), seed=7), runs_per_task=2, output_dir=tmp_path / "run")
    run_benchmark(CORPUS, FlakyAgent(GOLDEN_ACTIONS, seed=2), fresh_env, cfg, reset_agent=GoldenReplayer(GOLDEN_ACTIONS))
    original = (tmp_path / "run" / "report.json").read_text(encoding="utf-8")
    c(reevaluate(tmp_path / "run", TASKS).to_json() == original, "report not byte-identical")

    run_benchmark(
        [CORPUS.by_id["blog_avatar"]], GoldenReplayer(GOLDEN_ACTIONS), fresh_env, RunConfig(output_dir=tmp_path / "g")
    )
    f = tmp_path / "g" / "trajectories" / "run0" / "blog_avatar.jsonl"
    before = reevaluate([f], TASKS).results[0].outcome
    recs = [json.loads(line) for line in f.read_text(encoding="utf-8").splitlines()]
    task = CORPUS.by_id["blog_avatar"]
    shuffle_step = match_trajectory(load_trajectory_file(f), task.condition).clause_hits[-1]
    for r in recs:
        if r["record"] == "step" and r["index"] == shuffle_step:
            r["action"] = "click(point='<point>1 1</point>')"
    f.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in recs), encoding="utf-8")
    after = reevaluate([f], TASKS).results[0].outcome
    c(before is Outcome.SUCCESS and after is Outcome.EARLY_TERMINATION, f"{before.value} -> {after.value}")
    finish(10, "determinism and re-evaluation", c, f"edited click: {before.value} -> {after.value}")


# ------------------------------------------------------------------ 11


def test_criterion_11_pass_at_k(tmp_path):
    c = Check()
    cfg = RunConfig(runs_per_task=5, output_dir=tmp_path / "run")
    run = run_benchmark(CORPUS, FlakyAgent(GOLDEN_ACTIONS, seed=0), fresh_env, cfg, reset_agent=GoldenReplayer(GOLDEN_ACTIONS))
    agg = run.report.aggregate()["pass_at_k"]
    values = [Fraction(agg[str(k)]["exact"]) for k in (1, 3, 5)]
    c(values[0] <= values[1] <= values[2], f"not monotone: {values}")

    # Independent recount: the agent's seeded coins decide each attempt, and golden replay always succeeds.
    coins = FlakyAgent(GOLDEN_ACTIONS, seed=0)
    recount = {t.task_id: [coins.coin(t.task_id, a) for a in range(5)] for t in CORPUS.tasks}
    matrix = success_matrix(run.results)
    c(matrix == recount, "stored success matrix differs from recount")
    stored = {f.stem for f in (tmp_path / "run" / "trajectories").glob("run4/*.jsonl")}
    c(stored == set(recount), "stored trajectories missing")
    for k, got in zip((1, 3, 5), values):
        want = Fraction(sum(any(v[:k]) for v in recount.values()), len(recount))
        c(got == want, f"pass@{k} {got} vs recount {want}")
    c(values[0] < values[2], "retries gained nothing")
    shown = ", ".join(f"pass@{k}={percent(v)}%" for k, v in zip((1, 3, 5), values))
    finish(11, "pass@k monotone and recounted", c, shown)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
