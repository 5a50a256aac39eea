import pytest

from trajeval.agents import GoldenReplayer, Looper
from trajeval.actions import Action
from trajeval.reset import DanglingResetRef, capture_baseline, execute_resets, plan_epoch, verify_restoration
from trajeval.runner import run_task
from trajeval.trajectory import ResetCategory, task_from_dict


def test_app_level_dedup(corpus):
    plan = plan_epoch(corpus.tasks, corpus.reset_specs)
    app_jobs = [j for j in plan.jobs if j.category is ResetCategory.APP_LEVEL]
    assert len(app_jobs) == 1
    assert app_jobs[0].reset_task_id == "blog_clear_history"
    assert app_jobs[0].serves == ("blog_search_gold", "blog_search_stock", "nr_blog_search_gold")


def test_task_level_one_job_each(corpus):
    plan = plan_epoch(corpus.tasks, corpus.reset_specs)
    task_jobs = [j for j in plan.jobs if j.category is ResetCategory.TASK_LEVEL]
    assert [j.serves for j in task_jobs] == [("shop_senior_on",)]


def test_none_and_infeasible_produce_no_jobs(corpus):
    quiet = [t for t in corpus.tasks if t.reset_category in (ResetCategory.NONE, ResetCategory.INFEASIBLE)]
    assert quiet and plan_epoch(quiet, corpus.reset_specs).jobs == ()


def test_dangling_reference(corpus):
    task = next(t for t in corpus.tasks if t.task_id == "shop_senior_on")
    with pytest.raises(DanglingResetRef):
        plan_epoch([task], {})


def _epoch(corpus, golden, env, ids):
    agent = GoldenReplayer(golden)
    tasks = [corpus.by_id[i] for i in ids]
    baseline = capture_baseline(env)
    for t in tasks:
        run_task(t, agent, env)
    return plan_epoch(tasks, corpus.reset_specs), baseline, agent


def test_restoration_after_flag_mutation(corpus, golden, env):
    plan, baseline, agent = _epoch(corpus, golden, env, ["shop_senior_on", "blog_search_gold", "blog_search_stock"])
    assert not verify_restoration(env, baseline)
    report = execute_resets(plan, agent, env, baseline_digest=baseline)
    assert report.restored is True
    assert report.reset_sr == 1
    assert all(j.restored for j in report.jobs)


def test_failed_reset_leaves_state_dirty(corpus, golden, env):
    plan, baseline, _ = _epoch(corpus, golden, env, ["shop_senior_on"])
    report = execute_resets(plan, Looper(Action.wait()), env, baseline_digest=baseline)
    assert report.restored is False and report.reset_sr == 0


def test_reset_is_idempotent(corpus, golden, env):
    plan, baseline, agent = _epoch(corpus, golden, env, ["shop_senior_on", "blog_search_gold"])
    execute_resets(plan, agent, env, baseline_digest=baseline)
    again = execute_resets(plan, agent, env, baseline_digest=baseline)
    assert again.restored is True


def test_empty_plan_has_no_rate(corpus, env):
    report = execute_resets(plan_epoch([], corpus.reset_specs), None, env)
    assert report.reset_sr is None and report.restored is None


def test_reset_category_invariants():
    base = {
        "task_id": "x",
        "app_id": "minishop",
        "instruction": "i",
        "subset": "Base",
        "golden_steps": 1,
        "exploration_abilities": [],
        "condition": '//*[@text="x"]',
    }
    task_from_dict({**base, "reset_category": "TaskLevel", "reset_task_id": "r"})
    with pytest.raises(Exception):
        task_from_dict({**base, "reset_category": "Infeasible", "reset_task_id": "r"})
