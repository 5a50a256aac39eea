from __future__ import annotations

import sys

import pytest

from trajeval.agents import load_golden_actions
from trajeval.cli import bundled
from trajeval.simenv import DeviceEnv, load_apps
from trajeval.trajectory import load_corpus

TASKS = bundled("corpus/tasks.json")
APPS = bundled("apps")
GOLDEN = bundled("corpus/golden.json")


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(TASKS)


@pytest.fixture(scope="session")
def apps():
    return load_apps(APPS)


@pytest.fixture(scope="session")
def golden():
    return load_golden_actions(GOLDEN)


@pytest.fixture
def env(apps):
    return DeviceEnv(apps)


@pytest.fixture
def make_env(apps):
    return lambda: DeviceEnv(apps)


def tiny_app_dict():
    """Three pages a -> b -> c via the same top button, plus a flag toggle on a."""
    button = '<node text="Next" clickable="true" bounds="[0,0][100,100]" />'
    toggle = '<node text="Toggle" bounds="[0,200][100,300]" /><node text="ON" if-flag="on" /><node text="OFF" unless-flag="on" />'
    return {
        "app_id": "tiny",
        "initial_page": "a",
        "flags": {"on": False},
        "pages": {
            "a": {"xml": f'<hierarchy><node text="A" />{button}{toggle}</hierarchy>'},
            "b": {"xml": f'<hierarchy><node text="B" />{button}</hierarchy>', "back": "a"},
            "c": {"xml": '<hierarchy><node text="C" /></hierarchy>', "back": "b"},
        },
        "transitions": [
            {"from": "a", "to": "b", "trigger": {"kind": "click", "region": "[0,0][100,100]"}},
            {"from": "b", "to": "c", "trigger": {"kind": "click", "region": "[0,0][100,100]"}},
            {"from": "a", "trigger": {"kind": "click", "region": "[0,200][100,300]"}, "when": {"on": False}, "set_flags": {"on": True}},
            {"from": "a", "trigger": {"kind": "click", "region": "[0,200][100,300]"}, "when": {"on": True}, "set_flags": {"on": False}},
        ],
        "noise_templates": {
            "delay": [{"id": "loading", "xml": '<hierarchy><node text="Loading" /></hierarchy>'}],
            "popup": [
                {
                    "id": "ad",
                    "xml": '<hierarchy><node text="Ad" bounds="[0,0][1080,2400]"><node text="X" bounds="[900,900][1000,1000]" /></node></hierarchy>',
                    "close_bounds": "[900,900][1000,1000]",
                }
            ],
        },
    }


@pytest.fixture
def tiny_env():
    from trajeval.simenv import app_from_dict

    return DeviceEnv([app_from_dict(tiny_app_dict())])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
