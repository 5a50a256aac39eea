"""
Deterministic mock device.

A mock app is a page graph.  Each page is an XML template in the device
dump dialect; nodes may carry ``if-flag="name"`` or ``unless-flag="name"``
to appear only when a persistent state flag is set or clear.  Transitions
fire on actions whose point falls inside a trigger region (or on scroll
direction, typed content, ...), may be guarded by flags, and may set flags.

App files are JSON; see ``data/schemas/mock_app.schema.json``.
"""

from __future__ import annotations

import hashlib
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

import jsonschema

from .actions import Action, ActionKind, Direction
from .noise import TemplatePageSet
from .uitree import Bounds, bounds_contains, parse_bounds

IF_FLAG = "if-flag"
UNLESS_FLAG = "unless-flag"


class AppDefinitionError(ValueError):
    pass


class AmbiguousTransition(AppDefinitionError):
    pass


@dataclass(frozen=True)
class Trigger:
    kind: ActionKind
    region: Optional[Bounds] = None
    direction: Optional[Direction] = None
    content: Optional[str] = None

    def matches(self, action: Action) -> bool:
        if action.kind is not self.kind:
            return False
        if self.region is not None and (action.point is None or not bounds_contains(self.region, action.point)):
            return False
        if self.direction is not None and action.direction is not self.direction:
            return False
        if self.content is not None and action.content != self.content:
            return False
        return True

    def overlaps(self, other: "Trigger") -> bool:
        """Could one action fire both triggers?"""
        if self.kind is not other.kind:
            return False
        if self.region is not None and other.region is not None:
            a, b = self.region, other.region
            if a.x2 < b.x1 or b.x2 < a.x1 or a.y2 < b.y1 or b.y2 < a.y1:
                return False
        for attr in ("direction", "content"):
            x, y = getattr(self, attr), getattr(other, attr)
            if x is not None and y is not None and x != y:
                return False
        return True


@dataclass(frozen=True)
class Transition:
    from_page: str
    trigger: Trigger
    to_page: Optional[str] = None  # None stays on the page
    when: Mapping[str, bool] = field(default_factory=dict)
    set_flags: Mapping[str, bool] = field(default_factory=dict)

    def enabled(self, flags: Mapping[str, bool]) -> bool:
        return all(flags.get(k, False) == v for k, v in self.when.items())

    def guards_compatible(self, other: "Transition") -> bool:
        return all(other.when.get(k, v) == v for k, v in self.when.items())


@dataclass(frozen=True)
class Page:
    page_id: str
    xml: str
    back: Optional[str] = None


@dataclass
class MockApp:
    app_id: str
    pages: Dict[str, Page]
    transitions: List[Transition]
    initial_page: str
    flags: Dict[str, bool] = field(default_factory=dict)
    templates: TemplatePageSet = field(default_factory=TemplatePageSet)
    # Flags that model state no reset can restore; left out of restoration digests.
    irreversible_flags: Tuple[str, ...] = ()

    def __post_init__(self):
        self._render_cache: Dict[Tuple[str, Tuple[Tuple[str, bool], ...]], str] = {}
        self._check()

    def _check(self) -> None:
        if self.initial_page not in self.pages:
            raise AppDefinitionError(f"{self.app_id}: unknown initial page {self.initial_page!r}")
        for page in self.pages.values():
            if page.back is not None and page.back not in self.pages:
                raise AppDefinitionError(f"{self.app_id}/{page.page_id}: unknown back page {page.back!r}")
            try:
                ET.fromstring(page.xml)
            except ET.ParseError as exc:
                raise AppDefinitionError(f"{self.app_id}/{page.page_id}: bad XML: {exc}") from None
        for t in self.transitions:
            for p in (t.from_page, t.to_page):
                if p is not None and p not in self.pages:
                    raise AppDefinitionError(f"{self.app_id}: transition references unknown page {p!r}")
            for name in (*t.when, *t.set_flags):
                if name not in self.flags:
                    raise AppDefinitionError(f"{self.app_id}: transition uses undeclared flag {name!r}")
        by_page: Dict[str, List[Transition]] = {}
        for t in self.transitions:
            by_page.setdefault(t.from_page, []).append(t)
        for page_id, ts in by_page.items():
            for i, a in enumerate(ts):
                for b in ts[i + 1 :]:
                    if a.trigger.overlaps(b.trigger) and a.guards_compatible(b):
                        raise AmbiguousTransition(
                            f"{self.app_id}/{page_id}: transitions to {a.to_page!r} and {b.to_page!r} overlap"
                        )

    def find_transition(self, page_id: str, action: Action, flags: Mapping[str, bool]) -> Optional[Transition]:
        for t in self.transitions:
            if t.from_page == page_id and t.enabled(flags) and t.trigger.matches(action):
                return t
        return None

    def render(self, page_id: str, flags: Mapping[str, bool]) -> str:
        key = (page_id, tuple(sorted(flags.items())))
        cached = self._render_cache.get(key)
        if cached is None:
            cached = render_template(self.pages[page_id].xml, flags)
            self._render_cache[key] = cached
        return cached


def render_template(xml: str, flags: Mapping[str, bool]) -> str:
    root = ET.fromstring(xml)

    def visible(el: ET.Element) -> bool:
        if IF_FLAG in el.attrib and not flags.get(el.attrib[IF_FLAG], False):
            return False
        if UNLESS_FLAG in el.attrib and flags.get(el.attrib[UNLESS_FLAG], False):
            return False
        return True

    stack = [root]
    while stack:
        el = stack.pop()
        el.attrib.pop(IF_FLAG, None)
        el.attrib.pop(UNLESS_FLAG, None)
        for child in list(el):
            if visible(child):
                stack.append(child)
            else:
                el.remove(child)
    body = ET.tostring(root, encoding="unicode")
    return "<?xml version='1.0' encoding='UTF-8' standalone='yes' ?>" + body


def _digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode("utf-8")).hexdigest()


class DeviceEnv:
    """
    One mock phone with a set of installed apps.

    Flags persist per app across launches; ``launch`` only repositions the
    device at an app's initial page.
    """

    live = False

    def __init__(self, apps: Union[Mapping[str, MockApp], Iterable[MockApp]]):
        if not isinstance(apps, Mapping):
            apps = {a.app_id: a for a in apps}
        if not apps:
            raise ValueError("DeviceEnv needs at least one app")
        self.apps: Dict[str, MockApp] = dict(apps)
        self.flags: Dict[str, Dict[str, bool]] = {a: dict(app.flags) for a, app in self.apps.items()}
        self.app_id = next(iter(self.apps))
        self.page_id = self.app.initial_page
        self.step_count = 0

    @property
    def app(self) -> MockApp:
        return self.apps[self.app_id]

    @property
    def templates(self) -> TemplatePageSet:
        return self.app.templates

    @property
    def current_flags(self) -> Dict[str, bool]:
        return self.flags[self.app_id]

    def launch(self, app_id: str) -> "DeviceEnv":
        if app_id not in self.apps:
            raise KeyError(f"app {app_id!r} is not installed")
        self.app_id = app_id
        self.page_id = self.app.initial_page
        return self

    def execute(self, action: Action) -> "DeviceEnv":
        app, flags = self.app, self.current_flags
        t = app.find_transition(self.page_id, action, flags)
        if t is not None:
            flags.update(t.set_flags)
            if t.to_page is not None:
                self.page_id = t.to_page
        elif action.kind is ActionKind.PRESS_BACK:
            back = app.pages[self.page_id].back
            if back is not None:
                self.page_id = back
        elif action.kind is ActionKind.PRESS_HOME:
            self.page_id = app.initial_page
        self.step_count += 1
        return self

    def observe(self) -> str:
        return self.app.render(self.page_id, self.current_flags)

    def digest(self) -> str:
        return _digest({"app": self.app_id, "page": self.page_id, "flags": self.flags})

    def persistent_digest(self) -> str:
        """Digest of the restorable persistent state (flags), ignoring device position."""
        restorable = {
            a: {k: v for k, v in fl.items() if k not in self.apps[a].irreversible_flags}
            for a, fl in self.flags.items()
        }
        return _digest(restorable)


def execute(env: DeviceEnv, action: Action) -> DeviceEnv:
    return env.execute(action)


def observe(env: DeviceEnv) -> str:
    return env.observe()


# ------------------------------------------------------------------ loading


def _schema() -> dict:
    text = resources.files("trajeval").joinpath("data/schemas/mock_app.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def app_from_dict(d: Mapping) -> MockApp:
    try:
        jsonschema.validate(d, _schema())
    except jsonschema.ValidationError as exc:
        raise AppDefinitionError(f"mock app: {exc.message}") from None
    pages = {pid: Page(pid, p["xml"], p.get("back")) for pid, p in d["pages"].items()}
    transitions = []
    for t in d["transitions"]:
        trig = t["trigger"]
        transitions.append(
            Transition(
                from_page=t["from"],
                trigger=Trigger(
                    kind=ActionKind(trig["kind"]),
                    region=parse_bounds(trig["region"]) if "region" in trig else None,
                    direction=Direction(trig["direction"]) if "direction" in trig else None,
                    content=trig.get("content"),
                ),
                to_page=t.get("to"),
                when=dict(t.get("when", {})),
                set_flags=dict(t.get("set_flags", {})),
            )
        )
    return MockApp(
        app_id=d["app_id"],
        pages=pages,
        transitions=transitions,
        initial_page=d["initial_page"],
        flags=dict(d.get("flags", {})),
        templates=TemplatePageSet.from_dict(d.get("noise_templates", {})),
        irreversible_flags=tuple(d.get("irreversible_flags", ())),
    )


def load_app(path: Union[str, Path]) -> MockApp:
    return app_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def load_apps(path: Union[str, Path]) -> Dict[str, MockApp]:
    """Load one app file, or every ``*.json`` in a directory."""
    p = Path(path)
    files = sorted(p.glob("*.json")) if p.is_dir() else [p]
    apps = {}
    for f in files:
        app = load_app(f)
        if app.app_id in apps:
            raise AppDefinitionError(f"duplicate app id {app.app_id!r}")
        apps[app.app_id] = app
    return apps
