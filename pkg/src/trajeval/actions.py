"""
Unified action space and agent-output translators.

Every agent's output is reduced to one of::

    click(point='<point>x y</point>')
    long_press(point='<point>x y</point>')
    type(content='...')
    scroll(point='<point>x y</point>', direction='up|down|left|right')
    press_home()
    press_back()
    wait()
    finished(content='...')

Argument values are Python string literals, so ``'``, ``"`` and ``\\n`` are
written with backslash escapes.  A trailing ``\\n`` in ``type`` content is
the submit marker and is kept as-is.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Optional

from .uitree import Point


class ActionParseError(ValueError):
    pass


class UnknownActionKind(ActionParseError):
    pass


class MissingField(ActionParseError):
    pass


class UnexpectedField(ActionParseError):
    pass


class MalformedPoint(ActionParseError):
    pass


class NoActionFound(ActionParseError):
    pass


class UnknownDialect(KeyError):
    pass


class ActionKind(str, Enum):
    CLICK = "click"
    TYPE = "type"
    SCROLL = "scroll"
    PRESS_HOME = "press_home"
    PRESS_BACK = "press_back"
    WAIT = "wait"
    LONG_PRESS = "long_press"
    FINISHED = "finished"


class Direction(str, Enum):
    UP = "up"
    DOWN = "down"
    LEFT = "left"
    RIGHT = "right"


# kind -> (required fields, optional fields)
_FIELDS = {
    ActionKind.CLICK: ({"point"}, set()),
    ActionKind.LONG_PRESS: ({"point"}, set()),
    ActionKind.SCROLL: ({"point", "direction"}, set()),
    ActionKind.TYPE: ({"content"}, set()),
    ActionKind.FINISHED: (set(), {"content"}),
    ActionKind.PRESS_HOME: (set(), set()),
    ActionKind.PRESS_BACK: (set(), set()),
    ActionKind.WAIT: (set(), set()),
}


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    point: Optional[Point] = None
    content: Optional[str] = None
    direction: Optional[Direction] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ActionKind(self.kind))
        if self.direction is not None:
            object.__setattr__(self, "direction", Direction(self.direction))
        required, optional = _FIELDS[self.kind]
        present = {f for f in ("point", "content", "direction") if getattr(self, f) is not None}
        missing = required - present
        if missing:
            raise MissingField(f"{self.kind.value} requires {', '.join(sorted(missing))}")
        extra = present - required - optional
        if extra:
            raise UnexpectedField(f"{self.kind.value} does not take {', '.join(sorted(extra))}")

    @property
    def interaction_point(self) -> Optional[Point]:
        """What ``$point`` binds to: tap point, or scroll start point."""
        if self.kind in (ActionKind.CLICK, ActionKind.LONG_PRESS, ActionKind.SCROLL):
            return self.point
        return None

    def __str__(self) -> str:
        return format_unified(self)

    # convenience constructors
    @classmethod
    def click(cls, x: int, y: int) -> "Action":
        return cls(ActionKind.CLICK, point=Point(x, y))

    @classmethod
    def long_press(cls, x: int, y: int) -> "Action":
        return cls(ActionKind.LONG_PRESS, point=Point(x, y))

    @classmethod
    def scroll(cls, x: int, y: int, direction: str) -> "Action":
        return cls(ActionKind.SCROLL, point=Point(x, y), direction=Direction(direction))

    @classmethod
    def type_text(cls, content: str) -> "Action":
        return cls(ActionKind.TYPE, content=content)

    @classmethod
    def finished(cls, content: str = "") -> "Action":
        return cls(ActionKind.FINISHED, content=content)

    @classmethod
    def wait(cls) -> "Action":
        return cls(ActionKind.WAIT)

    @classmethod
    def press_back(cls) -> "Action":
        return cls(ActionKind.PRESS_BACK)

    @classmethod
    def press_home(cls) -> "Action":
        return cls(ActionKind.PRESS_HOME)


_POINT_RE = re.compile(r"^\s*<point>\s*(-?\d+)\s+(-?\d+)\s*</point>\s*$")


def parse_point(s: str) -> Point:
    m = _POINT_RE.match(s)
    if not m:
        raise MalformedPoint(f"expected '<point>x y</point>', got {s!r}")
    return Point(int(m.group(1)), int(m.group(2)))


def format_point(p: Point) -> str:
    return f"<point>{p.x} {p.y}</point>"


def _literal(s: str) -> str:
    escaped = s.replace("\\", "\\\\").replace("'", "\\'").replace("\n", "\\n").replace("\r", "\\r")
    return f"'{escaped}'"


def _parse_call(text: str) -> ast.Call:
    src = text.strip()
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError:
        # Typesetting sometimes turns the quotes typographic.
        try:
            tree = ast.parse(src.replace("’", "'").replace("‘", "'"), mode="eval")
        except SyntaxError:
            raise ActionParseError(f"not an action call: {text!r}") from None
    call = tree.body
    if not isinstance(call, ast.Call) or not isinstance(call.func, ast.Name):
        raise ActionParseError(f"not an action call: {text!r}")
    if call.args:
        raise ActionParseError(f"positional arguments not allowed: {text!r}")
    return call


def _kwargs(call: ast.Call, text: str) -> Dict[str, str]:
    out = {}
    for kw in call.keywords:
        if kw.arg is None or not isinstance(kw.value, ast.Constant) or not isinstance(kw.value.value, str):
            raise ActionParseError(f"arguments must be string literals: {text!r}")
        out[kw.arg] = kw.value.value
    return out


def parse_unified_action(text: str) -> Action:
    call = _parse_call(text)
    name = call.func.id
    try:
        kind = ActionKind(name)
    except ValueError:
        raise UnknownActionKind(f"unknown action {name!r}") from None
    args = _kwargs(call, text)
    unknown = set(args) - {"point", "content", "direction"}
    if unknown:
        raise UnexpectedField(f"{name} does not take {', '.join(sorted(unknown))}")
    point = parse_point(args["point"]) if "point" in args else None
    direction = None
    if "direction" in args:
        try:
            direction = Direction(args["direction"].strip())
        except ValueError:
            raise ActionParseError(f"bad scroll direction {args['direction']!r}") from None
    content = args.get("content")
    if kind is ActionKind.FINISHED and content is None:
        content = ""
    return Action(kind, point=point, content=content, direction=direction)


def format_unified(action: Action) -> str:
    k = action.kind
    if k in (ActionKind.CLICK, ActionKind.LONG_PRESS):
        return f"{k.value}(point='{format_point(action.point)}')"
    if k is ActionKind.SCROLL:
        return f"scroll(point='{format_point(action.point)}', direction='{action.direction.value}')"
    if k in (ActionKind.TYPE, ActionKind.FINISHED):
        return f"{k.value}(content={_literal(action.content or '')})"
    return f"{k.value}()"


# ------------------------------------------------------------- translators

Translator = Callable[[str], Action]

TRANSLATORS: Dict[str, Translator] = {}

SCREEN_CENTER = Point(540, 1200)
_MARKER_RE = re.compile(r"^\s*Action\s*:", re.MULTILINE)


def register_translator(dialect: str):
    def deco(fn: Translator) -> Translator:
        TRANSLATORS[dialect] = fn
        return fn

    return deco


def _after_marker(raw: str) -> str:
    matches = list(_MARKER_RE.finditer(raw))
    if not matches:
        raise NoActionFound("no 'Action:' line in agent output")
    body = raw[matches[-1].end() :].strip()
    if not body:
        raise NoActionFound("empty 'Action:' line")
    return body


@register_translator("unified")
def _translate_unified(raw: str) -> Action:
    return parse_unified_action(raw)


@register_translator("thought-action")
def _translate_thought_action(raw: str) -> Action:
    """``Thought: ...`` / ``Action: <unified action>`` turns."""
    return parse_unified_action(_after_marker(raw))


_BOX_RE = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")


@register_translator("uitars")
def _translate_uitars(raw: str) -> Action:
    """
    UI-TARS style turns: ``click(start_box='<|box_start|>(x,y)<|box_end|>')``,
    and ``scroll(direction=...)`` without a point, which is anchored at the
    screen center.
    """
    body = _after_marker(raw)
    call = _parse_call(body)
    name = call.func.id
    args = _kwargs(call, body)
    if "start_box" in args:
        m = _BOX_RE.search(args.pop("start_box"))
        if not m:
            raise MalformedPoint(f"bad start_box in {body!r}")
        args["point"] = format_point(Point(int(m.group(1)), int(m.group(2))))
    if name == "scroll" and "point" not in args:
        args["point"] = format_point(SCREEN_CENTER)
    rebuilt = ", ".join(f"{k}={_literal(v)}" for k, v in args.items())
    return parse_unified_action(f"{name}({rebuilt})")


def translate_agent_output(raw: str, dialect: str) -> Action:
    try:
        fn = TRANSLATORS[dialect]
    except KeyError:
        raise UnknownDialect(dialect) from None
    return fn(raw)
