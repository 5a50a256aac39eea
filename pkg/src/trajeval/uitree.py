"""
Parsing of device UI-hierarchy dumps.

A dump is the XML produced by ``uiautomator dump``: a ``<hierarchy>`` root
holding nested ``<node>`` elements whose attributes describe one on-screen
element each.  This module turns it into an attributed tree with parent
links and provides the geometric primitives conditions are built on.
"""

from __future__ import annotations

import hashlib
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple


class MalformedXml(ValueError):
    """The dump is not well-formed XML."""

    def __init__(self, message: str, position: Tuple[int, int] = (0, 0)):
        super().__init__(f"{message} (line {position[0]}, column {position[1]})")
        self.position = position


class MalformedBounds(ValueError):
    """A bounds string does not have the ``[x1,y1][x2,y2]`` shape."""


@dataclass(frozen=True)
class Point:
    x: int
    y: int


@dataclass(frozen=True)
class Bounds:
    """Axis-aligned screen rectangle, origin top-left, edges inclusive."""

    x1: int
    y1: int
    x2: int
    y2: int

    def __post_init__(self):
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise MalformedBounds(f"inverted interval in {self.format()}")

    def format(self) -> str:
        return f"[{self.x1},{self.y1}][{self.x2},{self.y2}]"

    def contains(self, p: Point) -> bool:
        return bounds_contains(self, p)

    @property
    def center(self) -> Point:
        return Point((self.x1 + self.x2) // 2, (self.y1 + self.y2) // 2)

    def __str__(self) -> str:
        return self.format()


_BOUNDS_RE = re.compile(r"^\s*\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\s*\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\s*$")


def parse_bounds(s: str) -> Bounds:
    """Parse ``"[x1,y1][x2,y2]"``; whitespace around numbers is tolerated."""
    m = _BOUNDS_RE.match(s)
    if not m:
        raise MalformedBounds(f"not a bounds string: {s!r}")
    x1, y1, x2, y2 = (int(g) for g in m.groups())
    if x1 > x2 or y1 > y2:
        raise MalformedBounds(f"inverted interval: {s!r}")
    return Bounds(x1, y1, x2, y2)


def format_bounds(b: Bounds) -> str:
    return b.format()


def bounds_contains(b: Bounds, p: Point) -> bool:
    return b.x1 <= p.x <= b.x2 and b.y1 <= p.y <= b.y2


# Condition attribute name -> UiNode field.
STRING_ATTRS = {
    "text": "text",
    "resource-id": "resource_id",
    "class": "class_name",
    "content-desc": "content_desc",
    "package": "package",
}
BOOL_ATTRS = {"selected": "selected", "clickable": "clickable"}
KNOWN_ATTRS = frozenset([*STRING_ATTRS, *BOOL_ATTRS, "bounds"])


@dataclass(eq=False)
class UiNode:
    text: str = ""
    resource_id: str = ""
    class_name: str = ""
    content_desc: str = ""
    package: str = ""
    selected: bool = False
    clickable: bool = False
    bounds: Optional[Bounds] = None
    bounds_raw: str = ""
    children: List["UiNode"] = field(default_factory=list)
    parent: Optional["UiNode"] = field(default=None, repr=False)
    attrib: Dict[str, str] = field(default_factory=dict, repr=False)

    def attr(self, name: str) -> Optional[str]:
        """
        Value of a dump attribute as a condition sees it.

        Booleans read as ``"true"``/``"false"``; ``bounds`` reads the raw
        attribute text.  Unknown names return None.
        """
        if name in STRING_ATTRS:
            return getattr(self, STRING_ATTRS[name])
        if name in BOOL_ATTRS:
            return "true" if getattr(self, BOOL_ATTRS[name]) else "false"
        if name == "bounds":
            return self.bounds_raw
        return None

    def iter(self) -> Iterator["UiNode"]:
        """Pre-order (document order) traversal rooted here."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def ancestors(self) -> Iterator["UiNode"]:
        node = self.parent
        while node is not None:
            yield node
            node = node.parent

    @property
    def depth(self) -> int:
        return sum(1 for _ in self.ancestors())


@dataclass(frozen=True, eq=False)
class UiTree:
    root: UiNode
    source_digest: str

    def nodes(self) -> List[UiNode]:
        return list(self.root.iter())

    def __iter__(self) -> Iterator[UiNode]:
        return self.root.iter()

    def __len__(self) -> int:
        return sum(1 for _ in self.root.iter())

    def find(self, **attrs) -> Optional[UiNode]:
        """First node whose fields equal every keyword given, e.g. ``find(text="OK")``."""
        for node in self.root.iter():
            if all(getattr(node, k) == v for k, v in attrs.items()):
                return node
        return None


def digest_xml(xml_text: str) -> str:
    return hashlib.sha256(xml_text.encode("utf-8")).hexdigest()


def _node_from_element(el: ET.Element, parent: Optional[UiNode]) -> UiNode:
    a = el.attrib
    raw = a.get("bounds", "")
    node = UiNode(
        text=a.get("text", ""),
        resource_id=a.get("resource-id", ""),
        class_name=a.get("class", ""),
        content_desc=a.get("content-desc", ""),
        package=a.get("package", ""),
        selected=a.get("selected", "false") == "true",
        clickable=a.get("clickable", "false") == "true",
        bounds=parse_bounds(raw) if "bounds" in a else None,
        bounds_raw=raw,
        parent=parent,
        attrib=dict(a),
    )
    return node


def parse_ui_tree(xml_text: str) -> UiTree:
    """
    Parse a UI dump into a UiTree.

    Every XML element becomes a node, including the ``<hierarchy>`` wrapper,
    so the tree always has exactly one root.

    Raises:
        MalformedXml: on XML syntax errors; ``position`` is (line, column).
        MalformedBounds: when a ``bounds`` attribute is present but invalid.
    """
    try:
        root_el = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc), getattr(exc, "position", (0, 0))) from None

    root = _node_from_element(root_el, None)
    # Iterative build keeps very deep dumps off the recursion limit.
    stack = [(root_el, root)]
    while stack:
        el, node = stack.pop()
        for child_el in el:
            child = _node_from_element(child_el, node)
            node.children.append(child)
            stack.append((child_el, child))
    return UiTree(root=root, source_digest=digest_xml(xml_text))
