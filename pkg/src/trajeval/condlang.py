"""
XPath-like task-success condition language.

A condition set is one clause, or several numbered clauses that must be
satisfied in order::

    1.//*[(@text="Avatar" or @text="Change Avatar") and bbox_contains_point(../@bounds, $point)]
    2.//*[@text="Shuffle" and bbox_contains_point(../@bounds, $point)]

A clause is a conjunction of ``//*[pred]`` selectors, all evaluated against
the same step.  Each selector asks whether *some* node of that step's tree
satisfies ``pred``.  ``$point`` is the interaction point of the action taken
at the step, and ``../@name`` reads an attribute of the candidate's parent.

Grammar::

    set      := numbered+ | clause
    numbered := INT '.' clause
    clause   := selector ('and' selector)* ['.']
    selector := '//*' '[' orexpr ']'
    orexpr   := andexpr ('or' andexpr)*
    andexpr  := atom ('and' atom)*
    atom     := '(' orexpr ')'
              | attrref '=' STRING
              | 'contains' '(' attrref ',' STRING ')'
              | 'bbox_contains_point' '(' boundsref ',' '$point' ')'

Strings may be quoted with ``"``, ``'`` or typographic double quotes; the
printer always emits ``"`` where possible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, List, Optional, Tuple, Union

from .uitree import KNOWN_ATTRS, Point, UiNode, UiTree, bounds_contains


class ConditionError(ValueError):
    """Base class for condition parsing errors."""

    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class ConditionSyntaxError(ConditionError):
    pass


class UnknownAttribute(ConditionError):
    pass


class UnknownFunction(ConditionError):
    pass


# --------------------------------------------------------------------- AST


class Axis(str, Enum):
    SELF = "self"
    PARENT = "parent"


@dataclass(frozen=True)
class AttrRef:
    axis: Axis
    name: str

    def __str__(self) -> str:
        return ("../@" if self.axis is Axis.PARENT else "@") + self.name


@dataclass(frozen=True)
class Equals:
    ref: AttrRef
    value: str


@dataclass(frozen=True)
class Contains:
    ref: AttrRef
    value: str


@dataclass(frozen=True)
class BboxContainsPoint:
    ref: AttrRef


@dataclass(frozen=True)
class And:
    left: "Pred"
    right: "Pred"


@dataclass(frozen=True)
class Or:
    left: "Pred"
    right: "Pred"


Pred = Union[And, Or, Equals, Contains, BboxContainsPoint]


@dataclass(frozen=True)
class Selector:
    predicate: Pred


@dataclass(frozen=True)
class Clause:
    selectors: Tuple[Selector, ...]
    source_text: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.selectors:
            raise ValueError("clause needs at least one selector")


@dataclass(frozen=True)
class ConditionSet:
    clauses: Tuple[Clause, ...]
    source_text: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.clauses:
            raise ValueError("condition set needs at least one clause")

    def __len__(self) -> int:
        return len(self.clauses)

    def __str__(self) -> str:
        return pretty_print(self)


# ------------------------------------------------------------------- lexer

_OPEN_QUOTES = {'"': '"', "'": "'", "“": "“”", "”": "“”"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<select>//\*)
  | (?P<pattr>\.\./@[A-Za-z][A-Za-z0-9_-]*)
  | (?P<attr>@[A-Za-z][A-Za-z0-9_-]*)
  | (?P<var>\$[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_-]*)
  | (?P<punct>[\[\](),=.])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch in _OPEN_QUOTES:
            closers = _OPEN_QUOTES[ch]
            j = i + 1
            while j < len(text) and text[j] not in closers:
                j += 1
            if j >= len(text):
                raise ConditionSyntaxError("unterminated string literal", i)
            tokens.append(Token("str", text[i + 1 : j], i))
            i = j + 1
            continue
        m = _TOKEN_RE.match(text, i)
        if not m:
            raise ConditionSyntaxError(f"unexpected character {ch!r}", i)
        kind = m.lastgroup
        if kind != "ws":
            tok = m.group()
            if kind == "punct":
                kind = tok
            elif kind == "ident" and tok in ("and", "or"):
                kind = tok
            tokens.append(Token(kind, tok, i))
        i = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


# ------------------------------------------------------------------ parser

_FUNCTIONS = ("contains", "bbox_contains_point")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, what: Optional[str] = None) -> Token:
        if self.tok.kind != kind:
            shown = self.tok.text or "end of input"
            raise ConditionSyntaxError(f"expected {what or kind!r}, found {shown!r}", self.tok.pos)
        return self.advance()

    # set := numbered+ | clause
    def parse_set(self) -> ConditionSet:
        clauses: List[Clause] = []
        if self.tok.kind == "int":
            expected = 1
            while self.tok.kind == "int":
                num = self.advance()
                if int(num.text) != expected:
                    raise ConditionSyntaxError(
                        f"clause numbered {num.text}, expected {expected}", num.pos
                    )
                self.expect(".", "'.' after clause number")
                clauses.append(self.parse_clause())
                expected += 1
        else:
            clauses.append(self.parse_clause())
        self.expect("eof", "end of input")
        return ConditionSet(tuple(clauses), source_text=self.text)

    def parse_clause(self) -> Clause:
        start = self.tok.pos
        selectors = [self.parse_selector()]
        while self.tok.kind == "and":
            self.advance()
            selectors.append(self.parse_selector())
        end = self.tok.pos
        # Sentence-final period as written in task tables.
        if self.tok.kind == "." and self.peek().kind in ("int", "eof"):
            self.advance()
        return Clause(tuple(selectors), source_text=self.text[start:end].strip())

    def parse_selector(self) -> Selector:
        self.expect("select", "'//*'")
        self.expect("[", "'['")
        pred = self.parse_or()
        self.expect("]", "']'")
        return Selector(pred)

    def parse_or(self) -> Pred:
        left = self.parse_and()
        while self.tok.kind == "or":
            self.advance()
            left = Or(left, self.parse_and())
        return left

    def parse_and(self) -> Pred:
        left = self.parse_atom()
        while self.tok.kind == "and":
            self.advance()
            left = And(left, self.parse_atom())
        return left

    def parse_attrref(self) -> AttrRef:
        tok = self.tok
        if tok.kind == "attr":
            axis, name = Axis.SELF, tok.text[1:]
        elif tok.kind == "pattr":
            axis, name = Axis.PARENT, tok.text[4:]
        else:
            raise ConditionSyntaxError(f"expected attribute reference, found {tok.text!r}", tok.pos)
        if name not in KNOWN_ATTRS:
            raise UnknownAttribute(f"unknown attribute {name!r}", tok.pos)
        self.advance()
        return AttrRef(axis, name)

    def parse_atom(self) -> Pred:
        tok = self.tok
        if tok.kind == "(":
            self.advance()
            inner = self.parse_or()
            self.expect(")", "')'")
            return inner
        if tok.kind in ("attr", "pattr"):
            ref = self.parse_attrref()
            self.expect("=", "'='")
            return Equals(ref, self.expect("str", "string literal").text)
        if tok.kind == "ident":
            if tok.text not in _FUNCTIONS:
                raise UnknownFunction(f"unknown function {tok.text!r}", tok.pos)
            self.advance()
            self.expect("(", "'('")
            ref = self.parse_attrref()
            self.expect(",", "','")
            if tok.text == "contains":
                value = self.expect("str", "string literal").text
                self.expect(")", "')'")
                return Contains(ref, value)
            if ref.name != "bounds":
                raise ConditionSyntaxError(
                    "bbox_contains_point needs a bounds reference", self.tokens[self.i - 2].pos
                )
            var = self.expect("var", "'$point'")
            if var.text != "$point":
                raise ConditionSyntaxError(f"unknown variable {var.text!r}", var.pos)
            self.expect(")", "')'")
            return BboxContainsPoint(ref)
        raise ConditionSyntaxError(f"unexpected {tok.text or 'end of input'!r}", tok.pos)


def parse_condition_set(text: str) -> ConditionSet:
    return _Parser(text).parse_set()


def parse_predicate(text: str) -> Pred:
    """Parse a bare predicate (the body of one ``//*[...]``)."""
    p = _Parser(text)
    pred = p.parse_or()
    p.expect("eof", "end of input")
    return pred


# ----------------------------------------------------------------- printer


def _quote(value: str) -> str:
    if '"' not in value:
        return f'"{value}"'
    if "'" not in value:
        return f"'{value}'"
    return f"“{value}”"


def format_pred(pred: Pred) -> str:
    # Left-associative chains print bare; anything that would re-associate
    # differently gets parentheses.
    if isinstance(pred, And):
        left = format_pred(pred.left)
        right = format_pred(pred.right)
        if isinstance(pred.left, Or):
            left = f"({left})"
        if isinstance(pred.right, (And, Or)):
            right = f"({right})"
        return f"{left} and {right}"
    if isinstance(pred, Or):
        right = format_pred(pred.right)
        if isinstance(pred.right, Or):
            right = f"({right})"
        return f"{format_pred(pred.left)} or {right}"
    if isinstance(pred, Equals):
        return f"{pred.ref}={_quote(pred.value)}"
    if isinstance(pred, Contains):
        return f"contains({pred.ref}, {_quote(pred.value)})"
    if isinstance(pred, BboxContainsPoint):
        return f"bbox_contains_point({pred.ref}, $point)"
    raise TypeError(f"not a predicate: {pred!r}")


def format_clause(clause: Clause) -> str:
    return " and ".join(f"//*[{format_pred(s.predicate)}]" for s in clause.selectors)


def pretty_print(cs: ConditionSet) -> str:
    if len(cs.clauses) == 1:
        return format_clause(cs.clauses[0])
    return "\n".join(f"{i}.{format_clause(c)}" for i, c in enumerate(cs.clauses, 1))


# --------------------------------------------------------------- evaluator


@dataclass(frozen=True)
class NodeMatch:
    index: int  # position in document order
    node: UiNode


@dataclass(frozen=True)
class ClauseResult:
    matched: bool
    per_selector: Tuple[bool, ...]


def _resolve(ref: AttrRef, node: UiNode) -> Optional[UiNode]:
    return node if ref.axis is Axis.SELF else node.parent


def eval_pred(pred: Pred, node: UiNode, point: Optional[Point]) -> bool:
    if isinstance(pred, And):
        return eval_pred(pred.left, node, point) and eval_pred(pred.right, node, point)
    if isinstance(pred, Or):
        return eval_pred(pred.left, node, point) or eval_pred(pred.right, node, point)
    target = _resolve(pred.ref, node)
    if target is None:
        return False
    if isinstance(pred, Equals):
        return target.attr(pred.ref.name) == pred.value
    if isinstance(pred, Contains):
        value = target.attr(pred.ref.name)
        return value is not None and pred.value in value
    if isinstance(pred, BboxContainsPoint):
        if point is None or target.bounds is None:
            return False
        return bounds_contains(target.bounds, point)
    raise TypeError(f"not a predicate: {pred!r}")


def eval_selector(sel: Selector, tree: UiTree, point: Optional[Point] = None) -> Optional[NodeMatch]:
    for i, node in enumerate(tree):
        if eval_pred(sel.predicate, node, point):
            return NodeMatch(i, node)
    return None


def eval_clause(clause: Clause, tree: UiTree, point: Optional[Point] = None) -> ClauseResult:
    hits = tuple(eval_selector(s, tree, point) is not None for s in clause.selectors)
    return ClauseResult(all(hits), hits)


def iter_atoms(pred: Pred) -> Iterator[Pred]:
    if isinstance(pred, (And, Or)):
        yield from iter_atoms(pred.left)
        yield from iter_atoms(pred.right)
    else:
        yield pred
