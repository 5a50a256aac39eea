"""
Seeded environmental noise.

Four kinds of disturbance can hit the action an agent is about to execute:

* ``Repeat``: the action runs twice; the agent sees the result.
* ``Unexecuted``: the action is dropped; the agent sees the unchanged page.
* ``Delay``: the action runs, but the agent sees a loading template page.
  A ``wait()`` reveals the real page; any other action runs on the hidden
  real page first.
* ``PopUp``: the action runs, but the agent sees a pop-up template page.
  Only a click inside the pop-up's close element dismisses it; everything
  else is swallowed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Dict, Optional, Protocol, Sequence, Tuple, Union

from .actions import Action, ActionKind
from .uitree import Bounds, bounds_contains, parse_bounds, parse_ui_tree


class NoTemplatePages(LookupError):
    pass


class NoiseKind(str, Enum):
    REPEAT = "Repeat"
    UNEXECUTED = "Unexecuted"
    DELAY = "Delay"
    POPUP = "PopUp"


ALL_KINDS: Tuple[NoiseKind, ...] = tuple(NoiseKind)


@dataclass(frozen=True)
class NoiseConfig:
    probability: Fraction = Fraction(1, 5)
    enabled_types: Tuple[NoiseKind, ...] = ALL_KINDS
    seed: int = 0
    # Relative per-kind weights; uniform over enabled_types when None.
    weights: Optional[Dict[NoiseKind, Fraction]] = None

    def __post_init__(self):
        p = Fraction(self.probability)
        if not 0 <= p <= 1:
            raise ValueError(f"noise probability {p} outside [0, 1]")
        object.__setattr__(self, "probability", p)
        kinds = tuple(NoiseKind(k) for k in self.enabled_types)
        object.__setattr__(self, "enabled_types", kinds)
        if p > 0 and not kinds:
            raise ValueError("enabled_types must be non-empty when probability > 0")

    @property
    def enabled(self) -> bool:
        return self.probability > 0


OFF = NoiseConfig(probability=Fraction(0))


@dataclass(frozen=True)
class TemplatePage:
    page_id: str
    xml: str


@dataclass(frozen=True)
class PopupPage:
    page_id: str
    xml: str
    close_bounds: Bounds


@dataclass(frozen=True)
class TemplatePageSet:
    delay_pages: Tuple[TemplatePage, ...] = ()
    popup_pages: Tuple[PopupPage, ...] = ()

    def __post_init__(self):
        for page in self.popup_pages:
            tree = parse_ui_tree(page.xml)
            hits = [n for n in tree if n.bounds == page.close_bounds]
            if len(hits) != 1:
                raise ValueError(
                    f"pop-up {page.page_id}: expected one close element at {page.close_bounds}, found {len(hits)}"
                )

    @classmethod
    def from_dict(cls, d) -> "TemplatePageSet":
        return cls(
            delay_pages=tuple(TemplatePage(p["id"], p["xml"]) for p in d.get("delay", [])),
            popup_pages=tuple(
                PopupPage(p["id"], p["xml"], parse_bounds(p["close_bounds"])) for p in d.get("popup", [])
            ),
        )


@dataclass(frozen=True)
class NoiseEvent:
    step_index: int
    kind: NoiseKind
    template_page_id: Optional[str] = None
    resolved: bool = True
    template_xml: Optional[str] = field(default=None, repr=False)
    close_bounds: Optional[Bounds] = None


@dataclass(frozen=True)
class Observation:
    xml: str
    event: Optional[NoiseEvent] = None


class NoisyEnv(Protocol):
    """What noise needs from a device: execute, observe, and the app's template pages."""

    def execute(self, action: Action): ...

    def observe(self) -> str: ...

    @property
    def templates(self) -> TemplatePageSet: ...


def sample_noise(rng: random.Random, config: NoiseConfig) -> Optional[NoiseKind]:
    """
    Decide whether noise fires at this step and which kind.

    Always draws exactly two numbers from ``rng`` (fire?, which?) so that the
    schedule under a seed does not depend on the outcome of earlier draws.
    """
    u_fire = rng.random()
    u_kind = rng.random()
    if not config.enabled or u_fire >= config.probability:
        return None
    kinds = config.enabled_types
    if config.weights:
        weights = [Fraction(config.weights.get(k, 0)) for k in kinds]
    else:
        weights = [Fraction(1)] * len(kinds)
    total = sum(weights)
    if total <= 0:
        return None
    acc = Fraction(0)
    for kind, w in zip(kinds, weights):
        acc += w
        if u_kind < acc / total:
            return kind
    return kinds[-1]


def apply_noise(
    kind: NoiseKind,
    pending_action: Action,
    env: NoisyEnv,
    rng: Optional[random.Random] = None,
    step_index: int = 0,
) -> Observation:
    """Execute ``pending_action`` under ``kind`` and return what the agent sees next."""
    kind = NoiseKind(kind)
    if kind is NoiseKind.REPEAT:
        env.execute(pending_action)
        env.execute(pending_action)
        return Observation(env.observe(), NoiseEvent(step_index, kind))
    if kind is NoiseKind.UNEXECUTED:
        return Observation(env.observe(), NoiseEvent(step_index, kind))

    rng = rng or random.Random(0)
    pages: Sequence[Union[TemplatePage, PopupPage]]
    pages = env.templates.delay_pages if kind is NoiseKind.DELAY else env.templates.popup_pages
    if not pages:
        raise NoTemplatePages(f"no {kind.value} template pages for this app")
    page = pages[rng.randrange(len(pages))]
    env.execute(pending_action)
    event = NoiseEvent(
        step_index,
        kind,
        template_page_id=page.page_id,
        resolved=False,
        template_xml=page.xml,
        close_bounds=getattr(page, "close_bounds", None),
    )
    return Observation(page.xml, event)


def resolve_noise(event: NoiseEvent, next_action: Action, env: NoisyEnv) -> Observation:
    """Handle the agent's action while a Delay or PopUp page masks the device."""
    if event.resolved:
        return Observation(env.observe(), event)
    if event.kind is NoiseKind.DELAY:
        if next_action.kind is not ActionKind.WAIT:
            env.execute(next_action)
        return Observation(env.observe(), replace(event, resolved=True))
    if event.kind is NoiseKind.POPUP:
        p = next_action.point
        if next_action.kind is ActionKind.CLICK and p is not None and bounds_contains(event.close_bounds, p):
            return Observation(env.observe(), replace(event, resolved=True))
        return Observation(event.template_xml, event)
    raise ValueError(f"{event.kind.value} noise has nothing to resolve")


class NoiseInjector:
    """
    Per-trajectory noise state machine.

    The schedule draws from ``seed`` on every executed step, including
    steps where an unresolved event suppresses new noise, so the k-th draw
    always belongs to step k.  Template choices use a separate stream.
    """

    def __init__(self, config: NoiseConfig, seed: Optional[int] = None):
        self.config = config
        self.seed = config.seed if seed is None else seed
        self.rng = random.Random(self.seed)
        self.template_rng = random.Random(f"{self.seed}/templates")
        self.pending: Optional[NoiseEvent] = None
        self.events: list = []

    @property
    def masking(self) -> bool:
        return self.pending is not None and not self.pending.resolved

    def observe(self, env: NoisyEnv) -> str:
        if self.masking:
            return self.pending.template_xml
        return env.observe()

    def step(self, index: int, action: Action, env: NoisyEnv) -> Optional[NoiseKind]:
        """Carry out ``action`` on ``env``; return the noise kind that fired, if any."""
        drawn = sample_noise(self.rng, self.config)
        if self.masking:
            obs = resolve_noise(self.pending, action, env)
            self.pending = obs.event
            return None
        if action.kind is ActionKind.FINISHED:
            return None
        if drawn is None:
            env.execute(action)
            return None
        obs = apply_noise(drawn, action, env, self.template_rng, index)
        self.events.append(obs.event)
        self.pending = obs.event
        return drawn
