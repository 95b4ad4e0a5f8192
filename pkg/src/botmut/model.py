"""Platform-agnostic chatbot meta-model and static validation.

A :class:`ChatbotProject` holds intents (with their NLU training phrases),
entities, slots, actions, response templates, flows (stories and rules) and
the session configuration. Models are immutable and may describe invalid
bots: mutants are defective on purpose, so judgment is deferred to
:func:`validate`.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

__all__ = [
    "ActionDef",
    "ActionStep",
    "ChatbotProject",
    "DuplicateName",
    "Entity",
    "EntityAnnotation",
    "EntityValue",
    "Flow",
    "Intent",
    "IntentStep",
    "Issue",
    "OpaqueBlock",
    "OtherStep",
    "ResponseTemplate",
    "SessionConfig",
    "Slot",
    "SlotMapping",
    "TrainingPhrase",
    "UnknownElement",
    "UseSite",
    "ValidationReport",
    "placeholders",
    "usage_sites",
    "validate",
]

BROKEN = "broken"
WARNING = "warning"

SLOT_KINDS = ("text", "categorical", "boolean")
ACTION_KINDS = ("response", "custom")
FLOW_KINDS = ("story", "rule")

_ANNOTATION = re.compile(r"\[([^\[\]]+)\]\(([^()\s]+)\)")
_PLACEHOLDER = re.compile(r"\{([A-Za-z_][\w-]*)\}")


class DuplicateName(ValueError):
    """Two declarations of the same kind share a name."""


class UnknownElement(LookupError):
    """A usage query named an element the project does not declare."""


@dataclass(frozen=True)
class EntityAnnotation:
    start: int
    end: int
    entity: str
    value: str


@dataclass(frozen=True)
class TrainingPhrase:
    """One NLU example: surface text plus inline entity annotations."""

    text: str
    annotations: tuple[EntityAnnotation, ...] = ()

    @classmethod
    def parse(cls, markup: str) -> "TrainingPhrase":
        """Parse ``I pick [rock](choice)`` style markup."""
        parts = []
        annotations = []
        pos = 0
        length = 0
        for m in _ANNOTATION.finditer(markup):
            literal = markup[pos : m.start()]
            parts.append(literal)
            length += len(literal)
            value, entity = m.group(1), m.group(2)
            annotations.append(EntityAnnotation(length, length + len(value), entity, value))
            parts.append(value)
            length += len(value)
            pos = m.end()
        parts.append(markup[pos:])
        return cls("".join(parts), tuple(annotations))

    def markup(self) -> str:
        out = []
        pos = 0
        for a in self.annotations:
            out.append(self.text[pos : a.start])
            out.append(f"[{self.text[a.start:a.end]}]({a.entity})")
            pos = a.end
        out.append(self.text[pos:])
        return "".join(out)

    def without_entity(self, entity: str) -> "TrainingPhrase":
        return TrainingPhrase(self.text, tuple(a for a in self.annotations if a.entity != entity))


@dataclass(frozen=True)
class Intent:
    """An intent and its NLU block.

    ``declared`` is the domain declaration, ``trained`` the presence of an
    NLU block; the two drift apart in mutants.
    """

    name: str
    examples: tuple[TrainingPhrase, ...] = ()
    declared: bool = True
    trained: bool = True
    extra: str = ""
    nlu_extra: str = ""


@dataclass(frozen=True)
class EntityValue:
    value: str
    synonyms: tuple[str, ...] = ()


@dataclass(frozen=True)
class Entity:
    name: str
    values: tuple[EntityValue, ...] = ()
    extra: str = ""


@dataclass(frozen=True)
class SlotMapping:
    entity: str
    extra: str = ""


@dataclass(frozen=True)
class Slot:
    name: str
    kind: str = "text"
    values: tuple[str, ...] = ()
    mappings: tuple[SlotMapping, ...] = ()
    extra: str = ""

    def __post_init__(self):
        if self.kind not in SLOT_KINDS:
            raise ValueError(f"slot {self.name!r}: unsupported kind {self.kind!r}")


@dataclass(frozen=True)
class ActionDef:
    """A declared action. Custom actions are simulated by uttering ``utters``."""

    name: str
    kind: str = "custom"
    utters: tuple[str, ...] = ()
    extra: str = ""

    def __post_init__(self):
        if self.kind not in ACTION_KINDS:
            raise ValueError(f"action {self.name!r}: unsupported kind {self.kind!r}")


@dataclass(frozen=True)
class ResponseTemplate:
    name: str
    variants: tuple[str, ...] = ()
    extra: str = ""


@dataclass(frozen=True)
class IntentStep:
    intent: str
    entities: tuple[tuple[str, str], ...] = ()

    kind = "intent"


@dataclass(frozen=True)
class ActionStep:
    action: str

    kind = "action"


@dataclass(frozen=True)
class OtherStep:
    """A flow step this model does not interpret (``slot_was_set`` etc.)."""

    raw: str

    kind = "other"


FlowStep = Union[IntentStep, ActionStep, OtherStep]


@dataclass(frozen=True)
class Flow:
    kind: str
    name: str
    steps: tuple[FlowStep, ...] = ()
    extra: str = ""

    def __post_init__(self):
        if self.kind not in FLOW_KINDS:
            raise ValueError(f"flow {self.name!r}: unsupported kind {self.kind!r}")
        object.__setattr__(self, "steps", tuple(self.steps))

    def intent_indices(self) -> list[int]:
        return [i for i, s in enumerate(self.steps) if isinstance(s, IntentStep)]

    def intents(self) -> tuple[str, ...]:
        return tuple(s.intent for s in self.steps if isinstance(s, IntentStep))

    def actions(self) -> tuple[str, ...]:
        return tuple(s.action for s in self.steps if isinstance(s, ActionStep))

    def interactions(self) -> list[tuple[int, int]]:
        """Half-open step ranges: an intent-step and the action-run after it.

        Uninterpreted steps inside the run are carried along with it.
        """
        ranges = []
        for i in self.intent_indices():
            end = i + 1
            while end < len(self.steps) and not isinstance(self.steps[end], IntentStep):
                end += 1
            ranges.append((i, end))
        return ranges

    def action_run(self, intent_index: int) -> tuple[str, ...]:
        run = []
        for s in self.steps[intent_index + 1 :]:
            if isinstance(s, IntentStep):
                break
            if isinstance(s, ActionStep):
                run.append(s.action)
        return tuple(run)


@dataclass(frozen=True)
class SessionConfig:
    expiration_minutes: float = 60
    carry_over_slots: bool = True

    def __post_init__(self):
        if self.expiration_minutes < 0:
            raise ValueError("expiration_minutes must be >= 0")


@dataclass(frozen=True)
class OpaqueBlock:
    """Content carried through verbatim.

    ``section`` is empty for whole files and top-level blocks of recognized
    files; ``"nlu"`` marks an uninterpreted item of the NLU list.
    """

    path: str
    content: bytes
    section: str = ""


def _check_unique(items: Iterable, what: str, key=lambda x: x.name) -> None:
    seen = set()
    for item in items:
        k = key(item)
        if k in seen:
            raise DuplicateName(f"duplicate {what} {k!r}")
        seen.add(k)


@dataclass(frozen=True, eq=False)
class ChatbotProject:
    """One chatbot. Equality ignores the declaration order of named collections."""

    intents: tuple[Intent, ...] = ()
    entities: tuple[Entity, ...] = ()
    slots: tuple[Slot, ...] = ()
    actions: tuple[ActionDef, ...] = ()
    responses: tuple[ResponseTemplate, ...] = ()
    flows: tuple[Flow, ...] = ()
    session: SessionConfig = field(default_factory=SessionConfig)
    opaque: tuple[OpaqueBlock, ...] = ()
    version: Optional[str] = None

    def __post_init__(self):
        for name in ("intents", "entities", "slots", "actions", "responses", "flows", "opaque"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        _check_unique(self.intents, "intent")
        _check_unique(self.entities, "entity")
        _check_unique(self.slots, "slot")
        _check_unique(list(self.actions) + list(self.responses), "action/response")
        _check_unique(self.flows, "flow", key=lambda f: (f.kind, f.name))

    def _key(self):
        by_name = lambda xs: tuple(sorted(xs, key=lambda x: x.name))  # noqa: E731
        return (
            by_name(self.intents),
            by_name(self.entities),
            by_name(self.slots),
            by_name(self.actions),
            by_name(self.responses),
            tuple(sorted(self.flows, key=lambda f: (f.kind, f.name))),
            self.session,
            tuple(sorted(self.opaque, key=lambda b: (b.path, b.section, b.content))),
            self.version,
        )

    def __eq__(self, other):
        if not isinstance(other, ChatbotProject):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def replace(self, **changes) -> "ChatbotProject":
        return dataclasses.replace(self, **changes)

    @property
    def rules(self) -> tuple[Flow, ...]:
        return tuple(f for f in self.flows if f.kind == "rule")

    @property
    def stories(self) -> tuple[Flow, ...]:
        return tuple(f for f in self.flows if f.kind == "story")

    def intent(self, name: str) -> Optional[Intent]:
        return next((i for i in self.intents if i.name == name), None)

    def entity(self, name: str) -> Optional[Entity]:
        return next((e for e in self.entities if e.name == name), None)

    def slot(self, name: str) -> Optional[Slot]:
        return next((s for s in self.slots if s.name == name), None)

    def action(self, name: str) -> Optional[ActionDef]:
        return next((a for a in self.actions if a.name == name), None)

    def response(self, name: str) -> Optional[ResponseTemplate]:
        return next((r for r in self.responses if r.name == name), None)

    def flow(self, kind: str, name: str) -> Optional[Flow]:
        return next((f for f in self.flows if f.kind == kind and f.name == name), None)


def placeholders(text: str) -> list[str]:
    return _PLACEHOLDER.findall(text)


# -- validation --------------------------------------------------------------


@dataclass(frozen=True)
class Issue:
    severity: str
    code: str
    message: str
    location: str

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...] = ()

    @property
    def broken(self) -> tuple[Issue, ...]:
        return tuple(i for i in self.issues if i.severity == BROKEN)

    @property
    def deployable(self) -> bool:
        return not self.broken

    def codes(self) -> list[str]:
        return [i.code for i in self.issues]


def _flow_loc(flow: Flow, index: Optional[int] = None) -> str:
    loc = f"{flow.kind}s/{flow.name}"
    return loc if index is None else f"{loc}/steps/{index}"


def _issues(project: ChatbotProject) -> Iterator[Issue]:
    declared_intents = {i.name for i in project.intents if i.declared}
    entities = {e.name for e in project.entities}
    slots = {s.name for s in project.slots}
    actions = {a.name for a in project.actions} | {r.name for r in project.responses}
    responses = {r.name for r in project.responses}

    for intent in project.intents:
        loc = f"nlu/{intent.name}"
        if intent.trained and not intent.declared:
            yield Issue(BROKEN, "UndefinedIntentRef",
                        f"NLU block for intent {intent.name!r} which the domain does not declare", loc)
        if intent.declared and not (intent.trained and intent.examples):
            yield Issue(WARNING, "IntentWithoutExamples",
                        f"intent {intent.name!r} has no training phrases", loc)
        for n, phrase in enumerate(intent.examples):
            for a in phrase.annotations:
                if a.entity not in entities:
                    yield Issue(BROKEN, "UndefinedEntityRef",
                                f"annotation [{a.value}]({a.entity}) names an undeclared entity",
                                f"{loc}/examples/{n}")

    for slot in project.slots:
        loc = f"slots/{slot.name}"
        if slot.kind == "categorical" and not slot.values:
            yield Issue(WARNING, "CategoricalSlotWithoutValues",
                        f"categorical slot {slot.name!r} lists no values", loc)
        if not slot.mappings and not slot.extra:
            yield Issue(WARNING, "SlotWithoutMapping", f"slot {slot.name!r} is never filled", loc)
        for n, m in enumerate(slot.mappings):
            if m.entity not in entities:
                yield Issue(BROKEN, "UndefinedEntityRef",
                            f"slot {slot.name!r} maps from undeclared entity {m.entity!r}",
                            f"{loc}/mappings/{n}")

    for resp in project.responses:
        loc = f"responses/{resp.name}"
        if not resp.variants:
            yield Issue(WARNING, "EmptyResponse", f"response {resp.name!r} has no variants", loc)
        for n, text in enumerate(resp.variants):
            for ph in placeholders(text):
                if ph not in slots:
                    yield Issue(BROKEN, "UndefinedSlotRef",
                                f"response {resp.name!r} interpolates undeclared slot {ph!r}",
                                f"{loc}/variants/{n}")

    for action in project.actions:
        for name in action.utters:
            if name not in responses:
                yield Issue(BROKEN, "UndefinedActionRef",
                            f"action {action.name!r} utters undeclared response {name!r}",
                            f"actions/{action.name}")

    for flow in project.flows:
        if not flow.steps:
            yield Issue(BROKEN, "EmptyFlow", f"{flow.kind} {flow.name!r} has no steps", _flow_loc(flow))
            continue
        for n, step in enumerate(flow.steps):
            if isinstance(step, IntentStep):
                if step.intent not in declared_intents:
                    yield Issue(BROKEN, "UndefinedIntentRef",
                                f"{flow.kind} {flow.name!r} uses undeclared intent {step.intent!r}",
                                _flow_loc(flow, n))
                for ent, _ in step.entities:
                    if ent not in entities:
                        yield Issue(BROKEN, "UndefinedEntityRef",
                                    f"{flow.kind} {flow.name!r} binds undeclared entity {ent!r}",
                                    _flow_loc(flow, n))
            elif isinstance(step, ActionStep) and step.action not in actions:
                yield Issue(BROKEN, "UndefinedActionRef",
                            f"{flow.kind} {flow.name!r} runs undeclared action {step.action!r}",
                            _flow_loc(flow, n))
        if flow.kind == "rule":
            first = next((s for s in flow.steps if not isinstance(s, OtherStep)), None)
            if isinstance(first, ActionStep):
                yield Issue(BROKEN, "DanglingRuleAction",
                            f"rule {flow.name!r} starts with action {first.action!r} and no triggering intent",
                            _flow_loc(flow, 0))

    rules = project.rules
    for i, a in enumerate(rules):
        for b in rules[i + 1 :]:
            if a.steps and b.steps and a.intents() == b.intents() and a.actions() != b.actions():
                yield Issue(BROKEN, "ContradictoryRules",
                            f"rules {a.name!r} and {b.name!r} share triggers {list(a.intents())} "
                            f"but prescribe different actions",
                            f"rules/{a.name}")


def validate(project: ChatbotProject) -> ValidationReport:
    """Report every detected problem; never raises on a defective model."""
    return ValidationReport(tuple(_issues(project)))


# -- usage -------------------------------------------------------------------


@dataclass(frozen=True)
class UseSite:
    role: str
    path: str


ELEMENT_KINDS = ("intent", "entity", "slot", "action")


def usage_sites(project: ChatbotProject, kind: str, name: str) -> list[UseSite]:
    """Every place that references the named element.

    ``kind`` is one of ``intent``, ``entity``, ``slot`` or ``action``
    (response templates count as actions).
    """
    if kind not in ELEMENT_KINDS:
        raise ValueError(f"unknown element kind {kind!r}")
    known = {
        "intent": project.intent(name) is not None,
        "entity": project.entity(name) is not None,
        "slot": project.slot(name) is not None,
        "action": project.action(name) is not None or project.response(name) is not None,
    }[kind]
    if not known:
        raise UnknownElement(f"{kind} {name!r} is not declared")

    sites = []
    if kind == "intent":
        intent = project.intent(name)
        if intent.trained:
            sites.append(UseSite("nlu", f"nlu/{name}"))
    if kind == "entity":
        for slot in project.slots:
            for n, m in enumerate(slot.mappings):
                if m.entity == name:
                    sites.append(UseSite("domain", f"slots/{slot.name}/mappings/{n}"))
        for intent in project.intents:
            if any(a.entity == name for p in intent.examples for a in p.annotations):
                sites.append(UseSite("nlu", f"nlu/{intent.name}/annotations"))
    if kind == "slot":
        for resp in project.responses:
            for n, text in enumerate(resp.variants):
                if name in placeholders(text):
                    sites.append(UseSite("domain", f"responses/{resp.name}/variants/{n}"))
    if kind == "action":
        for action in project.actions:
            if name in action.utters:
                sites.append(UseSite("domain", f"actions/{action.name}/utters"))

    for flow in project.flows:
        role = "stories" if flow.kind == "story" else "rules"
        for n, step in enumerate(flow.steps):
            hit = (
                (kind == "intent" and isinstance(step, IntentStep) and step.intent == name)
                or (kind == "entity" and isinstance(step, IntentStep)
                    and any(e == name for e, _ in step.entities))
                or (kind == "action" and isinstance(step, ActionStep) and step.action == name)
            )
            if hit:
                sites.append(UseSite(role, _flow_loc(flow, n)))
    return sites
