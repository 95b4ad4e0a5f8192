"""The eleven conversational mutation operators.

Each operator enumerates its applicable sites in a project; applying one
site yields exactly one mutant. All functions are pure.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from dataclasses import replace as _with
from typing import Optional, Union

from .model import ChatbotProject, Flow, IntentStep

__all__ = [
    "OperatorCategory",
    "OperatorId",
    "MutationSite",
    "StaleSite",
    "apply",
    "category",
    "enumerate_all",
    "enumerate_sites",
    "parse_operators",
]


class OperatorId(str, enum.Enum):
    removeIntentFromNLU = "removeIntentFromNLU"
    removeEntity = "removeEntity"
    removeRule = "removeRule"
    removeStory = "removeStory"
    removeIntentFromStory = "removeIntentFromStory"
    removeIntentFromRule = "removeIntentFromRule"
    removeInteractionFromRule = "removeInteractionFromRule"
    removeInteractionFromStory = "removeInteractionFromStory"
    changeSessionExpTimeInt = "changeSessionExpTimeInt"
    changeSessionExpTimeFloat = "changeSessionExpTimeFloat"
    toggleCarryOverSlots = "toggleCarryOverSlots"

    def __str__(self):
        return self.value


class OperatorCategory(str, enum.Enum):
    ChatbotStructure = "ChatbotStructure"
    Flow = "Flow"

    def __str__(self):
        return self.value


OPERATORS: tuple[OperatorId, ...] = tuple(OperatorId)
_STRUCTURE = OPERATORS[:4]


def category(op: OperatorId) -> OperatorCategory:
    op = OperatorId(op)
    return OperatorCategory.ChatbotStructure if op in _STRUCTURE else OperatorCategory.Flow


def parse_operators(names) -> list[OperatorId]:
    """Validate operator spellings; unknown names raise ``ValueError``."""
    ops = []
    for name in names:
        try:
            ops.append(OperatorId(name))
        except ValueError:
            raise ValueError(f"unknown operator {name!r}") from None
    return [op for op in OPERATORS if op in ops]


class StaleSite(LookupError):
    """The site's target does not resolve in the project it was applied to."""


@dataclass(frozen=True)
class MutationSite:
    """One applicable location.

    ``target`` is a typed path: ``("intent", name)``, ``("entity", name)``,
    ``("rule"|"story", flow)``, ``("rule"|"story", flow, step)`` for a single
    intent-step, ``("rule"|"story", flow, start, end)`` for an interaction, or
    ``("session", field, direction)``.
    """

    operator: OperatorId
    target: tuple
    payload: Optional[Union[float, bool]] = None

    def describe(self) -> str:
        t = self.target
        if t[0] in ("intent", "entity"):
            return f"{t[0]}:{t[1]}"
        if t[0] == "session":
            if t[1] == "carry_over_slots":
                return f"carry_over_slots_to_new_session -> {str(self.payload).lower()}"
            value = int(self.payload) if float(self.payload).is_integer() else self.payload
            return f"session_expiration_time {t[2]} -> {value}"
        if len(t) == 2:
            return f"{t[0]}:{t[1]}"
        if len(t) == 3:
            return f"{t[0]}:{t[1]}@step{t[2]}"
        return f"{t[0]}:{t[1]}@steps{t[2]}-{t[3] - 1}"


def _flow_kind(op: OperatorId) -> str:
    return "rule" if "Rule" in op.value else "story"


def _int_minutes(v: float, direction: str) -> float:
    return v + 60 if direction == "extend" else max(1, v - 60)


def _float_minutes(v: float, direction: str) -> float:
    return v * 1.5 if direction == "extend" else v * 0.5


def enumerate_sites(project: ChatbotProject, op: OperatorId) -> list[MutationSite]:
    """Ordered, duplicate-free sites of ``op`` in ``project``."""
    op = OperatorId(op)
    O = OperatorId
    if op is O.removeIntentFromNLU:
        return [MutationSite(op, ("intent", i.name)) for i in project.intents if i.trained]
    if op is O.removeEntity:
        return [MutationSite(op, ("entity", e.name)) for e in project.entities]
    if op in (O.removeRule, O.removeStory):
        kind = _flow_kind(op)
        return [MutationSite(op, (kind, f.name)) for f in project.flows if f.kind == kind]
    if op in (O.removeIntentFromRule, O.removeIntentFromStory):
        kind = _flow_kind(op)
        return [
            MutationSite(op, (kind, f.name, i))
            for f in project.flows
            if f.kind == kind
            for i in f.intent_indices()
        ]
    if op in (O.removeInteractionFromRule, O.removeInteractionFromStory):
        kind = _flow_kind(op)
        return [
            MutationSite(op, (kind, f.name, start, end))
            for f in project.flows
            if f.kind == kind
            for start, end in f.interactions()
        ]
    if op in (O.changeSessionExpTimeInt, O.changeSessionExpTimeFloat):
        change = _int_minutes if op is O.changeSessionExpTimeInt else _float_minutes
        current = project.session.expiration_minutes
        sites = []
        for direction in ("extend", "shorten"):
            new = change(current, direction)
            # A no-op site would duplicate the original.
            if new != current:
                sites.append(MutationSite(op, ("session", "expiration", direction), new))
        return sites
    if op is O.toggleCarryOverSlots:
        return [MutationSite(op, ("session", "carry_over_slots"), not project.session.carry_over_slots)]
    raise AssertionError(op)


def enumerate_all(project: ChatbotProject, ops=OPERATORS) -> list[MutationSite]:
    return [site for op in ops for site in enumerate_sites(project, op)]


def _replace_flow(project: ChatbotProject, old: Flow, new: Optional[Flow]) -> ChatbotProject:
    flows = []
    for f in project.flows:
        if f is old:
            if new is not None:
                flows.append(new)
        else:
            flows.append(f)
    return project.replace(flows=tuple(flows))


def _stale(site: MutationSite, why: str) -> StaleSite:
    return StaleSite(f"{site.operator}: {site.describe()} does not resolve ({why})")


def apply(project: ChatbotProject, site: MutationSite) -> ChatbotProject:
    """Return the mutant obtained by applying ``site`` to ``project``."""
    op = OperatorId(site.operator)
    O = OperatorId
    t = site.target

    if op is O.removeIntentFromNLU:
        intent = project.intent(t[1])
        if intent is None or not intent.trained:
            raise _stale(site, "no NLU block")
        mutated = _with(intent, examples=(), trained=False, nlu_extra="")
        return project.replace(intents=tuple(mutated if i is intent else i for i in project.intents))

    if op is O.removeEntity:
        name = t[1]
        if project.entity(name) is None:
            raise _stale(site, "no such entity")
        intents = []
        for i in project.intents:
            examples = tuple(p.without_entity(name) for p in i.examples)
            intents.append(i if examples == i.examples else _with(i, examples=examples))
        slots = []
        for s in project.slots:
            mappings = tuple(m for m in s.mappings if m.entity != name)
            slots.append(s if mappings == s.mappings else _with(s, mappings=mappings))
        return project.replace(
            entities=tuple(e for e in project.entities if e.name != name),
            intents=tuple(intents),
            slots=tuple(slots),
        )

    if op in (O.removeRule, O.removeStory):
        flow = project.flow(t[0], t[1])
        if flow is None:
            raise _stale(site, f"no such {t[0]}")
        return _replace_flow(project, flow, None)

    if op in (O.removeIntentFromRule, O.removeIntentFromStory):
        flow = project.flow(t[0], t[1])
        index = t[2]
        if flow is None or index >= len(flow.steps) or not isinstance(flow.steps[index], IntentStep):
            raise _stale(site, "no intent-step there")
        steps = flow.steps[:index] + flow.steps[index + 1 :]
        return _replace_flow(project, flow, _with(flow, steps=steps))

    if op in (O.removeInteractionFromRule, O.removeInteractionFromStory):
        flow = project.flow(t[0], t[1])
        start, end = t[2], t[3]
        if flow is None or (start, end) not in flow.interactions():
            raise _stale(site, "no interaction there")
        steps = flow.steps[:start] + flow.steps[end:]
        return _replace_flow(project, flow, _with(flow, steps=steps))

    if op in (O.changeSessionExpTimeInt, O.changeSessionExpTimeFloat):
        direction = t[2]
        change = _int_minutes if op is O.changeSessionExpTimeInt else _float_minutes
        expected = change(project.session.expiration_minutes, direction)
        if expected != site.payload:
            raise _stale(site, f"expiration is {project.session.expiration_minutes}")
        return project.replace(session=_with(project.session, expiration_minutes=site.payload))

    if op is O.toggleCarryOverSlots:
        if site.payload == project.session.carry_over_slots:
            raise _stale(site, "already toggled")
        return project.replace(session=_with(project.session, carry_over_slots=site.payload))

    raise AssertionError(op)
