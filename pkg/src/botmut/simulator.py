"""Deterministic stand-in for a deployed chatbot.

Intent recognition is exact phrase matching after normalization, with every
declared value or synonym substituted for each entity annotation. Dialogue
policy: a rule whose trigger intent matches wins; otherwise the first story
whose intent sequence starts with the session's story context supplies the
action-run. Time is virtual and advances only through explicit pauses.
"""

from __future__ import annotations

import itertools
import re
from collections import OrderedDict
from dataclasses import dataclass, field, replace
from typing import Optional

from .model import ChatbotProject, Flow, TrainingPhrase

__all__ = [
    "DialogueState",
    "Engine",
    "IntentMatch",
    "TurnOutcome",
    "expand_phrase",
    "match_intent",
    "normalize",
    "step",
]

_WS = re.compile(r"\s+")
_PLACEHOLDER = re.compile(r"\{([A-Za-z_][\w-]*)\}")


def normalize(text: str) -> str:
    return _WS.sub(" ", text.strip().lower())


def expand_phrase(project: ChatbotProject, phrase: TrainingPhrase) -> list[tuple[str, dict]]:
    """All surface forms of a training phrase with the entities each one carries."""
    options = []
    for a in phrase.annotations:
        entity = project.entity(a.entity)
        if entity is None or not entity.values:
            options.append([(a.value, a.value)])
            continue
        opts = []
        for v in entity.values:
            opts.append((v.value, v.value))
            opts.extend((s, v.value) for s in v.synonyms)
        options.append(opts)
    out = []
    for combo in itertools.product(*options):
        parts, pos, ents = [], 0, {}
        for a, (surface, canonical) in zip(phrase.annotations, combo):
            parts.append(phrase.text[pos : a.start])
            parts.append(surface)
            ents[a.entity] = canonical
            pos = a.end
        parts.append(phrase.text[pos:])
        out.append(("".join(parts), ents))
    return out


@dataclass(frozen=True)
class IntentMatch:
    intent: str
    entities: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DialogueState:
    """Conversation state. ``context`` holds the story-relevant intents of the session."""

    slots: tuple[tuple[str, object], ...] = ()
    history: tuple[tuple[str, Optional[str]], ...] = ()
    context: tuple[str, ...] = ()
    clock: float = 0.0
    last_activity: Optional[float] = None

    def slot(self, name: str):
        return dict(self.slots).get(name)

    def key(self):
        """Everything that can influence later turns, up to clock translation."""
        return self.slots, self.context, self.last_activity is None


@dataclass(frozen=True)
class TurnOutcome:
    intent: Optional[str]
    entities: tuple[tuple[str, str], ...] = ()
    actions: tuple[str, ...] = ()
    responses: tuple[str, ...] = ()
    restarted: bool = False

    @property
    def empty(self) -> bool:
        return not self.actions and not self.responses

    def observable(self):
        return self.intent, self.actions, self.responses


class Engine:
    """A project compiled for fast repeated simulation."""

    def __init__(self, project: ChatbotProject):
        self.project = project
        self.index: dict[str, IntentMatch] = {}
        for intent in project.intents:
            if not intent.trained:
                continue
            for phrase in intent.examples:
                for text, ents in expand_phrase(project, phrase):
                    self.index.setdefault(normalize(text), IntentMatch(intent.name, ents))
        self.triggers: list[tuple[str, tuple[str, ...], Flow]] = []
        for rule in project.rules:
            idx = rule.intent_indices()
            if idx:
                self.triggers.append((rule.steps[idx[0]].intent, rule.action_run(idx[0]), rule))
        self.stories = [(s.intents(), s.intent_indices(), s) for s in project.stories]
        self.slot_names = tuple(s.name for s in project.slots)
        self.fillers = [(s.name, tuple(m.entity for m in s.mappings)) for s in project.slots]
        self.responses = {r.name: r for r in project.responses}
        self.custom = {a.name: a.utters for a in project.actions}

    _cache: "OrderedDict[int, tuple[ChatbotProject, Engine]]" = OrderedDict()

    @classmethod
    def of(cls, project: ChatbotProject) -> "Engine":
        hit = cls._cache.get(id(project))
        if hit is not None and hit[0] is project:
            cls._cache.move_to_end(id(project))
            return hit[1]
        engine = cls(project)
        cls._cache[id(project)] = (project, engine)
        if len(cls._cache) > 64:
            cls._cache.popitem(last=False)
        return engine

    def initial_state(self) -> DialogueState:
        return DialogueState(slots=tuple((n, None) for n in self.slot_names))

    def match(self, utterance: str) -> Optional[IntentMatch]:
        return self.index.get(normalize(utterance))

    def advance(self, state: DialogueState, minutes: float) -> DialogueState:
        return replace(state, clock=state.clock + minutes)

    def _render(self, name: str, slots: dict) -> list[str]:
        resp = self.responses.get(name)
        if resp is None or not resp.variants:
            return []
        text = _PLACEHOLDER.sub(lambda m: str(slots.get(m.group(1))), resp.variants[0])
        return [text]

    def _policy(self, intent: str, context: tuple[str, ...]) -> tuple[tuple[str, ...], bool]:
        for trigger, run, _ in self.triggers:
            if trigger == intent:
                return run, True
        n = len(context)
        for intents, indices, story in self.stories:
            if intents[:n] == context:
                return story.action_run(indices[n - 1]), False
        return (), False

    def step(self, state: DialogueState, utterance: str) -> tuple[DialogueState, TurnOutcome]:
        slots = dict(state.slots)
        history, context = state.history, state.context
        exp = self.project.session.expiration_minutes
        restarted = (
            state.last_activity is not None and exp > 0 and state.clock - state.last_activity > exp
        )
        if restarted:
            history, context = (), ()
            if not self.project.session.carry_over_slots:
                slots = {n: None for n in self.slot_names}

        match = self.match(utterance)
        actions: tuple[str, ...] = ()
        entities: tuple[tuple[str, str], ...] = ()
        if match is None:
            history += (("intent", None),)
        else:
            entities = tuple(sorted(match.entities.items()))
            for slot, sources in self.fillers:
                for ent in sources:
                    if ent in match.entities:
                        slots[slot] = match.entities[ent]
            history += (("intent", match.intent),)
            ctx = context + (match.intent,)
            actions, via_rule = self._policy(match.intent, ctx)
            if not via_rule:
                context = ctx

        responses: list[str] = []
        for action in actions:
            if action in self.responses:
                responses.extend(self._render(action, slots))
            else:
                for name in self.custom.get(action, ()):
                    responses.extend(self._render(name, slots))
            history += (("action", action),)

        new_state = DialogueState(
            slots=tuple((n, slots.get(n)) for n in self.slot_names),
            history=history,
            context=context,
            clock=state.clock,
            last_activity=state.clock,
        )
        outcome = TurnOutcome(
            intent=None if match is None else match.intent,
            entities=entities,
            actions=actions,
            responses=tuple(responses),
            restarted=restarted,
        )
        return new_state, outcome


def match_intent(project: ChatbotProject, utterance: str) -> Optional[IntentMatch]:
    """Return the matched intent or ``None`` (no match, the fallback case)."""
    return Engine.of(project).match(utterance)


def step(project: ChatbotProject, state: Optional[DialogueState], utterance: str):
    """One user turn. ``state=None`` starts a fresh conversation."""
    engine = Engine.of(project)
    return engine.step(engine.initial_state() if state is None else state, utterance)

