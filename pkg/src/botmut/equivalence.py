"""Bounded behavioral equivalence between two projects.

Conversations are enumerated breadth-first over a finite alphabet of
(pause, utterance) turns: every surface form of every training phrase, one
out-of-vocabulary probe, and pauses straddling both session expirations.
Pairs of dialogue states already explored are not expanded again, which
keeps depth 3 cheap without changing the answer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .model import ChatbotProject
from .simulator import Engine, TurnOutcome, expand_phrase, normalize

__all__ = ["EquivalenceResult", "bounded_equivalence", "input_alphabet", "pause_values", "replay"]

OOV_PROBE = "zq out of vocabulary probe"
DEFAULT_DEPTH = 3

Turn = tuple[float, str]


@dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    depth: int
    witness: Optional[tuple[Turn, ...]] = None
    explored: int = 0

    def __bool__(self):
        return self.equivalent

    def witness_dict(self) -> Optional[list[dict]]:
        if self.witness is None:
            return None
        return [{"pause": p, "utterance": u} for p, u in self.witness]


def input_alphabet(*projects: ChatbotProject) -> list[str]:
    seen: dict[str, str] = {}
    for project in projects:
        for intent in project.intents:
            if not intent.trained:
                continue
            for phrase in intent.examples:
                for text, _ in expand_phrase(project, phrase):
                    seen.setdefault(normalize(text), text)
    probe = OOV_PROBE
    while normalize(probe) in seen:
        probe += " x"
    return list(seen.values()) + [probe]


def pause_values(*projects: ChatbotProject) -> list[float]:
    values = {0.0}
    for project in projects:
        exp = float(project.session.expiration_minutes)
        if exp > 0:
            eps = min(0.5, exp / 2)
            values.update((exp - eps, exp + eps))
    return sorted(values)


def replay(project: ChatbotProject, conversation) -> list[TurnOutcome]:
    engine = Engine.of(project)
    state = engine.initial_state()
    outcomes = []
    for pause, utterance in conversation:
        if pause:
            state = engine.advance(state, pause)
        state, outcome = engine.step(state, utterance)
        outcomes.append(outcome)
    return outcomes


def bounded_equivalence(
    original: ChatbotProject, mutant: ChatbotProject, depth: int = DEFAULT_DEPTH
) -> EquivalenceResult:
    """True iff no conversation of at most ``depth`` turns tells the two apart.

    A negative result carries the shortest distinguishing conversation.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    eo, em = Engine.of(original), Engine.of(mutant)
    alphabet = input_alphabet(original, mutant)
    pauses = pause_values(original, mutant)

    start = (eo.initial_state(), em.initial_state())
    frontier = [((), *start)]
    seen = {(start[0].key(), start[1].key())}
    explored = 0
    for _ in range(depth):
        nxt = []
        for path, so, sm in frontier:
            for pause in pauses if path else (0.0,):
                so_p = eo.advance(so, pause) if pause else so
                sm_p = em.advance(sm, pause) if pause else sm
                for utterance in alphabet:
                    so2, out_o = eo.step(so_p, utterance)
                    sm2, out_m = em.step(sm_p, utterance)
                    explored += 1
                    conversation = path + ((pause, utterance),)
                    if out_o.observable() != out_m.observable():
                        return EquivalenceResult(False, depth, conversation, explored)
                    k = (so2.key(), sm2.key())
                    if k not in seen:
                        seen.add(k)
                        nxt.append((conversation, so2, sm2))
        frontier = nxt
        if not frontier:
            break
    return EquivalenceResult(True, depth, None, explored)
