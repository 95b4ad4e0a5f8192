import pytest
from hypothesis import given, strategies as st

from botmut.model import ActionStep, validate
from botmut.operators import (
    OPERATORS,
    OperatorCategory,
    OperatorId,
    StaleSite,
    apply,
    category,
    enumerate_all,
    enumerate_sites,
    parse_operators,
)
from botmut.rasa import diff_projects, parse_project, write_project

# Counted by reading the fixture files, not by running the enumerator:
#   3 intents with NLU blocks, 1 entity, 1 rule, 1 story,
#   play-story has 2 intent-steps and 2 interactions, greet-rule has 1 of each,
#   expiration 60 gives 120/1 (Int) and 90/30 (Float), one carry-over toggle.
HAND_COUNT = {
    "removeIntentFromNLU": 3,
    "removeEntity": 1,
    "removeRule": 1,
    "removeStory": 1,
    "removeIntentFromStory": 2,
    "removeIntentFromRule": 1,
    "removeInteractionFromStory": 2,
    "removeInteractionFromRule": 1,
    "changeSessionExpTimeInt": 2,
    "changeSessionExpTimeFloat": 2,
    "toggleCarryOverSlots": 1,
}


def test_eleven_operators():
    assert len(OPERATORS) == 11
    assert set(HAND_COUNT) == {op.value for op in OPERATORS}


@pytest.mark.parametrize("op", list(HAND_COUNT))
def test_site_counts(rps, op):
    assert len(enumerate_sites(rps, op)) == HAND_COUNT[op]


def test_total_sites(rps):
    assert len(enumerate_all(rps)) == 17 == sum(HAND_COUNT.values())


def test_nlu_sites_follow_declaration_order(rps):
    assert [s.target[1] for s in enumerate_sites(rps, OperatorId.removeIntentFromNLU)] == [
        "greet", "play", "goodbye"]


def test_story_interactions(rps):
    sites = enumerate_sites(rps, OperatorId.removeInteractionFromStory)
    assert [s.target[2:] for s in sites] == [(0, 2), (2, 4)]
    kept = [apply(rps, s).flow("story", "play-story").steps for s in sites]
    assert [tuple(x.intent if hasattr(x, "intent") else x.action for x in k) for k in kept] == [
        ("goodbye", "utter_goodbye"), ("play", "action_play_result")]


@pytest.mark.parametrize("op,cat", [
    ("removeIntentFromNLU", "ChatbotStructure"),
    ("removeEntity", "ChatbotStructure"),
    ("removeRule", "ChatbotStructure"),
    ("removeStory", "ChatbotStructure"),
    ("removeIntentFromStory", "Flow"),
    ("removeIntentFromRule", "Flow"),
    ("removeInteractionFromRule", "Flow"),
    ("removeInteractionFromStory", "Flow"),
    ("changeSessionExpTimeInt", "Flow"),
    ("changeSessionExpTimeFloat", "Flow"),
    ("toggleCarryOverSlots", "Flow"),
])
def test_categories(op, cat):
    assert category(op) is OperatorCategory(cat)


def test_remove_entity(rps):
    mutant = apply(rps, enumerate_sites(rps, OperatorId.removeEntity)[0])
    assert mutant.entities == ()
    assert [p.markup() for p in mutant.intent("play").examples] == [
        "I pick rock", "I pick paper", "I pick scissors"]
    assert mutant.slot("choice").mappings == ()


def test_int_shorten_clamps_to_one(rps):
    site = next(s for s in enumerate_sites(rps, OperatorId.changeSessionExpTimeInt)
                if s.target[2] == "shorten")
    assert apply(rps, site).session.expiration_minutes == 1


def test_session_values(rps):
    values = {op: [s.payload for s in enumerate_sites(rps, op)] for op in
              (OperatorId.changeSessionExpTimeInt, OperatorId.changeSessionExpTimeFloat)}
    assert values == {OperatorId.changeSessionExpTimeInt: [120, 1],
                      OperatorId.changeSessionExpTimeFloat: [90, 30]}


def test_int_shorten_skipped_when_noop(rps):
    from botmut.model import SessionConfig
    one = rps.replace(session=SessionConfig(1, True))
    assert [s.target[2] for s in enumerate_sites(one, OperatorId.changeSessionExpTimeInt)] == ["extend"]


def test_remove_intent_from_rule_dangles(rps):
    site = enumerate_sites(rps, OperatorId.removeIntentFromRule)[0]
    mutant = apply(rps, site)
    assert mutant.flow("rule", "greet-rule").steps == (ActionStep("utter_greet"),)
    assert [i.code for i in validate(mutant).broken] == ["DanglingRuleAction"]


def test_toggle(rps):
    mutant = apply(rps, enumerate_sites(rps, OperatorId.toggleCarryOverSlots)[0])
    assert mutant.session.carry_over_slots is False


def test_unknown_operator():
    with pytest.raises(ValueError, match="unknown operator"):
        parse_operators(["removeEverything"])


def test_stale_site(rps):
    site = enumerate_sites(rps, OperatorId.removeRule)[0]
    mutant = apply(rps, site)
    with pytest.raises(StaleSite):
        apply(mutant, site)


def test_sites_are_distinct_and_mutants_differ(rps):
    sites = enumerate_all(rps)
    assert len(set(sites)) == len(sites)
    mutants = [apply(rps, s) for s in sites]
    for m in mutants:
        assert m != rps
    assert len(set(mutants)) == len(mutants)


def test_apply_is_pure(rps):
    before = rps.replace()
    for site in enumerate_all(rps):
        apply(rps, site)
    assert rps == before


@pytest.mark.parametrize("op", [op.value for op in OPERATORS if category(op) is OperatorCategory.ChatbotStructure])
def test_structure_removal_leaves_one_fewer_site(rps, op):
    sites = enumerate_sites(rps, op)
    assert len(enumerate_sites(apply(rps, sites[0]), op)) == len(sites) - 1


@pytest.mark.parametrize("index", range(17))
def test_every_mutant_reparses(rps, tmp_path, index):
    site = enumerate_all(rps)[index]
    mutant = apply(rps, site)
    write_project(mutant, tmp_path)
    assert parse_project(tmp_path) == mutant
    assert diff_projects(rps, mutant)


@given(st.sampled_from([1, 2, 30, 45, 60, 61, 120, 600]), st.sampled_from(list(OPERATORS)))
def test_enumeration_is_deterministic(minutes, op):
    from botmut.model import SessionConfig
    from conftest import RPS
    p = parse_project(RPS).replace(session=SessionConfig(minutes, True))
    first = enumerate_sites(p, op)
    assert first == enumerate_sites(p, op)
    for site in first:
        assert apply(p, site) != p
