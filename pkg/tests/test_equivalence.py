import pytest

from botmut.equivalence import bounded_equivalence, input_alphabet, pause_values, replay
from botmut.operators import OperatorId, apply, enumerate_all, enumerate_sites
from botmut.rasa import parse_project

from conftest import RPS

RPS_SITES = enumerate_all(parse_project(RPS))
SITE_IDS = [f"{s.operator.value}-{s.describe()}" for s in RPS_SITES]


def test_reflexive(rps):
    assert bounded_equivalence(rps, parse_project(RPS)).equivalent
    assert bounded_equivalence(rps, rps.replace(flows=tuple(reversed(rps.flows)))).equivalent


def test_alphabet_and_pauses(rps):
    alphabet = input_alphabet(rps)
    assert len(alphabet) == 8  # 2 greet + 3 play + 2 goodbye + the probe
    assert pause_values(rps) == [0.0, 59.5, 60.5]


def test_duplicated_transition_is_equivalent(two_story):
    site = next(s for s in enumerate_sites(two_story, OperatorId.removeIntentFromStory)
                if s.target[1] == "replay-story")
    result = bounded_equivalence(two_story, apply(two_story, site), 3)
    assert result.equivalent
    assert result.witness is None


def test_untrained_play_diverges_immediately(rps):
    site = next(s for s in enumerate_sites(rps, OperatorId.removeIntentFromNLU) if s.target[1] == "play")
    result = bounded_equivalence(rps, apply(rps, site), 3)
    assert not result.equivalent
    assert len(result.witness) == 1
    assert result.witness[0][1] == "I pick rock"


@pytest.mark.parametrize("site", RPS_SITES, ids=SITE_IDS)
def test_witness_reproduces_divergence(rps, site):
    mutant = apply(rps, site)
    result = bounded_equivalence(rps, mutant, 3)
    if result.equivalent:
        pytest.skip("no witness for an equivalent mutant")
    a, b = replay(rps, result.witness), replay(mutant, result.witness)
    assert [o.observable() for o in a[:-1]] == [o.observable() for o in b[:-1]]
    assert a[-1].observable() != b[-1].observable()


@pytest.mark.parametrize("site", RPS_SITES, ids=SITE_IDS)
def test_symmetric(rps, site):
    mutant = apply(rps, site)
    ab = bounded_equivalence(rps, mutant, 3)
    ba = bounded_equivalence(mutant, rps, 3)
    assert ab.equivalent == ba.equivalent
    assert (ab.witness is None) == (ba.witness is None)


def test_session_mutants_need_a_pause(rps):
    for op in (OperatorId.toggleCarryOverSlots, OperatorId.changeSessionExpTimeInt):
        for site in enumerate_sites(rps, op):
            result = bounded_equivalence(rps, apply(rps, site), 3)
            assert not result.equivalent
            assert any(p > 0 for p, _ in result.witness)


def test_depth_must_be_positive(rps):
    with pytest.raises(ValueError):
        bounded_equivalence(rps, rps, 0)
