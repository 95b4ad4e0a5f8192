"""One test per acceptance criterion; the run ends with a PASS/FAIL line for each."""

import json
import re
import shutil
import time
from pathlib import Path

from botmut.analysis import (
    BuiltinRunner,
    MutationCounts,
    analyze,
    baseline,
    classify_mutant,
    score,
)
from botmut.cli import main
from botmut.equivalence import bounded_equivalence, replay
from botmut.mutgen import generate_mutants
from botmut.operators import OperatorId, apply, enumerate_all, enumerate_sites
from botmut.rasa import parse_project, render_project, write_project

from conftest import RPS, SUITES, TWO_STORY, write_suite


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.2f}s, budget {self.seconds}s"


def _snapshot(root: Path) -> dict:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def _verdicts(report) -> dict:
    return {m["id"]: m["verdict"] for m in report.mutants}


def test_criterion_1_score_formula():
    cells = [  # (B, K, E, G) -> expected
        ((0, 6, 0, 12), 50), ((0, 6, 2, 15), 46), ((0, 12, 2, 27), 48),
        ((0, 20, 3, 26), 87), ((13, 7, 3, 28), 58), ((13, 27, 6, 54), 77),
        ((0, 23, 11, 48), 62), ((12, 8, 7, 54), 23), ((12, 31, 18, 102), 43),
    ]
    printed = [50, 47, 48, 87, 58, 77, 62, 23, 43]
    with Budget(1):
        got = [score(MutationCounts(G=g, B=b, K=k, E=e)) for (b, k, e, g), _ in cells]
    assert got == [want for _, want in cells]
    assert sum(a == b for a, b in zip(got, printed)) == 8
    assert (got[1], printed[1]) == (46, 47)


def test_criterion_2_enumeration(tmp_path, capsys):
    hand = [
        ("removeIntentFromNLU", 3), ("removeEntity", 1), ("removeRule", 1), ("removeStory", 1),
        ("removeIntentFromStory", 2), ("removeIntentFromRule", 1),
        ("removeInteractionFromStory", 2), ("removeInteractionFromRule", 1),
        ("changeSessionExpTimeInt", 2), ("changeSessionExpTimeFloat", 2),
        ("toggleCarryOverSlots", 1),
    ]
    with Budget(1):
        assert main(["mutate", str(RPS), "-o", str(tmp_path)]) == 0
    assert "17 mutants generated" in capsys.readouterr().out
    manifest = json.loads((tmp_path / "mutants.json").read_text())["mutants"]
    per_op = {op: sum(m["operator"] == op for m in manifest) for op, _ in hand}
    assert [per_op[op] for op, _ in hand] == [n for _, n in hand] == [3, 1, 1, 1, 2, 1, 2, 1, 2, 2, 1]
    split = {c: sum(m["category"] == c for m in manifest) for c in ("ChatbotStructure", "Flow")}
    assert split == {"ChatbotStructure": 6, "Flow": 11}


def test_criterion_3_round_trip(tmp_path):
    with Budget(20):
        for fixture in (RPS, TWO_STORY):
            original = parse_project(fixture)
            gen = generate_mutants(fixture, None, tmp_path / fixture.name)
            dirs = [fixture] + [tmp_path / fixture.name / m.dir for m in gen.mutants]
            for d in dirs:
                model = parse_project(d)
                out = tmp_path / "rt" / fixture.name / d.name
                write_project(model, out)
                assert parse_project(out) == model, d
                assert render_project(model) == render_project(parse_project(d)), d
            assert len(dirs) > 1 and original == parse_project(fixture)


def test_criterion_4_kill_dynamics(tmp_path):
    runner = BuiltinRunner()
    original = parse_project(RPS)
    gen = generate_mutants(RPS, None, tmp_path / "mutants")

    def verdict(mutant_id, suite):
        base = baseline(RPS, suite, runner, repeat=1)
        return classify_mutant(base, tmp_path / "mutants" / mutant_id, runner, original, repeat=1)

    def ids(op, needle=""):
        return [m.id for m in gen.mutants if m.operator == op and needle in m.site]

    greet_only = write_suite(tmp_path / "greet", {"greet": (SUITES / "rps" / "01_greet.convo.txt").read_text()})
    intent_only = SUITES / "rps-botium"
    with_contains = tmp_path / "contains"
    shutil.copytree(intent_only, with_contains)
    play = with_contains / "02_play.convo.txt"
    play.write_text(play.read_text() + "#bot contains chose paper\n")
    session = write_suite(tmp_path / "session", {"session": (SUITES / "rps" / "04_session.convo.txt").read_text()})

    with Budget(20):
        # (a) untrained greet: the greet script waits for a reply that never comes
        (greet,) = ids("removeIntentFromNLU", "greet")
        v = verdict(greet, greet_only)
        assert v.verdict == "Killed"
        assert v.evidence["failing"][0]["result"].startswith("timeout")

        # (b) removed entity: "You chose None" goes unnoticed by intent-only assertions
        (entity,) = ids("removeEntity")
        assert verdict(entity, intent_only).verdict == "Survived"
        assert verdict(entity, with_contains).verdict == "Killed"

        # (c) session behavior needs a long pause and a slot assertion
        timing = ids("toggleCarryOverSlots") + ids("changeSessionExpTimeInt") + ids("changeSessionExpTimeFloat")
        assert len(timing) == 5
        assert "#pause 61" in (session / "session.convo.txt").read_text()
        for mid in timing:
            assert verdict(mid, intent_only).verdict == "Survived", mid
            assert verdict(mid, session).verdict == "Killed", mid


def test_criterion_5_broken_detection(tmp_path):
    with Budget(1):
        gen = generate_mutants(RPS, None, tmp_path / "mutants")
        runner = BuiltinRunner()
        base = baseline(RPS, SUITES / "rps", runner, repeat=1)
        original = parse_project(RPS)
        verdicts = {m.id: classify_mutant(base, tmp_path / "mutants" / m.dir, runner, original, repeat=1)
                    for m in gen.mutants}
    rule_intent = [m for m in gen.mutants if m.operator == "removeIntentFromRule"]
    assert rule_intent
    for m in rule_intent:
        v = verdicts[m.id]
        assert v.verdict == "Broken"
        assert "DanglingRuleAction" in [i["code"] for i in v.evidence["issues"]]
    for m in gen.mutants:
        if verdicts[m.id].verdict == "Broken":
            assert m.category == "Flow", m.id
        if m.operator in ("removeEntity", "removeIntentFromNLU"):
            assert verdicts[m.id].verdict != "Broken"


def test_criterion_6_equivalence():
    with Budget(10):
        two = parse_project(TWO_STORY)
        dup = next(s for s in enumerate_sites(two, OperatorId.removeIntentFromStory)
                   if s.target[1] == "replay-story")
        assert bounded_equivalence(two, apply(two, dup), 3).equivalent

        checked = 0
        for fixture in (RPS, TWO_STORY):
            original = parse_project(fixture)
            for site in enumerate_all(original):
                mutant = apply(original, site)
                result = bounded_equivalence(original, mutant, 3)
                if result.equivalent:
                    continue
                assert result.witness
                a, b = replay(original, result.witness), replay(mutant, result.witness)
                assert [o.observable() for o in a] != [o.observable() for o in b]
                checked += 1
    assert checked > 0


def test_criterion_7_determinism(tmp_path, capsys):
    with Budget(60):
        assert main(["mutate", str(RPS), "-o", str(tmp_path / "m")]) == 0
        runs = {}
        for jobs in ("1", "8"):
            out = tmp_path / f"report-{jobs}.json"
            assert main(["analyze", str(RPS), "--mutants", str(tmp_path / "m"),
                         "--suite", str(SUITES / "rps"), "--jobs", jobs, "-o", str(out)]) == 0
            runs[jobs] = out.read_bytes()
        assert runs["1"] == runs["8"]

        original = parse_project(RPS)
        one = analyze(RPS, tmp_path / "m", SUITES / "rps-botium", repeat=1)
        five = analyze(RPS, tmp_path / "m", SUITES / "rps-botium", repeat=5)
        assert _verdicts(one) == _verdicts(five)
        assert original == parse_project(RPS)


def test_criterion_8_pipeline(tmp_path, capsys):
    project = tmp_path / "rps-mini"
    shutil.copytree(RPS, project)
    before = _snapshot(project)
    with Budget(30):
        assert main(["validate", str(project)]) == 0
        assert main(["mutate", str(project), "-o", str(tmp_path / "m")]) == 0
        mutants_before = _snapshot(tmp_path / "m")
        assert main(["analyze", str(project), "--mutants", str(tmp_path / "m"),
                     "--suite", str(SUITES / "rps"), "-o", str(tmp_path / "report.json")]) == 0
        capsys.readouterr()
        assert main(["report", str(tmp_path / "report.json"), "--format", "table"]) == 0
    table = capsys.readouterr().out
    assert _snapshot(project) == before
    assert _snapshot(tmp_path / "m") == mutants_before

    header = next(line for line in table.splitlines() if line.startswith(" ") and "Chatbot" in line)
    assert [h.strip() for h in header.split("|")[1:]] == ["Chatbot", "Flow", "Total"]
    row = next(line for line in table.splitlines() if line.startswith("rps-mini"))
    groups = row.split("|")[1:]
    assert len(groups) == 3
    totals = []
    for cell in groups:
        b, k, e, s, g, pct = cell.split()
        b, k, e, s, g = map(int, (b, k, e, s, g))
        assert b + k + e + s == g
        assert re.fullmatch(r"\d+%|n/a", pct)
        totals.append((b, k, e, s, g))
    assert tuple(map(sum, zip(*totals[:2]))) == totals[2]
    assert totals[2][4] == 17
