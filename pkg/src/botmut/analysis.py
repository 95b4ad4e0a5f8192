"""Run a suite against every mutant, classify, score and report.

Verdict precedence is Broken, then Equivalent, then Killed, then Survived.
The mutation score follows ``%K = K / (G - B - E) * 100``, rounded half
away from zero to an integer percentage.
"""

from __future__ import annotations

import json
import os
import shlex
import shutil
import subprocess
import tempfile
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .equivalence import DEFAULT_DEPTH, bounded_equivalence
from .model import validate
from .mutgen import MutantManifest, load_manifest
from .operators import OperatorCategory
from .rasa import parse_project
from .scripts import SUFFIX, SuiteResult, TestResult, load_suite, run_suite

__all__ = [
    "BaselineRed",
    "BuiltinRunner",
    "DeploymentFailed",
    "ExternalRunner",
    "MissingVerdict",
    "MutantVerdict",
    "MutationCounts",
    "MutationReport",
    "RunnerFailure",
    "UndefinedScore",
    "analyze",
    "baseline",
    "build_report",
    "classify_mutant",
    "make_runner",
    "score",
]

BROKEN, KILLED, EQUIVALENT, SURVIVED = "Broken", "Killed", "Equivalent", "Survived"
VERDICTS = (BROKEN, KILLED, EQUIVALENT, SURVIVED)

# git-bisect convention: the revision cannot be tested.
DEPLOY_FAILED_EXIT = 125


class BaselineRed(RuntimeError):
    def __init__(self, scripts: Sequence[str]):
        self.scripts = list(scripts)
        super().__init__("original project fails the suite: " + ", ".join(self.scripts))


class RunnerFailure(RuntimeError):
    """The external command could not be executed at all."""


class DeploymentFailed(RuntimeError):
    """The external runner could not bring the bot up."""


class UndefinedScore(ZeroDivisionError):
    pass


class MissingVerdict(KeyError):
    pass


# -- runners -------------------------------------------------------------------


class BuiltinRunner:
    name = "builtin"

    def run(self, project_dir: Path, suite_dir: Path, repeat: int) -> SuiteResult:
        return run_suite(parse_project(project_dir), load_suite(suite_dir), repeat)


class ExternalRunner:
    """Runs a command template once per repetition.

    ``{dir}``, ``{suite}`` and ``{results}`` are substituted. Exit status 0
    means every script passed, 125 means the bot could not be deployed, any
    other nonzero status means at least one script failed. If the command
    writes ``{"<script>": "pass"|"fail"|"timeout"}`` to ``{results}``, those
    per-script verdicts are used.
    """

    def __init__(self, template: str, timeout: Optional[float] = None):
        self.template = template
        self.timeout = timeout
        self.name = f"exec:{template}"

    def _argv(self, project_dir: Path, suite_dir: Path, results: Path) -> list[str]:
        cmd = self.template
        for key, value in (("{dir}", project_dir), ("{suite}", suite_dir), ("{results}", results)):
            cmd = cmd.replace(key, shlex.quote(str(value)))
        return shlex.split(cmd)

    def _once(self, project_dir: Path, suite_dir: Path) -> dict[str, TestResult]:
        with tempfile.TemporaryDirectory(prefix="botmut-run-") as tmp:
            results = Path(tmp) / "results.json"
            argv = self._argv(project_dir, suite_dir, results)
            try:
                proc = subprocess.run(argv, capture_output=True, text=True, timeout=self.timeout)
            except (OSError, subprocess.SubprocessError) as exc:
                raise RunnerFailure(f"cannot run {argv[0] if argv else self.template!r}: {exc}") from exc
            if proc.returncode in (126, 127):
                raise RunnerFailure(f"{self.template!r} exited {proc.returncode}: {proc.stderr.strip()}")
            if proc.returncode == DEPLOY_FAILED_EXIT:
                raise DeploymentFailed(proc.stderr.strip() or "deployment failed")
            if results.is_file():
                data = json.loads(results.read_text(encoding="utf-8"))
                return {
                    name: TestResult(v if v in ("pass", "fail", "timeout") else "fail")
                    for name, v in sorted(data.items())
                }
            verdict = "pass" if proc.returncode == 0 else "fail"
            return {"(suite)": TestResult(verdict, reason=proc.stderr.strip()[-500:])}

    def run(self, project_dir: Path, suite_dir: Path, repeat: int) -> SuiteResult:
        runs = [self._once(Path(project_dir), Path(suite_dir)) for _ in range(repeat)]
        names = sorted({n for r in runs for n in r})
        return SuiteResult(tuple(
            (n, tuple(r.get(n, TestResult("fail", reason="missing result")) for r in runs)) for n in names
        ))


def make_runner(spec: str = "builtin"):
    if spec == "builtin":
        return BuiltinRunner()
    if spec.startswith("exec:") and spec[5:].strip():
        return ExternalRunner(spec[5:].strip())
    raise ValueError(f"runner must be 'builtin' or 'exec:<command>', got {spec!r}")


# -- classification ------------------------------------------------------------


@dataclass(frozen=True)
class Baseline:
    result: SuiteResult
    suite_dir: Path
    dropped: tuple[str, ...] = ()


def _filtered_suite(suite_dir: Path, keep: Iterable[str], into: Path) -> Path:
    into.mkdir(parents=True, exist_ok=True)
    for name in keep:
        shutil.copy2(suite_dir / f"{name}{SUFFIX}", into / f"{name}{SUFFIX}")
    return into


def baseline(original_dir, suite_dir, runner, repeat: int = 5, drop_flaky: bool = False,
             workdir: Optional[Path] = None) -> Baseline:
    """Run the suite on the original; it must pass before mutants are judged."""
    suite_dir = Path(suite_dir)
    result = runner.run(Path(original_dir), suite_dir, repeat)
    dropped: tuple[str, ...] = ()
    if drop_flaky and result.flaky:
        names = [n for n, _ in result.results]
        # Without per-script verdicts there is nothing to drop.
        if all((suite_dir / f"{n}{SUFFIX}").is_file() for n in names):
            dropped = tuple(result.flaky)
            keep = [n for n in names if n not in dropped]
            workdir = Path(workdir or tempfile.mkdtemp(prefix="botmut-suite-"))
            suite_dir = _filtered_suite(suite_dir, keep, workdir / "suite")
            result = SuiteResult(tuple((n, rs) for n, rs in result.results if n not in dropped))
    if not result.passed:
        raise BaselineRed(result.failing)
    return Baseline(result, suite_dir, dropped)


@dataclass(frozen=True)
class MutantVerdict:
    verdict: str
    evidence: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"verdict": self.verdict, "evidence": self.evidence}


def classify_mutant(
    base: Baseline,
    mutant_dir,
    runner,
    original=None,
    depth: int = DEFAULT_DEPTH,
    repeat: int = 5,
    equivalent_override: bool = False,
) -> MutantVerdict:
    """Judge one mutant directory against a green baseline."""
    if not base.result.passed:
        raise BaselineRed(base.result.failing)
    mutant_dir = Path(mutant_dir)
    mutant = parse_project(mutant_dir)
    report = validate(mutant)
    if not report.deployable:
        return MutantVerdict(BROKEN, {"issues": [i.as_dict() for i in report.broken]})
    if equivalent_override:
        return MutantVerdict(EQUIVALENT, {"method": "override"})
    witness = None
    if original is not None:
        eq = bounded_equivalence(original, mutant, depth)
        if eq.equivalent:
            return MutantVerdict(EQUIVALENT, {"method": "bounded", "depth": depth})
        witness = eq.witness_dict()
    try:
        result = runner.run(mutant_dir, base.suite_dir, repeat)
    except DeploymentFailed as exc:
        return MutantVerdict(BROKEN, {"deployment": str(exc)})
    evidence: dict = {}
    if witness is not None:
        evidence["witness"] = witness
    if result.failing:
        evidence["failing"] = [
            {"script": name, "result": result.first_failure(name).summary()} for name in result.failing
        ]
        return MutantVerdict(KILLED, evidence)
    return MutantVerdict(SURVIVED, evidence)


# -- scoring and reports ------------------------------------------------------


@dataclass(frozen=True)
class MutationCounts:
    G: int = 0
    B: int = 0
    K: int = 0
    E: int = 0

    def __post_init__(self):
        if min(self.G, self.B, self.K, self.E) < 0 or self.B + self.K + self.E > self.G:
            raise ValueError(f"inconsistent counts {self}")

    @property
    def S(self) -> int:
        return self.G - self.B - self.K - self.E

    def __add__(self, other: "MutationCounts") -> "MutationCounts":
        return MutationCounts(self.G + other.G, self.B + other.B, self.K + other.K, self.E + other.E)

    @property
    def score(self) -> Optional[int]:
        try:
            return score(self)
        except UndefinedScore:
            return None

    def as_dict(self) -> dict:
        return {"B": self.B, "K": self.K, "E": self.E, "S": self.S, "G": self.G, "score": self.score}


def score(counts: MutationCounts) -> int:
    """Killed over killable, as an integer percentage."""
    killable = counts.G - counts.B - counts.E
    if killable <= 0:
        raise UndefinedScore("no killable mutants (G - B - E == 0)")
    # round half away from zero, exactly
    return (200 * counts.K + killable) // (2 * killable)


GROUPS = (OperatorCategory.ChatbotStructure.value, OperatorCategory.Flow.value, "Total")
_HEADINGS = {"ChatbotStructure": "Chatbot", "Flow": "Flow", "Total": "Total"}


@dataclass(frozen=True)
class MutationReport:
    project: str
    original_hash: str
    counts: dict
    mutants: tuple
    settings: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "project": self.project,
            "original_hash": self.original_hash,
            "settings": self.settings,
            "counts": {g: self.counts[g].as_dict() for g in GROUPS},
            "mutants": list(self.mutants),
        }

    def dumps(self) -> str:
        return json.dumps(self.as_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "MutationReport":
        counts = {
            g: MutationCounts(c["G"], c["B"], c["K"], c["E"]) for g, c in data["counts"].items()
        }
        return cls(data.get("project", ""), data.get("original_hash", ""), counts,
                   tuple(data.get("mutants", ())), data.get("settings", {}))

    def table(self) -> str:
        cols = ("B", "K", "E", "S", "G", "%K")
        cell = "{:>4}" * (len(cols) - 1) + "{:>6} "
        name_w = max(len("Chatbot"), len(self.project))
        group_w = len(cell.format(*cols))
        lines = [
            " " * name_w + " |" + " |".join(_HEADINGS[g].center(group_w) for g in GROUPS),
            "Chatbot".ljust(name_w) + " |" + " |".join(cell.format(*cols) for _ in GROUPS),
        ]
        row = []
        for g in GROUPS:
            c = self.counts[g]
            pct = "n/a" if c.score is None else f"{c.score}%"
            row.append(cell.format(c.B, c.K, c.E, c.S, c.G, pct))
        lines.insert(1, "-" * len(lines[0]))
        lines.append("-" * len(lines[0]))
        lines.append(self.project.ljust(name_w) + " |" + " |".join(row))
        depth = self.settings.get("equivalence_depth")
        lines.append("")
        lines.append("B broken, K killed, E equivalent"
                     + (f" (bounded, depth {depth})" if depth else "")
                     + ", S survived, G generated; %K = K / (G - B - E) * 100")
        return "\n".join(line.rstrip() for line in lines) + "\n"


def build_report(manifest: MutantManifest, verdicts: dict, project: str = "",
                 settings: Optional[dict] = None) -> MutationReport:
    per = {g: MutationCounts() for g in GROUPS[:2]}
    details = []
    for entry in manifest.mutants:
        if entry.id not in verdicts:
            raise MissingVerdict(entry.id)
        v = verdicts[entry.id]
        flags = {name: int(v.verdict == label) for name, label in
                 (("B", BROKEN), ("K", KILLED), ("E", EQUIVALENT))}
        per[entry.category] = per[entry.category] + MutationCounts(1, **flags)
        details.append({
            "id": entry.id,
            "operator": entry.operator,
            "category": entry.category,
            "site": entry.site,
            **v.as_dict(),
        })
    counts = dict(per)
    counts["Total"] = per[GROUPS[0]] + per[GROUPS[1]]
    return MutationReport(project, manifest.original_hash, counts, tuple(details), settings or {})


# -- orchestration -------------------------------------------------------------


def _classify_job(args) -> tuple[str, MutantVerdict]:
    mutant_id, mutant_dir, original_dir, suite_dir, runner_spec, depth, repeat, override, result = args
    original = parse_project(original_dir)
    base = Baseline(result, Path(suite_dir))
    return mutant_id, classify_mutant(base, mutant_dir, make_runner(runner_spec), original,
                                      depth, repeat, override)


def analyze(
    project_dir,
    mutants_dir,
    suite_dir,
    runner: str = "builtin",
    repeat: int = 5,
    depth: int = DEFAULT_DEPTH,
    jobs: int = 1,
    drop_flaky: bool = False,
    equivalent: Iterable[str] = (),
) -> MutationReport:
    """The whole workflow: baseline, classify every manifest entry, report."""
    if repeat < 1 or depth < 1 or jobs < 1:
        raise ValueError("repeat, depth and jobs must all be >= 1")
    project_dir, mutants_dir = Path(project_dir), Path(mutants_dir)
    manifest = load_manifest(mutants_dir)
    run = make_runner(runner)
    overrides = set(equivalent)
    with tempfile.TemporaryDirectory(prefix="botmut-") as tmp:
        base = baseline(project_dir, suite_dir, run, repeat, drop_flaky, Path(tmp))
        jobs_args = [
            (m.id, str(mutants_dir / m.dir), str(project_dir), str(base.suite_dir), runner, depth,
             repeat, m.id in overrides, base.result)
            for m in manifest.mutants
        ]
        if jobs > 1 and len(jobs_args) > 1:
            pool_cls = ProcessPoolExecutor if runner == "builtin" else ThreadPoolExecutor
            with pool_cls(max_workers=jobs) as pool:
                verdicts = dict(pool.map(_classify_job, jobs_args))
        else:
            verdicts = dict(map(_classify_job, jobs_args))
    settings = {
        "runner": run.name,
        "repeat": repeat,
        "equivalence_depth": depth,
        "dropped_scripts": list(base.dropped),
    }
    return build_report(manifest, verdicts, project_dir.resolve().name, settings)


def write_report(report: MutationReport, path, timestamp: Optional[str] = None) -> Path:
    data = report.as_dict()
    if timestamp:
        data["generated_at"] = timestamp
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
    return path


def load_report(path) -> MutationReport:
    return MutationReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def jobs_from_env(default: int = 1) -> int:
    value = os.environ.get("BOTMUT_JOBS")
    return int(value) if value and value.isdigit() and int(value) > 0 else default
