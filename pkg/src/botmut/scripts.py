"""Conversation test scripts and the built-in script runner.

Script files are plain text, one directive per line::

    // a comment
    #me
    I pick paper
    #bot intent play
    #bot contains chose paper
    #pause 61

A suite is a directory of ``*.convo.txt`` files run in file-name order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

from .model import ChatbotProject
from .simulator import DialogueState, Engine, TurnOutcome

__all__ = [
    "BotExpect",
    "ConversationScript",
    "MalformedScript",
    "Pause",
    "SuiteResult",
    "TestResult",
    "UserTurn",
    "load_suite",
    "parse_script",
    "run_script",
    "run_suite",
]

SUFFIX = ".convo.txt"


class MalformedScript(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, source: str = ""):
        self.line = line
        where = ":".join(str(x) for x in (source, line) if x)
        super().__init__(f"{where}: {message}" if where else message)


@dataclass(frozen=True)
class UserTurn:
    utterance: str


@dataclass(frozen=True)
class BotExpect:
    kind: str  # "intent" | "action" | "contains"
    value: str

    def check(self, outcome: TurnOutcome) -> Optional[str]:
        """Return a failure reason, or ``None`` when the assertion holds."""
        if self.kind == "intent":
            if outcome.intent != self.value:
                return f"expected intent {self.value!r}, got {outcome.intent!r}"
        elif self.kind == "action":
            if self.value not in outcome.actions:
                return f"expected action {self.value!r}, got {list(outcome.actions)}"
        elif not any(self.value in r for r in outcome.responses):
            return f"no response contains {self.value!r}; got {list(outcome.responses)}"
        return None


@dataclass(frozen=True)
class Pause:
    minutes: float


ScriptStep = Union[UserTurn, BotExpect, Pause]


@dataclass(frozen=True)
class ConversationScript:
    name: str
    steps: tuple[ScriptStep, ...]

    def __post_init__(self):
        if not self.steps:
            raise MalformedScript("script has no steps", source=self.name)
        if not isinstance(self.steps[0], UserTurn):
            raise MalformedScript("script must start with a user turn", source=self.name)

    def dumps(self) -> str:
        lines = []
        for s in self.steps:
            if isinstance(s, UserTurn):
                lines += ["#me", s.utterance]
            elif isinstance(s, BotExpect):
                lines.append(f"#bot {s.kind} {s.value}")
            else:
                minutes = int(s.minutes) if float(s.minutes).is_integer() else s.minutes
                lines.append(f"#pause {minutes}")
        return "\n".join(lines) + "\n"


def parse_script(text: str, name: str = "script") -> ConversationScript:
    steps: list[ScriptStep] = []
    lines = text.splitlines()
    i = 0
    seen_user = False
    while i < len(lines):
        lineno = i + 1
        line = lines[i].strip()
        i += 1
        if not line or line.startswith("//"):
            continue
        if line == "#me":
            if i >= len(lines) or not lines[i].strip():
                raise MalformedScript("#me must be followed by an utterance line", lineno, name)
            steps.append(UserTurn(lines[i].strip()))
            seen_user = True
            i += 1
        elif line.startswith("#bot "):
            parts = line.split(None, 2)
            if len(parts) < 3 or parts[1] not in ("intent", "action", "contains"):
                raise MalformedScript(f"bad bot directive {line!r}", lineno, name)
            if not seen_user:
                raise MalformedScript("bot expectation before any user turn", lineno, name)
            steps.append(BotExpect(parts[1], parts[2].strip()))
        elif line.startswith("#pause"):
            parts = line.split()
            try:
                minutes = float(parts[1]) if len(parts) == 2 else float("nan")
            except ValueError:
                minutes = float("nan")
            if not minutes > 0:
                raise MalformedScript(f"pause needs a positive number of minutes: {line!r}", lineno, name)
            if not seen_user:
                raise MalformedScript("script must start with a user turn", lineno, name)
            steps.append(Pause(minutes))
        else:
            raise MalformedScript(f"unknown directive {line!r}", lineno, name)
    return ConversationScript(name, tuple(steps))


def script_name(path: Path) -> str:
    return path.name[: -len(SUFFIX)] if path.name.endswith(SUFFIX) else path.stem


def load_script(path: Union[str, Path]) -> ConversationScript:
    path = Path(path)
    return parse_script(path.read_text(encoding="utf-8"), script_name(path))


def load_suite(directory: Union[str, Path]) -> list[ConversationScript]:
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"suite directory {directory} does not exist")
    return [load_script(p) for p in sorted(directory.glob(f"*{SUFFIX}"))]


@dataclass(frozen=True)
class TestResult:
    verdict: str  # "pass" | "fail" | "timeout"
    step: Optional[int] = None
    reason: str = ""
    transcript: tuple[str, ...] = ()

    __test__ = False

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def summary(self) -> str:
        if self.passed:
            return "pass"
        return f"{self.verdict} at step {self.step}" + (f": {self.reason}" if self.reason else "")


def run_script(project: ChatbotProject, script: ConversationScript) -> TestResult:
    engine = Engine.of(project)
    state: DialogueState = engine.initial_state()
    outcome: Optional[TurnOutcome] = None
    transcript: list[str] = []
    for n, s in enumerate(script.steps):
        if isinstance(s, UserTurn):
            state, outcome = engine.step(state, s.utterance)
            transcript.append(f"me: {s.utterance}")
            transcript.append(
                f"bot: intent={outcome.intent} actions={list(outcome.actions)} responses={list(outcome.responses)}"
            )
        elif isinstance(s, Pause):
            state = engine.advance(state, s.minutes)
            transcript.append(f"pause: {s.minutes}")
        else:
            if outcome is None or outcome.empty:
                return TestResult("timeout", n, "no bot response", tuple(transcript))
            reason = s.check(outcome)
            if reason:
                return TestResult("fail", n, reason, tuple(transcript))
    return TestResult("pass", transcript=tuple(transcript))


@dataclass(frozen=True)
class SuiteResult:
    """Per-script results over every repetition, in suite order."""

    results: tuple[tuple[str, tuple[TestResult, ...]], ...] = field(default_factory=tuple)

    @property
    def executions(self) -> int:
        return sum(len(rs) for _, rs in self.results)

    def verdicts(self) -> dict[str, list[str]]:
        return {name: [r.verdict for r in rs] for name, rs in self.results}

    @property
    def failing(self) -> list[str]:
        return [name for name, rs in self.results if any(not r.passed for r in rs)]

    @property
    def flaky(self) -> list[str]:
        return [name for name, rs in self.results if len({r.verdict for r in rs}) > 1]

    @property
    def passed(self) -> bool:
        return not self.failing

    def first_failure(self, name: str) -> Optional[TestResult]:
        for n, rs in self.results:
            if n == name:
                return next((r for r in rs if not r.passed), None)
        return None


def run_suite(project: ChatbotProject, scripts: Iterable[ConversationScript], repeat: int = 1) -> SuiteResult:
    if repeat < 1:
        raise ValueError("repeat must be >= 1")
    results = []
    for script in scripts:
        results.append((script.name, tuple(run_script(project, script) for _ in range(repeat))))
    return SuiteResult(tuple(results))
