"""Read and write Rasa-style project directories.

Only a documented subset of the Rasa schema is interpreted (see README).
Everything else is carried through: files the adapter does not own are
copied byte for byte, unknown top-level keys of owned files are re-emitted
verbatim, and unknown keys nested inside interpreted items are kept as
canonical YAML on the item (``extra``).
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Union

import yaml

from .model import (
    ActionDef,
    ActionStep,
    ChatbotProject,
    DuplicateName,
    Entity,
    EntityValue,
    Flow,
    Intent,
    IntentStep,
    OpaqueBlock,
    OtherStep,
    ResponseTemplate,
    SessionConfig,
    Slot,
    SlotMapping,
    TrainingPhrase,
)

__all__ = [
    "DiffEntry",
    "IoFailure",
    "MalformedDocument",
    "MissingDomainFile",
    "ProjectLayout",
    "content_hash",
    "diff_projects",
    "parse_project",
    "render_project",
    "write_project",
]

PathLike = Union[str, "os.PathLike[str]"]

SKIP_DIRS = {"models", "__pycache__", "results"}
_SLOT_TYPES = {"text": "text", "categorical": "categorical", "bool": "boolean"}
_SLOT_TYPE_NAMES = {v: k for k, v in _SLOT_TYPES.items()}


class MissingDomainFile(FileNotFoundError):
    pass


class MalformedDocument(ValueError):
    def __init__(self, file: str, line: Optional[int], message: str):
        self.file = file
        self.line = line
        where = f"{file}:{line}" if line else file
        super().__init__(f"{where}: {message}")


class IoFailure(OSError):
    pass


@dataclass(frozen=True)
class ProjectLayout:
    """Relative locations of the files the adapter interprets."""

    domain: str = "domain.yml"
    nlu: str = "data/nlu.yml"
    rules: str = "data/rules.yml"
    stories: str = "data/stories.yml"
    config: str = "config.yml"

    def role(self, path: str) -> str:
        return {
            self.domain: "domain",
            self.nlu: "nlu",
            self.rules: "rules",
            self.stories: "stories",
            self.config: "config",
        }.get(path, "other")

    @property
    def owned(self) -> tuple[str, ...]:
        return (self.domain, self.nlu, self.rules, self.stories)


DEFAULT_LAYOUT = ProjectLayout()


# -- YAML loading with line numbers -------------------------------------------


class _Map(dict):
    line: int = 0
    key_lines: dict


class _Seq(list):
    line: int = 0


class _Loader(yaml.SafeLoader):
    pass


def _construct_map(loader: _Loader, node: yaml.MappingNode) -> _Map:
    loader.flatten_mapping(node)
    out = _Map()
    out.line = node.start_mark.line + 1
    out.key_lines = {}
    for key_node, value_node in node.value:
        key = loader.construct_object(key_node, deep=True)
        if key in out:
            raise DuplicateName(f"duplicate key {key!r} at line {key_node.start_mark.line + 1}")
        out[key] = loader.construct_object(value_node, deep=True)
        out.key_lines[key] = key_node.start_mark.line + 1
    return out


def _construct_seq(loader: _Loader, node: yaml.SequenceNode) -> _Seq:
    out = _Seq(loader.construct_object(n, deep=True) for n in node.value)
    out.line = node.start_mark.line + 1
    return out


_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_map)
_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_SEQUENCE_TAG, _construct_seq)


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_plain(v) for v in value]
    return value


def _line(obj: Any) -> Optional[int]:
    return getattr(obj, "line", None)


def _load(root: Path, rel: str) -> tuple[Optional[_Map], str]:
    path = root / rel
    if not path.is_file():
        return None, ""
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedDocument(rel, None, f"not UTF-8: {exc}") from exc
    try:
        doc = yaml.load(text, Loader=_Loader)
    except DuplicateName as exc:
        raise DuplicateName(f"{rel}: {exc}") from None
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise MalformedDocument(rel, mark.line + 1 if mark else None, str(exc)) from exc
    if doc is None:
        doc = _Map()
        doc.key_lines = {}
    if not isinstance(doc, dict):
        raise MalformedDocument(rel, 1, "top level must be a mapping")
    return doc, text


def _top_level_block(doc: _Map, text: str, key: str) -> bytes:
    lines = text.splitlines(keepends=True)
    start = doc.key_lines[key] - 1
    later = sorted(n for n in doc.key_lines.values() if n - 1 > start)
    end = later[0] - 1 if later else len(lines)
    block = "".join(lines[start:end])
    if not block.endswith("\n"):
        block += "\n"
    return block.encode("utf-8")


def _dump_extra(extra: dict) -> str:
    if not extra:
        return ""
    return yaml.safe_dump(_plain(extra), sort_keys=True, allow_unicode=True, default_flow_style=False)


def _load_extra(extra: str) -> dict:
    return yaml.safe_load(extra) if extra else {}


def _expect(cond: bool, file: str, obj: Any, message: str) -> None:
    if not cond:
        raise MalformedDocument(file, _line(obj), message)


def _named_item(item: Any, file: str, what: str) -> tuple[str, dict]:
    """Rasa lists accept ``- name`` or ``- name: {props}``."""
    if isinstance(item, str):
        return item, {}
    _expect(isinstance(item, dict) and len(item) == 1, file, item, f"malformed {what} entry")
    (name, props), = item.items()
    props = props or {}
    _expect(isinstance(props, dict), file, item, f"{what} {name!r}: properties must be a mapping")
    return str(name), dict(props)


# -- parsing -----------------------------------------------------------------


def _parse_domain(doc: _Map, file: str) -> dict:
    out: dict = {"unknown": []}
    known = {"version", "intents", "entities", "slots", "responses", "actions", "session_config"}

    intents = []
    for item in doc.get("intents") or []:
        name, props = _named_item(item, file, "intent")
        if any(n == name for n, _ in intents):
            raise DuplicateName(f"{file}:{_line(doc.get('intents'))}: duplicate intent {name!r}")
        intents.append((name, _dump_extra(props)))
    out["intents"] = intents

    entities = []
    for item in doc.get("entities") or []:
        name, props = _named_item(item, file, "entity")
        values = []
        for v in props.pop("values", None) or []:
            if isinstance(v, dict):
                _expect("value" in v, file, v, f"entity {name!r}: value entry needs 'value'")
                values.append(EntityValue(str(v["value"]), tuple(str(s) for s in v.get("synonyms") or ())))
            else:
                values.append(EntityValue(str(v)))
        entities.append(Entity(name, tuple(values), _dump_extra(props)))
    out["entities"] = entities

    slots_doc = doc.get("slots") or {}
    _expect(isinstance(slots_doc, dict), file, slots_doc, "slots must be a mapping")
    slots = []
    for name, props in slots_doc.items():
        props = dict(props or {})
        kind = props.pop("type", "text")
        _expect(kind in _SLOT_TYPES, file, slots_doc, f"slot {name!r}: unsupported type {kind!r}")
        values = tuple(str(v) for v in props.pop("values", None) or ())
        mappings, others = [], []
        for m in props.pop("mappings", None) or []:
            if isinstance(m, dict) and m.get("type") == "from_entity" and "entity" in m:
                rest = {k: v for k, v in m.items() if k not in ("type", "entity")}
                mappings.append(SlotMapping(str(m["entity"]), _dump_extra(rest)))
            else:
                others.append(m)
        if others:
            props["mappings"] = others
        slots.append(Slot(str(name), _SLOT_TYPES[kind], values, tuple(mappings), _dump_extra(props)))
    out["slots"] = slots

    responses_doc = doc.get("responses") or {}
    _expect(isinstance(responses_doc, dict), file, responses_doc, "responses must be a mapping")
    responses = []
    for name, variants in responses_doc.items():
        _expect(isinstance(variants, list), file, responses_doc, f"response {name!r} must list variants")
        texts, extras = [], []
        for v in variants:
            if isinstance(v, str):
                v = {"text": v}
            _expect(isinstance(v, dict), file, variants, f"response {name!r}: malformed variant")
            texts.append(str(v.get("text", "")))
            extras.append({k: x for k, x in v.items() if k != "text"})
        extra = _dump_extra({"variants": extras}) if any(extras) else ""
        responses.append(ResponseTemplate(str(name), tuple(texts), extra))
    out["responses"] = responses

    response_names = {r.name for r in responses}
    actions = []
    for item in doc.get("actions") or []:
        name, props = _named_item(item, file, "action")
        utters = props.pop("utters", None) or ()
        if isinstance(utters, str):
            utters = (utters,)
        kind = "response" if name in response_names else "custom"
        actions.append(ActionDef(name, kind, tuple(str(u) for u in utters), _dump_extra(props)))
    out["actions"] = actions

    sc = doc.get("session_config")
    if sc is None:
        out["session"] = SessionConfig()
    else:
        _expect(isinstance(sc, dict), file, sc, "session_config must be a mapping")
        minutes = sc.get("session_expiration_time", 60)
        carry = sc.get("carry_over_slots_to_new_session", True)
        _expect(isinstance(minutes, (int, float)) and not isinstance(minutes, bool) and minutes >= 0,
                file, sc, "session_expiration_time must be a non-negative number")
        _expect(isinstance(carry, bool), file, sc, "carry_over_slots_to_new_session must be a boolean")
        out["session"] = SessionConfig(minutes, carry)

    out["unknown"] = [k for k in doc if k not in known]
    return out


def _parse_nlu(doc: _Map, file: str) -> tuple[list[Intent], list[bytes]]:
    blocks, passthrough = [], []
    items = doc.get("nlu") or []
    _expect(isinstance(items, list), file, doc, "'nlu' must be a list")
    for item in items:
        _expect(isinstance(item, dict), file, items, "malformed nlu item")
        if "intent" not in item:
            passthrough.append(yaml.safe_dump(_plain(item), sort_keys=False, allow_unicode=True).encode("utf-8"))
            continue
        name = str(item["intent"])
        if any(b.name == name for b in blocks):
            raise DuplicateName(f"{file}:{_line(item)}: duplicate NLU block for intent {name!r}")
        raw = item.get("examples") or ""
        _expect(isinstance(raw, str), file, item, f"intent {name!r}: examples must be a block string")
        examples = []
        for line in raw.splitlines():
            line = line.strip()
            if not line:
                continue
            _expect(line.startswith("-"), file, item, f"intent {name!r}: example lines start with '- '")
            examples.append(TrainingPhrase.parse(line[1:].strip()))
        rest = {k: v for k, v in item.items() if k not in ("intent", "examples")}
        blocks.append(Intent(name, tuple(examples), declared=False, trained=True, nlu_extra=_dump_extra(rest)))
    return blocks, passthrough


def _parse_step(step: Any, file: str) -> Any:
    if isinstance(step, dict):
        keys = set(step)
        if keys <= {"intent", "entities"} and "intent" in keys:
            bindings = []
            for e in step.get("entities") or []:
                if isinstance(e, dict):
                    bindings.extend((str(k), "" if v is None else str(v)) for k, v in e.items())
                else:
                    bindings.append((str(e), ""))
            return IntentStep(str(step["intent"]), tuple(bindings))
        if keys == {"action"}:
            return ActionStep(str(step["action"]))
    return OtherStep(_dump_extra(step) if isinstance(step, dict) else yaml.safe_dump(_plain(step)))


def _parse_flows(doc: _Map, file: str, kind: str) -> list[Flow]:
    key = "rules" if kind == "rule" else "stories"
    items = doc.get(key) or []
    _expect(isinstance(items, list), file, doc, f"'{key}' must be a list")
    flows = []
    for item in items:
        _expect(isinstance(item, dict) and kind in item, file, items, f"each {kind} needs a '{kind}' name")
        name = str(item[kind])
        if any(f.name == name for f in flows):
            raise DuplicateName(f"{file}:{_line(item)}: duplicate {kind} {name!r}")
        steps = item.get("steps") or []
        _expect(isinstance(steps, list), file, item, f"{kind} {name!r}: steps must be a list")
        rest = {k: v for k, v in item.items() if k not in (kind, "steps")}
        flows.append(Flow(kind, name, tuple(_parse_step(s, file) for s in steps), _dump_extra(rest)))
    return flows


def _walk_other_files(root: Path, owned: set[str]) -> list[OpaqueBlock]:
    blocks = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(d for d in dirnames if not d.startswith(".") and d not in SKIP_DIRS)
        for fn in sorted(filenames):
            full = Path(dirpath) / fn
            rel = full.relative_to(root).as_posix()
            if rel in owned:
                continue
            blocks.append(OpaqueBlock(rel, full.read_bytes()))
    return blocks


def parse_project(root: PathLike, layout: ProjectLayout = DEFAULT_LAYOUT) -> ChatbotProject:
    """Parse a project directory into a :class:`ChatbotProject`."""
    root = Path(root)
    domain_doc, domain_text = _load(root, layout.domain)
    if domain_doc is None:
        raise MissingDomainFile(f"{root}: no domain file {layout.domain!r}")
    domain = _parse_domain(domain_doc, layout.domain)
    opaque = [OpaqueBlock(layout.domain, _top_level_block(domain_doc, domain_text, k)) for k in domain["unknown"]]
    version = domain_doc.get("version")

    nlu_blocks: list[Intent] = []
    flows: list[Flow] = []
    for rel, recognized in (
        (layout.nlu, "nlu"),
        (layout.rules, "rules"),
        (layout.stories, "stories"),
    ):
        doc, text = _load(root, rel)
        if doc is None:
            continue
        if version is None:
            version = doc.get("version")
        if recognized == "nlu":
            nlu_blocks, passthrough = _parse_nlu(doc, rel)
            opaque.extend(OpaqueBlock(rel, p, "nlu") for p in passthrough)
        else:
            flows.extend(_parse_flows(doc, rel, "rule" if recognized == "rules" else "story"))
        opaque.extend(
            OpaqueBlock(rel, _top_level_block(doc, text, k)) for k in doc if k not in ("version", recognized)
        )

    by_name = {b.name: b for b in nlu_blocks}
    intents = []
    for name, extra in domain["intents"]:
        block = by_name.pop(name, None)
        if block is None:
            intents.append(Intent(name, (), declared=True, trained=False, extra=extra))
        else:
            intents.append(Intent(name, block.examples, True, True, extra, block.nlu_extra))
    intents.extend(by_name.values())

    opaque.extend(_walk_other_files(root, set(layout.owned)))
    try:
        return ChatbotProject(
            intents=intents,
            entities=domain["entities"],
            slots=domain["slots"],
            actions=domain["actions"],
            responses=domain["responses"],
            flows=flows,
            session=domain["session"],
            opaque=opaque,
            version=None if version is None else str(version),
        )
    except DuplicateName as exc:
        raise DuplicateName(f"{root / layout.domain}: {exc}") from None


# -- serialization -----------------------------------------------------------


class _Literal(str):
    pass


class _Dumper(yaml.SafeDumper):
    def ignore_aliases(self, data):
        return True


_Dumper.add_representer(
    _Literal, lambda d, s: d.represent_scalar("tag:yaml.org,2002:str", s, style="|")
)


def _dump(doc: dict) -> str:
    return yaml.dump(doc, Dumper=_Dumper, sort_keys=False, allow_unicode=True,
                     default_flow_style=False, width=4096)


def _number(x: float) -> Union[int, float]:
    return int(x) if float(x).is_integer() else float(x)


def _named(name: str, props: dict) -> Union[str, dict]:
    return {name: props} if props else name


def _render_domain(p: ChatbotProject) -> dict:
    doc: dict = {}
    if p.version is not None:
        doc["version"] = p.version
    doc["intents"] = [_named(i.name, _load_extra(i.extra)) for i in p.intents if i.declared]
    entities = []
    for e in p.entities:
        props = {}
        if e.values:
            props["values"] = [
                {"value": v.value, "synonyms": list(v.synonyms)} if v.synonyms else v.value for v in e.values
            ]
        props.update(_load_extra(e.extra))
        entities.append(_named(e.name, props))
    doc["entities"] = entities
    slots = {}
    for s in p.slots:
        props = {"type": _SLOT_TYPE_NAMES[s.kind]}
        if s.values:
            props["values"] = list(s.values)
        extra = _load_extra(s.extra)
        mappings = [{"type": "from_entity", "entity": m.entity, **_load_extra(m.extra)} for m in s.mappings]
        mappings.extend(extra.pop("mappings", []))
        props["mappings"] = mappings
        props.update(extra)
        slots[s.name] = props
    doc["slots"] = slots
    responses = {}
    for r in p.responses:
        extras = _load_extra(r.extra).get("variants") or [{} for _ in r.variants]
        responses[r.name] = [{"text": t, **x} for t, x in zip(r.variants, extras)]
    doc["responses"] = responses
    actions = []
    for a in p.actions:
        props = {}
        if a.utters:
            props["utters"] = list(a.utters)
        props.update(_load_extra(a.extra))
        actions.append(_named(a.name, props))
    doc["actions"] = actions
    doc["session_config"] = {
        "session_expiration_time": _number(p.session.expiration_minutes),
        "carry_over_slots_to_new_session": p.session.carry_over_slots,
    }
    return doc


def _render_step(step) -> dict:
    if isinstance(step, IntentStep):
        out: dict = {"intent": step.intent}
        if step.entities:
            out["entities"] = [{e: v} if v else e for e, v in step.entities]
        return out
    if isinstance(step, ActionStep):
        return {"action": step.action}
    return yaml.safe_load(step.raw)


def _with_blocks(text: str, blocks: list[bytes]) -> bytes:
    data = text.encode("utf-8")
    for b in blocks:
        data += b
    return data


def render_project(project: ChatbotProject, layout: ProjectLayout = DEFAULT_LAYOUT) -> dict[str, bytes]:
    """Serialize to ``{relative path: file bytes}``; deterministic."""
    top_blocks: dict[str, list[bytes]] = {}
    nlu_items: list[bytes] = []
    files: dict[str, bytes] = {}
    for b in project.opaque:
        if b.path in layout.owned:
            if b.section == "nlu":
                nlu_items.append(b.content)
            else:
                top_blocks.setdefault(b.path, []).append(b.content)
        else:
            files[b.path] = b.content

    head = {"version": project.version} if project.version is not None else {}

    files[layout.domain] = _with_blocks(_dump(_render_domain(project)), top_blocks.get(layout.domain, []))

    nlu = []
    for i in project.intents:
        if not i.trained:
            continue
        examples = "".join(f"- {ex.markup()}\n" for ex in i.examples)
        nlu.append({"intent": i.name, "examples": _Literal(examples), **_load_extra(i.nlu_extra)})
    nlu.extend(yaml.safe_load(c.decode("utf-8")) for c in nlu_items)
    files[layout.nlu] = _with_blocks(_dump({**head, "nlu": nlu}), top_blocks.get(layout.nlu, []))

    for kind, key, rel in (("rule", "rules", layout.rules), ("story", "stories", layout.stories)):
        items = [
            {kind: f.name, **_load_extra(f.extra), "steps": [_render_step(s) for s in f.steps]}
            for f in project.flows
            if f.kind == kind
        ]
        files[rel] = _with_blocks(_dump({**head, key: items}), top_blocks.get(rel, []))
    return dict(sorted(files.items()))


def write_project(project: ChatbotProject, root: PathLike, layout: ProjectLayout = DEFAULT_LAYOUT) -> list[Path]:
    """Write a complete project directory and return the written paths."""
    root = Path(root)
    written = []
    try:
        for rel, data in render_project(project, layout).items():
            path = root / rel
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(data)
            written.append(path)
    except OSError as exc:
        raise IoFailure(f"cannot write project to {root}: {exc}") from exc
    return written


def content_hash(project: ChatbotProject, layout: ProjectLayout = DEFAULT_LAYOUT) -> str:
    h = hashlib.sha256()
    for rel, data in render_project(project, layout).items():
        h.update(rel.encode("utf-8") + b"\0" + str(len(data)).encode() + b"\0" + data)
    return h.hexdigest()


# -- diff --------------------------------------------------------------------


@dataclass(frozen=True)
class DiffEntry:
    role: str
    section: str
    summary: str

    def __str__(self):
        return f"{self.role}({self.section}): {self.summary}"


def _named_diff(a, b) -> Optional[str]:
    da = {x.name: x for x in a}
    db = {x.name: x for x in b}
    parts = []
    removed = sorted(set(da) - set(db))
    added = sorted(set(db) - set(da))
    changed = sorted(n for n in set(da) & set(db) if da[n] != db[n])
    if removed:
        parts.append("removed " + ", ".join(removed))
    if added:
        parts.append("added " + ", ".join(added))
    if changed:
        parts.append("changed " + ", ".join(changed))
    return "; ".join(parts) or None


def diff_projects(a: ChatbotProject, b: ChatbotProject, layout: ProjectLayout = DEFAULT_LAYOUT) -> list[DiffEntry]:
    """One entry per logical section that differs; empty iff ``a == b``."""
    out: list[DiffEntry] = []

    def add(role, section, summary):
        if summary:
            out.append(DiffEntry(role, section, summary))

    if a.version != b.version:
        add("domain", "version", f"{a.version} -> {b.version}")
    declared = lambda p: {i.name for i in p.intents if i.declared}  # noqa: E731
    if declared(a) != declared(b):
        gone, new = sorted(declared(a) - declared(b)), sorted(declared(b) - declared(a))
        add("domain", "intents", "; ".join(filter(None, [
            gone and "removed " + ", ".join(gone), new and "added " + ", ".join(new)])))
    ext = lambda p: [(i.name, i.extra) for i in p.intents if i.declared]  # noqa: E731
    if declared(a) == declared(b) and sorted(ext(a)) != sorted(ext(b)):
        add("domain", "intents", "changed intent properties")
    add("domain", "entities", _named_diff(a.entities, b.entities))
    add("domain", "slots", _named_diff(a.slots, b.slots))
    add("domain", "responses", _named_diff(a.responses, b.responses))
    add("domain", "actions", _named_diff(a.actions, b.actions))
    if a.session != b.session:
        changes = []
        if a.session.expiration_minutes != b.session.expiration_minutes:
            changes.append(f"session_expiration_time {_number(a.session.expiration_minutes)}"
                           f" -> {_number(b.session.expiration_minutes)}")
        if a.session.carry_over_slots != b.session.carry_over_slots:
            changes.append(f"carry_over_slots_to_new_session {a.session.carry_over_slots}"
                           f" -> {b.session.carry_over_slots}")
        add("domain", "session_config", "; ".join(changes))

    trained = lambda p: {i.name: i for i in p.intents if i.trained}  # noqa: E731
    ta, tb = trained(a), trained(b)
    if set(ta) != set(tb):
        gone, new = sorted(set(ta) - set(tb)), sorted(set(tb) - set(ta))
        add("nlu", "intents", "; ".join(filter(None, [
            gone and "removed block " + ", ".join(gone), new and "added block " + ", ".join(new)])))
    common = sorted(set(ta) & set(tb))
    texts = [n for n in common if [e.text for e in ta[n].examples] != [e.text for e in tb[n].examples]]
    if texts:
        add("nlu", "examples", "changed " + ", ".join(texts))
    notes = [n for n in common if n not in texts and ta[n].examples != tb[n].examples]
    if notes:
        add("nlu", "annotations", "changed " + ", ".join(notes))
    meta = [n for n in common if ta[n].nlu_extra != tb[n].nlu_extra]
    if meta:
        add("nlu", "metadata", "changed " + ", ".join(meta))

    for kind, role in (("rule", "rules"), ("story", "stories")):
        fa = {f.name: f for f in a.flows if f.kind == kind}
        fb = {f.name: f for f in b.flows if f.kind == kind}
        for name in sorted(set(fa) | set(fb)):
            if name not in fb:
                add(role, name, f"removed {kind}")
            elif name not in fa:
                add(role, name, f"added {kind}")
            elif fa[name] != fb[name]:
                add(role, name, f"steps {len(fa[name].steps)} -> {len(fb[name].steps)}"
                    if fa[name].steps != fb[name].steps else "properties changed")

    key = lambda blk: (blk.path, blk.section)  # noqa: E731
    oa, ob = {}, {}
    for blk in a.opaque:
        oa.setdefault(key(blk), []).append(blk.content)
    for blk in b.opaque:
        ob.setdefault(key(blk), []).append(blk.content)
    for k in sorted(set(oa) | set(ob)):
        if sorted(oa.get(k, [])) != sorted(ob.get(k, [])):
            path, section = k
            add(layout.role(path), path + (f"#{section}" if section else ""), "pass-through content changed")
    return out
