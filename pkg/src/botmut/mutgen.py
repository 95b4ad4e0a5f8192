"""Materialize every mutant of a project as a full project directory."""

from __future__ import annotations

import json
import shutil
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

from .model import ChatbotProject
from .operators import OPERATORS, MutationSite, OperatorId, apply, category, enumerate_sites
from .rasa import DEFAULT_LAYOUT, ProjectLayout, content_hash, diff_projects, parse_project, write_project

__all__ = ["ManifestEntry", "MutantManifest", "generate_mutants", "load_manifest", "MANIFEST_NAME"]

MANIFEST_NAME = "mutants.json"


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    operator: str
    category: str
    site: str
    changed: tuple[str, ...]
    dir: str

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "operator": self.operator,
            "category": self.category,
            "site": self.site,
            "changed": list(self.changed),
            "dir": self.dir,
        }


@dataclass(frozen=True)
class MutantManifest:
    original_hash: str
    mutants: tuple[ManifestEntry, ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.mutants)

    def as_dict(self) -> dict:
        return {"original_hash": self.original_hash, "mutants": [m.as_dict() for m in self.mutants]}

    def dumps(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=False) + "\n"

    def by_category(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for m in self.mutants:
            counts[m.category] = counts.get(m.category, 0) + 1
        return counts


def load_manifest(path: Union[str, Path]) -> MutantManifest:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    data = json.loads(path.read_text(encoding="utf-8"))
    entries = tuple(
        ManifestEntry(m["id"], m["operator"], m["category"], m["site"], tuple(m["changed"]), m["dir"])
        for m in data["mutants"]
    )
    return MutantManifest(data["original_hash"], entries)


def _mutate(original: ChatbotProject, op: OperatorId, index: int, site: MutationSite,
            out_dir: Path, layout: ProjectLayout) -> ManifestEntry:
    mutant = apply(original, site)
    mutant_id = f"{op.value}_{index}_{content_hash(mutant, layout)[:8]}"
    target = out_dir / mutant_id
    if target.exists():
        shutil.rmtree(target)
    write_project(mutant, target, layout)
    changed = tuple(sorted({d.role for d in diff_projects(original, mutant, layout)}))
    return ManifestEntry(mutant_id, op.value, category(op).value, site.describe(), changed, mutant_id)


def generate_mutants(
    project_dir: Union[str, Path],
    operators: Optional[Iterable[Union[str, OperatorId]]] = None,
    out_dir: Union[str, Path] = "mutants",
    jobs: int = 1,
    layout: ProjectLayout = DEFAULT_LAYOUT,
) -> MutantManifest:
    """Apply every site of every selected operator and write ``mutants.json``.

    ``operators=None`` selects all eleven; an empty selection yields an empty
    manifest. Entry order follows operator order, then site order, whatever
    ``jobs`` is.
    """
    original = parse_project(project_dir, layout)
    selected = OPERATORS if operators is None else [op for op in OPERATORS if op in
                                                     {OperatorId(o) for o in operators}]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    work = [(op, i, site) for op in selected for i, site in enumerate(enumerate_sites(original, op))]
    if jobs > 1 and len(work) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(lambda w: _mutate(original, *w, out_dir, layout), work))
    else:
        entries = [_mutate(original, *w, out_dir, layout) for w in work]

    manifest = MutantManifest(content_hash(original, layout), tuple(entries))
    (out_dir / MANIFEST_NAME).write_text(manifest.dumps(), encoding="utf-8")
    return manifest
