"""Goal workflow definitions: parsing, validation, and the workflow repository.

A repository file is UTF-8 YAML with a top-level ``workflow:`` list. Each
entry carries a required ``goal`` description plus either ``steps`` (ordered
``name``/``description`` pairs, the guidance paradigm) or ``slots`` (the
information-collection paradigm). An entry may pin an explicit ``id``;
otherwise one is slugified from the goal text.
"""

from __future__ import annotations

import os
import re
import tempfile
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import yaml

from .text import slugify

ID_RE = re.compile(r"^[a-z0-9-]+$")


class Paradigm(str, Enum):
    GUIDANCE = "guidance"
    SLOT_FILLING = "slot_filling"


@dataclass(frozen=True)
class Step:
    """One ordered instruction inside a guidance workflow."""

    index: int
    name: str
    description: str


@dataclass(frozen=True)
class SlotSpec:
    """One piece of information a slot-filling workflow collects."""

    name: str
    description: str = ""
    required: bool = True
    pattern: str | None = None


@dataclass(frozen=True)
class GoalWorkflow:
    id: str
    goal: str
    steps: tuple[Step, ...] = ()
    slots: tuple[SlotSpec, ...] = ()

    @property
    def paradigm(self) -> Paradigm:
        return Paradigm.SLOT_FILLING if self.slots else Paradigm.GUIDANCE


@dataclass(frozen=True)
class Violation:
    """A machine-readable schema violation with a human message."""

    code: str
    message: str
    workflow_id: str = ""
    path: str = ""

    def __str__(self) -> str:
        where = f" [{self.workflow_id}:{self.path}]" if self.workflow_id or self.path else ""
        return f"{self.code}: {self.message}{where}"


class RepositoryError(Exception):
    pass


class RepositoryParseError(RepositoryError):
    """Syntactically invalid YAML; carries the parser's position when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class SchemaError(RepositoryError):
    """Structurally invalid repository content."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


class DuplicateIdError(RepositoryError):
    def __init__(self, workflow_id: str):
        self.workflow_id = workflow_id
        super().__init__(f"workflow id already exists: {workflow_id!r}")


@dataclass(frozen=True)
class Repository:
    """Immutable collection of validated workflows keyed by id."""

    workflows: dict[str, GoalWorkflow] = field(default_factory=dict)
    source: Path | None = None

    def get(self, workflow_id: str) -> GoalWorkflow:
        return self.workflows[workflow_id]

    def __len__(self) -> int:
        return len(self.workflows)

    def __iter__(self):
        return iter(self.workflows.values())


def validate_workflow(w: GoalWorkflow) -> list[Violation]:
    """All invariant violations for one workflow; empty means valid."""
    violations: list[Violation] = []
    wid = w.id

    if not w.id or not ID_RE.match(w.id):
        violations.append(Violation("InvalidId", f"id must match [a-z0-9-]+, got {w.id!r}", wid, "id"))
    if not w.goal or not w.goal.strip():
        violations.append(Violation("MissingGoal", "goal description is required", wid, "goal"))

    if w.steps and w.slots:
        violations.append(
            Violation("MixedParadigm", "a workflow may define steps or slots, not both", wid, "")
        )
    if not w.steps and not w.slots:
        violations.append(
            Violation("NoParadigm", "a workflow must define steps or slots", wid, "")
        )

    for i, step in enumerate(w.steps):
        if step.index != i:
            violations.append(
                Violation("BadStepIndex", f"step index {step.index} at position {i}", wid, f"steps[{i}]")
            )
        if not step.name.strip():
            violations.append(Violation("EmptyStepName", "step name is required", wid, f"steps[{i}].name"))
        if not step.description.strip():
            violations.append(
                Violation("EmptyStepDescription", "step description is required", wid, f"steps[{i}].description")
            )

    seen_slots: set[str] = set()
    for i, slot in enumerate(w.slots):
        if not slot.name.strip():
            violations.append(Violation("EmptySlotName", "slot name is required", wid, f"slots[{i}].name"))
        elif slot.name in seen_slots:
            violations.append(
                Violation("DuplicateSlotName", f"slot name repeated: {slot.name!r}", wid, f"slots[{i}].name")
            )
        seen_slots.add(slot.name)
        if slot.pattern is not None:
            try:
                re.compile(slot.pattern)
            except re.error as exc:
                violations.append(
                    Violation("InvalidPattern", f"pattern does not compile: {exc}", wid, f"slots[{i}].pattern")
                )
    return violations


def _entry_to_workflow(entry: object, position: int, violations: list[Violation]) -> GoalWorkflow | None:
    path = f"workflow[{position}]"
    if not isinstance(entry, dict):
        violations.append(Violation("BadEntry", "workflow entry must be a mapping", "", path))
        return None

    goal = str(entry.get("goal") or "").strip()
    raw_id = entry.get("id")
    wid = str(raw_id).strip() if raw_id is not None else slugify(goal)

    steps: list[Step] = []
    raw_steps = entry.get("steps") or []
    if not isinstance(raw_steps, list):
        violations.append(Violation("BadSteps", "steps must be a list", wid, f"{path}.steps"))
        raw_steps = []
    for i, raw in enumerate(raw_steps):
        if not isinstance(raw, dict):
            violations.append(Violation("BadStep", "step must be a mapping", wid, f"{path}.steps[{i}]"))
            continue
        steps.append(
            Step(index=i, name=str(raw.get("name") or "").strip(), description=str(raw.get("description") or "").strip())
        )

    slots: list[SlotSpec] = []
    raw_slots = entry.get("slots") or []
    if not isinstance(raw_slots, list):
        violations.append(Violation("BadSlots", "slots must be a list", wid, f"{path}.slots"))
        raw_slots = []
    for i, raw in enumerate(raw_slots):
        if isinstance(raw, str):
            # shorthand: a bare slot name
            slots.append(SlotSpec(name=raw.strip()))
            continue
        if not isinstance(raw, dict):
            violations.append(Violation("BadSlot", "slot must be a mapping or string", wid, f"{path}.slots[{i}]"))
            continue
        pattern = raw.get("pattern")
        slots.append(
            SlotSpec(
                name=str(raw.get("name") or "").strip(),
                description=str(raw.get("description") or "").strip(),
                required=bool(raw.get("required", True)),
                pattern=None if pattern is None else str(pattern),
            )
        )

    workflow = GoalWorkflow(id=wid, goal=goal, steps=tuple(steps), slots=tuple(slots))
    violations.extend(validate_workflow(workflow))
    return workflow


def parse_repository(yaml_text: str, source: Path | None = None) -> Repository:
    """Parse and validate a repository document.

    Raises ``RepositoryParseError`` for malformed YAML and ``SchemaError``
    (carrying every violation found) for structurally invalid content.
    """
    try:
        data = yaml.safe_load(yaml_text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            raise RepositoryParseError(str(getattr(exc, "problem", exc)), mark.line + 1, mark.column + 1) from exc
        raise RepositoryParseError(str(exc)) from exc

    if data is None:
        data = {"workflow": []}
    if not isinstance(data, dict) or "workflow" not in data:
        raise SchemaError([Violation("MissingWorkflowKey", "top-level `workflow:` list is required")])
    entries = data["workflow"]
    if entries is None:
        entries = []
    if not isinstance(entries, list):
        raise SchemaError([Violation("BadWorkflowList", "`workflow:` must hold a list")])

    violations: list[Violation] = []
    workflows: dict[str, GoalWorkflow] = {}
    for position, entry in enumerate(entries):
        workflow = _entry_to_workflow(entry, position, violations)
        if workflow is None:
            continue
        if workflow.id in workflows:
            violations.append(
                Violation("DuplicateId", f"workflow id repeated: {workflow.id!r}", workflow.id, f"workflow[{position}].id")
            )
            continue
        workflows[workflow.id] = workflow

    if violations:
        raise SchemaError(violations)
    return Repository(workflows=workflows, source=source)


def serialize_repository(repo: Repository) -> str:
    """YAML text that ``parse_repository`` maps back to an equal repository."""
    entries = []
    for w in repo:
        entry: dict[str, object] = {"id": w.id, "goal": w.goal}
        if w.steps:
            entry["steps"] = [{"name": s.name, "description": s.description} for s in w.steps]
        if w.slots:
            slot_entries = []
            for s in w.slots:
                slot_entry: dict[str, object] = {"name": s.name}
                if s.description:
                    slot_entry["description"] = s.description
                if not s.required:
                    slot_entry["required"] = False
                if s.pattern is not None:
                    slot_entry["pattern"] = s.pattern
                slot_entries.append(slot_entry)
            entry["slots"] = slot_entries
        entries.append(entry)
    return yaml.safe_dump({"workflow": entries}, sort_keys=False, allow_unicode=True)


def save_repository(repo: Repository, path: Path | None = None) -> None:
    """Write the repository to disk atomically (temp file, then rename)."""
    target = path or repo.source
    if target is None:
        raise RepositoryError("repository has no file backing")
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=".goals-", suffix=".yaml")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(serialize_repository(repo))
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def add_workflow(repo: Repository, w: GoalWorkflow) -> Repository:
    """A new repository containing ``w``; persists when file-backed."""
    violations = validate_workflow(w)
    if violations:
        raise SchemaError(violations)
    if w.id in repo.workflows:
        raise DuplicateIdError(w.id)
    updated = replace(repo, workflows={**repo.workflows, w.id: w})
    if updated.source is not None:
        save_repository(updated)
    return updated


def load_repository(path: Path | str) -> Repository:
    path = Path(path)
    return parse_repository(path.read_text(encoding="utf-8"), source=path)
