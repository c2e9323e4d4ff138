"""Timed hierarchical plan files.

Layout::

    ;; free-form header comments
    [<id>] <date>: (<action> <args>...) [<duration>]
    ...
    ==>
    root <id>...
    <id> <task> <args>... -> <method> <child id>...

A primitive line without an explicit id gets its 0-based position among the
primitive lines as id. A hierarchy line may omit the task arguments by dropping
the arrow: ``<id> <task> <method> <child id>...``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from hddl21.logic import Const
from hddl21.model import Task

_ACTION_LINE = re.compile(
    r"^\s*(?:(?P<id>[^\s:]+)\s+)?(?P<date>[^\s:]+)\s*:\s*\((?P<body>[^()]*)\)\s*(?:\[\s*(?P<dur>[^\]\s]*)\s*\])?\s*$"
)
_ID = re.compile(r"^[A-Za-z0-9_.\-@]+$")


class PlanFormatError(Exception):
    """Malformed plan document. ``kind`` is one of SyntaxError, NegativeDate,
    NonInteger, DuplicateIdentifier, MissingTimedEntry."""

    def __init__(self, kind: str, message: str, line: int = 0) -> None:
        self.kind = kind
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class PlanAction:
    id: str
    date: int
    task: Task
    duration: int
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class PlanDecomposition:
    id: str
    task_name: str
    task_args: tuple[str, ...] | None
    method: str
    children: tuple[str, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class PlanDocument:
    actions: tuple[PlanAction, ...] = ()
    roots: tuple[str, ...] = ()
    decompositions: tuple[PlanDecomposition, ...] = ()
    comments: tuple[str, ...] = field(default=(), compare=False)

    def action_by_id(self) -> dict[str, PlanAction]:
        return {a.id: a for a in self.actions}

    def decomposition_by_id(self) -> dict[str, PlanDecomposition]:
        return {d.id: d for d in self.decompositions}

    def makespan(self) -> int:
        return max((a.date + a.duration for a in self.actions), default=0)


def _natural(text: str, what: str, lineno: int) -> int:
    if re.fullmatch(r"\d+", text):
        return int(text)
    if re.fullmatch(r"-\d+", text):
        kind = "NegativeDate" if what == "date" else "NegativeDuration"
        raise PlanFormatError(kind, f"{what} {text} is negative", lineno)
    if re.fullmatch(r"-?\d*\.\d*", text) and any(c.isdigit() for c in text):
        raise PlanFormatError("NonInteger", f"{what} {text} is not an integer", lineno)
    raise PlanFormatError("SyntaxError", f"malformed {what} {text!r}", lineno)


def parse_plan(text: str) -> PlanDocument:
    actions: list[PlanAction] = []
    decompositions: list[PlanDecomposition] = []
    roots: tuple[str, ...] | None = None
    comments: list[str] = []
    in_hierarchy = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped.startswith(";"):
            comments.append(stripped)
            continue
        line = stripped.split(";", 1)[0].strip()
        if not line:
            continue
        if line == "==>":
            if in_hierarchy:
                raise PlanFormatError("SyntaxError", "second '==>' separator", lineno)
            in_hierarchy = True
            continue
        if not in_hierarchy:
            actions.append(_action_line(line, lineno, len(actions)))
            continue
        words = line.split()
        if words[0].lower() == "root":
            if roots is not None:
                raise PlanFormatError("SyntaxError", "duplicate root line", lineno)
            roots = tuple(words[1:])
            for r in roots:
                _check_id(r, lineno)
            continue
        decompositions.append(_hierarchy_line(words, lineno))
    if roots is None:
        if decompositions:
            raise PlanFormatError("SyntaxError", "hierarchy section has no root line", 0)
        roots = tuple(a.id for a in actions)
    actions.sort(key=lambda a: (a.date, _id_key(a.id)))
    doc = PlanDocument(tuple(actions), roots, tuple(decompositions), tuple(comments))
    _check_structure(doc)
    return doc


def _check_id(text: str, lineno: int) -> None:
    if not _ID.match(text):
        raise PlanFormatError("SyntaxError", f"malformed task id {text!r}", lineno)


def _action_line(line: str, lineno: int, position: int) -> PlanAction:
    m = _ACTION_LINE.match(line)
    if not m:
        raise PlanFormatError("SyntaxError", f"expected '<date>: (<action> <args>) [<duration>]', got {line!r}", lineno)
    date = _natural(m.group("date"), "date", lineno)
    words = m.group("body").split()
    if not words:
        raise PlanFormatError("SyntaxError", "empty action", lineno)
    dur_text = m.group("dur")
    if dur_text is None:
        raise PlanFormatError("SyntaxError", "missing [<duration>]", lineno)
    duration = _natural(dur_text, "duration", lineno)
    tid = m.group("id") if m.group("id") is not None else str(position)
    _check_id(tid, lineno)
    return PlanAction(tid, date, Task(words[0], tuple(Const(w) for w in words[1:])), duration, lineno)


def _hierarchy_line(words: list[str], lineno: int) -> PlanDecomposition:
    if len(words) < 3:
        raise PlanFormatError("SyntaxError", "expected '<id> <task> ... -> <method> <children>'", lineno)
    tid = words[0]
    _check_id(tid, lineno)
    if "->" in words:
        k = words.index("->")
        left, right = words[1:k], words[k + 1:]
        if not left or not right:
            raise PlanFormatError("SyntaxError", "expected '<id> <task> <args> -> <method> <children>'", lineno)
        task_name, args = left[0], tuple(left[1:])
    else:
        task_name, args, right = words[1], None, words[2:]
    method, children = right[0], tuple(right[1:])
    for c in children:
        _check_id(c, lineno)
    return PlanDecomposition(tid, task_name, args, method, children, lineno)


def _check_structure(doc: PlanDocument) -> None:
    seen: dict[str, int] = {}
    for a in doc.actions:
        if a.id in seen:
            raise PlanFormatError("DuplicateIdentifier", f"task id {a.id!r} used twice", a.line)
        seen[a.id] = a.line
    for d in doc.decompositions:
        if d.id in seen:
            raise PlanFormatError("DuplicateIdentifier", f"task id {d.id!r} used twice", d.line)
        seen[d.id] = d.line
    parent: dict[str, str] = {}
    for r in doc.roots:
        if r in parent:
            raise PlanFormatError("DuplicateIdentifier", f"root id {r!r} listed twice", 0)
        parent[r] = "root"
    for d in doc.decompositions:
        for c in d.children:
            if c in parent:
                raise PlanFormatError("DuplicateIdentifier", f"task id {c!r} has two parents", d.line)
            parent[c] = d.id
    for tid in parent:
        if tid not in seen:
            raise PlanFormatError(
                "MissingTimedEntry", f"task id {tid!r} has neither a timed action line nor a decomposition", 0
            )


def print_plan(doc: PlanDocument) -> str:
    lines = [c for c in doc.comments]
    for a in sorted(doc.actions, key=lambda a: (a.date, _id_key(a.id))):
        args = "".join(f" {x}" for x in a.task.args)
        lines.append(f"{a.id} {a.date}: ({a.task.name}{args}) [{a.duration}]")
    lines.append("==>")
    lines.append("root" + "".join(f" {r}" for r in doc.roots))
    for d in doc.decompositions:
        children = "".join(f" {c}" for c in d.children)
        if d.task_args is None:
            lines.append(f"{d.id} {d.task_name} {d.method}{children}")
        else:
            args = "".join(f" {x}" for x in d.task_args)
            lines.append(f"{d.id} {d.task_name}{args} -> {d.method}{children}")
    return "\n".join(lines) + "\n"


def _id_key(tid: str) -> tuple:
    return (0, int(tid), "") if tid.isdigit() else (1, 0, tid)
