"""Object model for temporal hierarchical domains and problems."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import product
from typing import Iterable, Iterator, Mapping, Union

from hddl21.logic import (
    FALSE,
    TRUE,
    And,
    Atom,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    ObjectPool,
    Or,
    SourceSpan,
    Term,
    Var,
    atoms,
    free_vars,
    substitute_all,
    term_subst,
)

SELF = "@self"
"""Placeholder id for the task a network refines; bound to the parent id on decomposition."""

ROOT = "@root"
"""Id standing for the whole initial network."""

RELATIONS = ("<", "<=", ">", ">=", "=", "!=")

Param = tuple[Var, str]


class ModelError(Exception):
    pass


class UnknownIdentifier(ModelError):
    pass


@dataclass(frozen=True, order=True)
class TimePoint:
    kind: str  # "start" | "end"
    id: str

    def __str__(self) -> str:
        return f"{self.kind}({self.id})"


def start(i: str) -> TimePoint:
    return TimePoint("start", i)


def end(i: str) -> TimePoint:
    return TimePoint("end", i)


def compare(left: int, rel: str, right: int) -> bool:
    if rel == "<":
        return left < right
    if rel == "<=":
        return left <= right
    if rel == ">":
        return left > right
    if rel == ">=":
        return left >= right
    if rel == "=":
        return left == right
    if rel == "!=":
        return left != right
    raise ValueError(f"unknown relation {rel!r}")


@dataclass(frozen=True)
class Task:
    name: str
    args: tuple[Term, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return f"({self.name}{''.join(' ' + str(a) for a in self.args)})"

    def substitute(self, binding: Mapping[Var, Term]) -> Task:
        return Task(self.name, tuple(term_subst(a, binding) for a in self.args), self.span)

    def is_ground(self) -> bool:
        return all(isinstance(a, Const) for a in self.args)


@dataclass(frozen=True)
class TaskSchema:
    name: str
    params: tuple[Param, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class OrderingConstraint:
    left: TimePoint
    rel: str
    right: TimePoint

    def __str__(self) -> str:
        return f"{self.left} {self.rel} {self.right}"

    def rename(self, mapping: Mapping[str, str]) -> OrderingConstraint:
        return OrderingConstraint(_rp(self.left, mapping), self.rel, _rp(self.right, mapping))


@dataclass(frozen=True)
class VariableConstraint:
    left: Var
    rel: str  # "=" | "!="
    right: Term

    def __str__(self) -> str:
        return f"{self.left} {self.rel} {self.right}"


# duration expressions -------------------------------------------------------


@dataclass(frozen=True)
class DurLit:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class DurOf:
    id: str

    def __str__(self) -> str:
        return f"duration({self.id})"


@dataclass(frozen=True)
class DurBin:
    op: str  # "+" | "-" | "*"
    left: DurExpr
    right: DurExpr

    def __str__(self) -> str:
        return f"({self.left} {self.op} {self.right})"


DurExpr = Union[DurLit, DurOf, DurBin]


def eval_duration(expr: DurExpr, durations: Mapping[str, int]) -> int:
    if isinstance(expr, DurLit):
        return expr.value
    if isinstance(expr, DurOf):
        if expr.id not in durations:
            raise KeyError(expr.id)
        return durations[expr.id]
    a = eval_duration(expr.left, durations)
    b = eval_duration(expr.right, durations)
    if expr.op == "+":
        return a + b
    if expr.op == "-":
        return a - b
    if expr.op == "*":
        return a * b
    raise ValueError(f"unknown duration operator {expr.op!r}")


def duration_ids(expr: DurExpr) -> Iterator[str]:
    if isinstance(expr, DurOf):
        yield expr.id
    elif isinstance(expr, DurBin):
        yield from duration_ids(expr.left)
        yield from duration_ids(expr.right)


def _rename_dur(expr: DurExpr, mapping: Mapping[str, str]) -> DurExpr:
    if isinstance(expr, DurOf):
        return DurOf(mapping.get(expr.id, expr.id))
    if isinstance(expr, DurBin):
        return DurBin(expr.op, _rename_dur(expr.left, mapping), _rename_dur(expr.right, mapping))
    return expr


@dataclass(frozen=True)
class DurationConstraint:
    left: DurExpr
    rel: str
    right: DurExpr

    def __str__(self) -> str:
        return f"{self.left} {self.rel} {self.right}"

    def ids(self) -> set[str]:
        return set(duration_ids(self.left)) | set(duration_ids(self.right))

    def rename(self, mapping: Mapping[str, str]) -> DurationConstraint:
        return DurationConstraint(_rename_dur(self.left, mapping), self.rel, _rename_dur(self.right, mapping))


# decomposition constraints --------------------------------------------------


@dataclass(frozen=True)
class AtCond:
    point: TimePoint
    formula: Formula


@dataclass(frozen=True)
class BeforeCond:
    ids: tuple[str, ...]
    formula: Formula


@dataclass(frozen=True)
class AfterCond:
    ids: tuple[str, ...]
    formula: Formula


@dataclass(frozen=True)
class BetweenCond:
    first: tuple[str, ...]
    second: tuple[str, ...]
    formula: Formula


@dataclass(frozen=True)
class MethodCond:
    when: str  # "at-start" | "at-end" | "overall"
    formula: Formula


Surface = Union[AtCond, BeforeCond, AfterCond, BetweenCond, MethodCond]


@dataclass(frozen=True)
class Anchor:
    """A date computed from one or more time points: their minimum or maximum."""

    points: tuple[TimePoint, ...]
    pick: str = "min"

    def __str__(self) -> str:
        if len(self.points) == 1:
            return str(self.points[0])
        return f"{self.pick}({', '.join(map(str, self.points))})"

    def rename(self, mapping: Mapping[str, str]) -> Anchor:
        return Anchor(tuple(_rp(p, mapping) for p in self.points), self.pick)


@dataclass(frozen=True)
class Obligation:
    """An ``(at e phi)`` requirement or a family of them.

    mode:
      ``at``       state right after the happening at ``lo``
      ``before``   state right before the happening at ``lo``
      ``span``     state after every happening e with lo <= e <= hi
      ``interior`` state after every happening e with lo < e < hi
    """

    mode: str
    lo: Anchor
    hi: Anchor | None
    formula: Formula

    def __str__(self) -> str:
        if self.hi is None:
            return f"({self.mode} {self.lo} {self.formula})"
        return f"({self.mode} [{self.lo}, {self.hi}] {self.formula})"

    def rename(self, mapping: Mapping[str, str]) -> Obligation:
        return Obligation(
            self.mode, self.lo.rename(mapping), self.hi.rename(mapping) if self.hi else None, self.formula
        )

    def substitute(self, binding: Mapping[Var, Term]) -> Obligation:
        return replace(self, formula=substitute_all(self.formula, binding))


@dataclass(frozen=True)
class DecompositionConstraint:
    surface: Surface
    obligations: tuple[Obligation, ...]

    def rename(self, mapping: Mapping[str, str]) -> DecompositionConstraint:
        return DecompositionConstraint(
            _rename_surface(self.surface, mapping), tuple(o.rename(mapping) for o in self.obligations)
        )

    def substitute(self, binding: Mapping[Var, Term]) -> DecompositionConstraint:
        return DecompositionConstraint(
            replace(self.surface, formula=substitute_all(self.surface.formula, binding)),
            tuple(o.substitute(binding) for o in self.obligations),
        )


def _rp(p: TimePoint, mapping: Mapping[str, str]) -> TimePoint:
    return TimePoint(p.kind, mapping.get(p.id, p.id))


def _rename_surface(s: Surface, mapping: Mapping[str, str]) -> Surface:
    def ids(xs: tuple[str, ...]) -> tuple[str, ...]:
        return tuple(mapping.get(x, x) for x in xs)

    if isinstance(s, AtCond):
        return AtCond(_rp(s.point, mapping), s.formula)
    if isinstance(s, BeforeCond):
        return BeforeCond(ids(s.ids), s.formula)
    if isinstance(s, AfterCond):
        return AfterCond(ids(s.ids), s.formula)
    if isinstance(s, BetweenCond):
        return BetweenCond(ids(s.first), ids(s.second), s.formula)
    return s


def surface_ids(s: Surface) -> tuple[str, ...]:
    if isinstance(s, AtCond):
        return (s.point.id,)
    if isinstance(s, (BeforeCond, AfterCond)):
        return s.ids
    if isinstance(s, BetweenCond):
        return s.first + s.second
    return ()


def normalize_constraint(c: Surface, scope: TemporalTaskNetwork) -> tuple[Obligation, ...]:
    """Rewrite a surface decomposition constraint into ``(at e phi)`` obligations.

    Network start and end are the points of :data:`SELF`, which decomposition
    later binds to the refined task.
    """
    known = set(scope.ids) | {SELF}
    for i in surface_ids(c):
        if i not in known:
            raise UnknownIdentifier(f"constraint references unknown task id {i!r}")
    net_start = Anchor((start(SELF),))
    net_end = Anchor((end(SELF),))
    if isinstance(c, AtCond):
        return (Obligation("at", Anchor((c.point,)), None, c.formula),)
    if isinstance(c, BeforeCond):
        lo = Anchor(tuple(start(i) for i in c.ids), "min") if c.ids else net_start
        return (Obligation("before", lo, None, c.formula),)
    if isinstance(c, AfterCond):
        lo = Anchor(tuple(end(i) for i in c.ids), "max") if c.ids else net_end
        return (Obligation("at", lo, None, c.formula),)
    if isinstance(c, BetweenCond):
        lo = Anchor(tuple(end(i) for i in c.first), "max") if c.first else net_start
        hi = Anchor(tuple(start(i) for i in c.second), "min") if c.second else net_end
        return (Obligation("span", lo, hi, c.formula),)
    if isinstance(c, MethodCond):
        if c.when == "at-start":
            return (Obligation("before", net_start, None, c.formula),)
        if c.when == "at-end":
            return (Obligation("at", net_end, None, c.formula),)
        if c.when == "overall":
            return (Obligation("interior", net_start, net_end, c.formula),)
        raise ValueError(f"unknown method condition {c.when!r}")
    raise TypeError(f"not a decomposition constraint: {c!r}")


# networks -------------------------------------------------------------------


@dataclass(frozen=True)
class AuxRecord:
    """A decomposed task whose start/end survive as derived time points."""

    id: str
    task: Task
    children: tuple[str, ...]


@dataclass(frozen=True)
class TemporalTaskNetwork:
    ids: tuple[str, ...] = ()
    alpha: Mapping[str, Task] = field(default_factory=dict)
    co: tuple[OrderingConstraint, ...] = ()
    cv: tuple[VariableConstraint, ...] = ()
    cd: tuple[DurationConstraint, ...] = ()
    ct: tuple[DecompositionConstraint, ...] = ()
    aux: tuple[AuxRecord, ...] = ()
    ordered: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", dict(self.alpha))

    def task(self, i: str) -> Task:
        return self.alpha[i]

    def aux_ids(self) -> set[str]:
        return {r.id for r in self.aux}

    def all_ids(self) -> set[str]:
        return set(self.ids) | self.aux_ids()

    def substitute(self, binding: Mapping[Var, Term]) -> TemporalTaskNetwork:
        return replace(
            self,
            alpha={i: t.substitute(binding) for i, t in self.alpha.items()},
            cv=tuple(
                VariableConstraint(v.left, v.rel, term_subst(v.right, binding)) for v in self.cv
            ),
            ct=tuple(c.substitute(binding) for c in self.ct),
            aux=tuple(AuxRecord(r.id, r.task.substitute(binding), r.children) for r in self.aux),
        )

    def rename(self, mapping: Mapping[str, str]) -> TemporalTaskNetwork:
        def m(i: str) -> str:
            return mapping.get(i, i)

        return TemporalTaskNetwork(
            ids=tuple(m(i) for i in self.ids),
            alpha={m(i): t for i, t in self.alpha.items()},
            co=tuple(c.rename(mapping) for c in self.co),
            cv=self.cv,
            cd=tuple(c.rename(mapping) for c in self.cd),
            ct=tuple(c.rename(mapping) for c in self.ct),
            aux=tuple(AuxRecord(m(r.id), r.task, tuple(m(c) for c in r.children)) for r in self.aux),
            ordered=self.ordered,
        )

    def formulas(self) -> Iterator[Formula]:
        for c in self.ct:
            yield c.surface.formula


def make_network(
    ids: Iterable[str] = (),
    alpha: Mapping[str, Task] | None = None,
    co: Iterable[OrderingConstraint] = (),
    cv: Iterable[VariableConstraint] = (),
    cd: Iterable[DurationConstraint] = (),
    ct: Iterable[Surface] = (),
    ordered: bool = False,
) -> TemporalTaskNetwork:
    """Build a network, normalizing its surface decomposition constraints."""
    net = TemporalTaskNetwork(tuple(ids), dict(alpha or {}), tuple(co), tuple(cv), tuple(cd), ordered=ordered)
    normalized = tuple(DecompositionConstraint(s, normalize_constraint(s, net)) for s in ct)
    return replace(net, ct=normalized)


# actions and methods --------------------------------------------------------


@dataclass(frozen=True)
class SnapAction:
    name: str
    precond: Formula = TRUE
    effect_pos: tuple[Atom, ...] = ()
    effect_neg: tuple[Atom, ...] = ()

    def substitute(self, binding: Mapping[Var, Term]) -> SnapAction:
        return SnapAction(
            self.name,
            substitute_all(self.precond, binding),
            tuple(substitute_all(a, binding) for a in self.effect_pos),  # type: ignore[misc]
            tuple(substitute_all(a, binding) for a in self.effect_neg),  # type: ignore[misc]
        )


@dataclass(frozen=True)
class InstantAction:
    """A primitive task carried out by a single snap action."""

    name: str
    params: tuple[Param, ...]
    snap: SnapAction
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class DurativeAction:
    name: str
    params: tuple[Param, ...]
    start: SnapAction
    end: SnapAction
    inv: Formula
    duration: DurExpr
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


Action = Union[InstantAction, DurativeAction]


@dataclass(frozen=True)
class Method:
    name: str
    params: tuple[Param, ...]
    task: Task
    tn: TemporalTaskNetwork
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Domain:
    name: str
    requirements: tuple[str, ...] = ()
    types: tuple[tuple[str, str], ...] = ()
    constants: tuple[tuple[str, str], ...] = ()
    predicates: tuple[tuple[str, tuple[Param, ...]], ...] = ()
    tasks: tuple[TaskSchema, ...] = ()
    actions: tuple[Action, ...] = ()
    methods: tuple[Method, ...] = ()

    def predicate_arity(self) -> dict[str, int]:
        return {name: len(params) for name, params in self.predicates}

    def action(self, name: str) -> Action | None:
        for a in self.actions:
            if a.name == name:
                return a
        return None

    def task_schema(self, name: str) -> TaskSchema | None:
        for t in self.tasks:
            if t.name == name:
                return t
        return None

    def is_primitive(self, name: str) -> bool:
        return self.action(name) is not None

    def methods_for(self, task_name: str) -> list[Method]:
        return [m for m in self.methods if m.task.name == task_name]

    def task_kind(self, name: str) -> str | None:
        if self.is_primitive(name):
            return "primitive"
        if self.task_schema(name) is not None:
            return "compound"
        return None


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    objects: tuple[tuple[str, str], ...] = ()
    init: tuple[Atom, ...] = ()
    htn: TemporalTaskNetwork = field(default_factory=TemporalTaskNetwork)
    htn_params: tuple[Param, ...] = ()
    goal: Formula | None = None
    requirements: tuple[str, ...] = ()

    def initial_state(self) -> frozenset[Atom]:
        return frozenset(self.init)


def object_pool(domain: Domain, problem: Problem | None = None) -> ObjectPool:
    objs = list(domain.constants)
    if problem is not None:
        seen = {n for n, _ in objs}
        objs.extend((n, t) for n, t in problem.objects if n not in seen)
    return ObjectPool(tuple(objs), domain.types)


# static checks --------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    rule: str
    message: str
    span: SourceSpan | None = None

    def format(self, default_file: str = "<input>") -> str:
        if self.span is not None:
            loc = f"{self.span.file}:{self.span.line}:{self.span.column}"
        else:
            loc = f"{default_file}:0:0"
        return f"{loc}: {self.severity}: {self.message} [{self.rule}]"

    def to_json(self) -> dict:
        return {
            "severity": self.severity,
            "rule": self.rule,
            "message": self.message,
            "file": self.span.file if self.span else None,
            "line": self.span.line if self.span else None,
            "column": self.span.column if self.span else None,
        }


class _Checker:
    def __init__(self, domain: Domain, problem: Problem | None) -> None:
        self.d = domain
        self.p = problem
        self.out: list[Diagnostic] = []
        self.arity = domain.predicate_arity()
        self.pool_names = {n for n, _ in domain.constants}
        if problem is not None:
            self.pool_names |= {n for n, _ in problem.objects}
        self.types = {"object"} | {c for c, _ in domain.types} | {p for _, p in domain.types}

    def emit(self, severity: str, rule: str, message: str, span: SourceSpan | None = None) -> None:
        self.out.append(Diagnostic(severity, rule, message, span))

    def term(self, t: Term, scope: set[Var], where: str, span: SourceSpan | None) -> None:
        if isinstance(t, Var):
            if t not in scope:
                self.emit("error", "unbound-variable", f"variable {t} is not declared in {where}", span)
        elif t.name not in self.pool_names:
            self.emit("error", "unknown-object", f"unknown object {t} in {where}", span)

    def atom(self, a: Atom, scope: set[Var], where: str, span: SourceSpan | None = None) -> None:
        span = a.span or span
        if a.predicate not in self.arity:
            self.emit("error", "unknown-predicate", f"unknown predicate {a.predicate!r} in {where}", span)
        elif self.arity[a.predicate] != len(a.args):
            self.emit(
                "error",
                "arity-mismatch",
                f"predicate {a.predicate!r} expects {self.arity[a.predicate]} arguments, got {len(a.args)} in {where}",
                span,
            )
        for t in a.args:
            self.term(t, scope, where, span)

    def formula(self, phi: Formula, scope: set[Var], where: str, span: SourceSpan | None = None) -> None:
        if isinstance(phi, Atom):
            self.atom(phi, scope, where, span)
        elif isinstance(phi, Eq):
            self.term(phi.left, scope, where, span)
            self.term(phi.right, scope, where, span)
        elif isinstance(phi, Not):
            self.formula(phi.body, scope, where, span)
        elif isinstance(phi, (And, Or)):
            for p in phi.parts:
                self.formula(p, scope, where, span)
        elif isinstance(phi, Implies):
            self.formula(phi.antecedent, scope, where, span)
            self.formula(phi.consequent, scope, where, span)
        elif isinstance(phi, (Forall, Exists)):
            self.type_name(phi.type, where, span)
            self.formula(phi.body, scope | {phi.var}, where, span)

    def type_name(self, t: str, where: str, span: SourceSpan | None) -> None:
        if t not in self.types:
            self.emit("error", "unknown-type", f"unknown type {t!r} in {where}", span)

    def params(self, params: Iterable[Param], where: str, span: SourceSpan | None) -> set[Var]:
        for _, t in params:
            self.type_name(t, where, span)
        return {v for v, _ in params}

    def task_ref(self, t: Task, scope: set[Var], where: str) -> None:
        action = self.d.action(t.name)
        schema = self.d.task_schema(t.name)
        if action is None and schema is None:
            self.emit("error", "unknown-task", f"unknown task {t.name!r} in {where}", t.span)
            return
        expected = len(action.params) if action is not None else len(schema.params)  # type: ignore[union-attr]
        if expected != len(t.args):
            self.emit(
                "error",
                "arity-mismatch",
                f"task {t.name!r} expects {expected} arguments, got {len(t.args)} in {where}",
                t.span,
            )
        for a in t.args:
            self.term(a, scope, where, t.span)

    def network(self, w: TemporalTaskNetwork, scope: set[Var], where: str, span: SourceSpan | None) -> None:
        ids = set(w.ids)
        if len(ids) != len(w.ids):
            self.emit("error", "duplicate-identifier", f"duplicate task identifier in {where}", span)
        for i in w.ids:
            if i not in w.alpha:
                self.emit("error", "dangling-identifier", f"identifier {i!r} has no task in {where}", span)
            else:
                self.task_ref(w.alpha[i], scope, where)
        known = ids | {SELF}
        for c in w.co:
            for p in (c.left, c.right):
                if p.id not in known:
                    self.emit("error", "dangling-identifier", f"ordering constraint names unknown id {p.id!r} in {where}", span)
        for v in w.cv:
            self.term(v.left, scope, where, span)
            self.term(v.right, scope, where, span)
        for d in w.cd:
            for i in d.ids():
                if i not in known:
                    self.emit("error", "dangling-identifier", f"duration constraint names unknown id {i!r} in {where}", span)
        for c in w.ct:
            for i in surface_ids(c.surface):
                if i not in known:
                    self.emit("error", "dangling-identifier", f"decomposition constraint names unknown id {i!r} in {where}", span)
            self.formula(c.surface.formula, scope, where, span)

    def run(self) -> list[Diagnostic]:
        d = self.d
        for child, parent in d.types:
            if child == parent:
                self.emit("error", "type-cycle", f"type {child!r} is its own parent")
        seen: set[str] = set()
        for a in d.actions:
            if a.name in seen:
                self.emit("error", "duplicate-declaration", f"action {a.name!r} declared twice", a.span)
            seen.add(a.name)
            if d.task_schema(a.name) is not None:
                self.emit("error", "duplicate-declaration", f"{a.name!r} is both an action and a compound task", a.span)
            self.action(a)
        task_names: set[str] = set()
        for t in d.tasks:
            if t.name in task_names:
                self.emit("error", "duplicate-declaration", f"task {t.name!r} declared twice", t.span)
            task_names.add(t.name)
            self.params(t.params, f"task {t.name}", t.span)
            if not d.methods_for(t.name) and d.action(t.name) is None:
                self.emit("warning", "no-method", f"compound task {t.name!r} has no method", t.span)
        method_names: set[str] = set()
        for m in d.methods:
            where = f"method {m.name}"
            if m.name in method_names:
                self.emit("error", "duplicate-declaration", f"method {m.name!r} declared twice", m.span)
            method_names.add(m.name)
            scope = self.params(m.params, where, m.span)
            schema = d.task_schema(m.task.name)
            if schema is None:
                self.emit("error", "method-task-undeclared", f"{where} refines undeclared compound task {m.task.name!r}", m.span)
            elif len(schema.params) != len(m.task.args):
                self.emit("error", "arity-mismatch", f"{where}: task {m.task.name!r} expects {len(schema.params)} arguments", m.span)
            for a in m.task.args:
                self.term(a, scope, where, m.span)
            self.network(m.tn, scope, where, m.span)
        if self.p is not None:
            self.problem(self.p)
        return self.out

    def action(self, a: Action) -> None:
        where = f"action {a.name}"
        scope = self.params(a.params, where, a.span)
        snaps = [a.snap] if isinstance(a, InstantAction) else [a.start, a.end]
        for snap in snaps:
            self.formula(snap.precond, scope, where, a.span)
            for e in snap.effect_pos + snap.effect_neg:
                self.atom(e, scope, where, a.span)
        if isinstance(a, DurativeAction):
            self.formula(a.inv, scope, where, a.span)
            if not list(duration_ids(a.duration)):
                try:
                    if eval_duration(a.duration, {}) < 0:
                        self.emit("error", "negative-duration", f"{where} has a negative duration", a.span)
                except KeyError:
                    pass
        pool = object_pool(self.d, self.p)
        for snap in snaps:
            overlap = _static_overlap(snap, a.params, pool)
            if overlap is not None:
                self.emit(
                    "warning",
                    "effect-overlap",
                    f"{where}: {overlap} is both added and deleted by the {snap.name} snap for some binding",
                    a.span,
                )

    def problem(self, p: Problem) -> None:
        if p.domain_name != self.d.name:
            self.emit("error", "domain-mismatch", f"problem is for domain {p.domain_name!r}, not {self.d.name!r}")
        for _, t in p.objects:
            self.type_name(t, "objects", None)
        for a in p.init:
            self.atom(a, set(), "init")
            if not a.is_ground():
                self.emit("error", "non-ground-init", f"initial atom {a} is not ground", a.span)
        scope = self.params(p.htn_params, "htn", None)
        self.network(p.htn, scope, "htn", None)
        if p.goal is not None:
            self.formula(p.goal, free_vars(p.goal), "goal")


def _static_overlap(snap: SnapAction, params: tuple[Param, ...], pool: ObjectPool) -> Atom | None:
    """First added atom that some type-respecting binding also deletes."""
    types = dict(params)
    for pos in snap.effect_pos:
        for neg in snap.effect_neg:
            if pos.predicate != neg.predicate or len(pos.args) != len(neg.args):
                continue
            involved = sorted({t for t in pos.args + neg.args if isinstance(t, Var)})
            domains = [pool.of_type(types.get(v, "object")) for v in involved]
            for combo in product(*domains):
                b = dict(zip(involved, combo))
                if tuple(term_subst(t, b) for t in pos.args) == tuple(term_subst(t, b) for t in neg.args):
                    return pos
    return None


def validate_model(domain: Domain, problem: Problem | None = None) -> list[Diagnostic]:
    """Static well-formedness diagnostics; empty when the model is sound to ground."""
    try:
        return _Checker(domain, problem).run()
    except Exception as exc:  # noqa: BLE001 - a malformed model must still yield diagnostics
        return [Diagnostic("error", "internal", f"model check failed: {exc}")]


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.severity == "error" for d in diags)

