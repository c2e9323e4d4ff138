"""Instantiate lifted actions, methods and the initial network over the objects.

Variable constraints are discharged here: a binding that violates an ``=`` or
``!=`` constraint is never emitted, so ground networks need not re-check them.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping, Sequence

from hddl21.logic import (
    FALSE,
    TRUE,
    Atom,
    Const,
    Formula,
    ObjectPool,
    Term,
    Var,
    atoms,
    ground,
    simplify,
    substitute_all,
)
from hddl21.model import (
    DecompositionConstraint,
    Diagnostic,
    Domain,
    DurativeAction,
    InstantAction,
    Method,
    Param,
    Problem,
    SnapAction,
    Task,
    TemporalTaskNetwork,
    VariableConstraint,
    eval_duration,
    object_pool,
)


class GroundingError(Exception):
    pass


class NegativeDuration(GroundingError):
    pass


class EffectOverlap(GroundingError):
    pass


Binding = dict  # dict[Var, Const]


@dataclass(frozen=True)
class GroundAction:
    """A ground primitive task. Instant actions have ``end is None`` and duration 0."""

    name: str
    args: tuple[Const, ...]
    start: SnapAction
    end: SnapAction | None
    inv: Formula
    duration: int

    @property
    def task(self) -> Task:
        return Task(self.name, self.args)

    @property
    def durative(self) -> bool:
        return self.end is not None

    def __str__(self) -> str:
        return str(self.task)


@dataclass(frozen=True)
class GroundMethod:
    name: str
    args: tuple[Const, ...]
    task: Task
    tn: TemporalTaskNetwork

    def __str__(self) -> str:
        return f"{self.name}{tuple(a.name for a in self.args)}"


@dataclass
class GroundModel:
    pool: ObjectPool
    init: frozenset
    actions: tuple[GroundAction, ...]
    methods: tuple[GroundMethod, ...]
    initial_networks: tuple[TemporalTaskNetwork, ...]
    goal: Formula | None
    stats: dict[str, dict[str, int]] = field(default_factory=dict)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._by_task = {a.task: a for a in self.actions}
        self._methods: dict[Task, list[GroundMethod]] = {}
        for m in self.methods:
            self._methods.setdefault(m.task, []).append(m)

    def action_for(self, task: Task) -> GroundAction | None:
        return self._by_task.get(task)

    def methods_for(self, task: Task) -> list[GroundMethod]:
        return self._methods.get(task, [])

    def to_json(self) -> dict:
        """Deterministic debugging dump; identical inputs give identical output."""
        return {
            "objects": [[n, t] for n, t in self.pool.objects],
            "init": sorted(str(a) for a in self.init),
            "actions": [
                {
                    "task": str(a.task),
                    "duration": a.duration,
                    "start": _snap_json(a.start),
                    "end": _snap_json(a.end) if a.end else None,
                    "inv": str(a.inv),
                }
                for a in self.actions
            ],
            "methods": [
                {
                    "name": m.name,
                    "args": [c.name for c in m.args],
                    "task": str(m.task),
                    "subtasks": [[i, str(m.tn.alpha[i])] for i in m.tn.ids],
                    "ordering": [str(c) for c in m.tn.co],
                    "durations": [str(c) for c in m.tn.cd],
                    "constraints": [str(o) for c in m.tn.ct for o in c.obligations],
                }
                for m in self.methods
            ],
            "initial_networks": [
                {"subtasks": [[i, str(w.alpha[i])] for i in w.ids], "ordering": [str(c) for c in w.co]}
                for w in self.initial_networks
            ],
            "goal": None if self.goal is None else str(self.goal),
            "stats": self.stats,
        }


def _snap_json(s: SnapAction) -> dict:
    return {
        "pre": str(s.precond),
        "add": [str(a) for a in s.effect_pos],
        "del": [str(a) for a in s.effect_neg],
    }


def _satisfies(c: VariableConstraint, b: Mapping[Var, Const]) -> bool | None:
    left = b.get(c.left)
    right = b.get(c.right) if isinstance(c.right, Var) else c.right
    if left is None or right is None:
        return None
    return (left == right) == (c.rel == "=")


def enumerate_bindings(
    params: Sequence[Param], pool: ObjectPool, cv: Sequence[VariableConstraint] = ()
) -> Iterator[Binding]:
    """Type-respecting total bindings that satisfy every constraint in ``cv``.

    Order is lexicographic: first by parameter declaration order, then by
    object declaration order. Constraints are checked as soon as both sides are bound.
    """
    params = list(params)
    domains = [pool.of_type(t) for _, t in params]
    cv = list(cv)

    def rec(k: int, b: dict[Var, Const]) -> Iterator[Binding]:
        if k == len(params):
            yield dict(b)
            return
        var = params[k][0]
        for c in domains[k]:
            b[var] = c
            if all(_satisfies(x, b) is not False for x in cv):
                yield from rec(k + 1, b)
            del b[var]

    yield from rec(0, {})


def _ground_formula(phi: Formula, b: Mapping[Var, Term], pool: ObjectPool) -> Formula:
    return ground(substitute_all(phi, b), pool)


def _ground_snap(s: SnapAction, b: Mapping[Var, Term], pool: ObjectPool) -> SnapAction:
    return SnapAction(
        s.name,
        _ground_formula(s.precond, b, pool),
        tuple(dict.fromkeys(substitute_all(a, b) for a in s.effect_pos)),  # type: ignore[misc]
        tuple(dict.fromkeys(substitute_all(a, b) for a in s.effect_neg)),  # type: ignore[misc]
    )


def ground_action(a: InstantAction | DurativeAction, b: Mapping[Var, Const], pool: ObjectPool) -> GroundAction:
    missing = [v for v, _ in a.params if v not in b]
    if missing:
        raise GroundingError(f"binding for {a.name} misses {', '.join(v.name for v in missing)}")
    args = tuple(b[v] for v, _ in a.params)
    if isinstance(a, InstantAction):
        snap = _ground_snap(a.snap, b, pool)
        _check_disjoint(snap, a.name, args)
        return GroundAction(a.name, args, snap, None, TRUE, 0)
    delta = eval_duration(a.duration, {})
    if delta < 0:
        raise NegativeDuration(f"{a.name}{tuple(c.name for c in args)} has duration {delta}")
    s = _ground_snap(a.start, b, pool)
    e = _ground_snap(a.end, b, pool)
    _check_disjoint(s, a.name, args)
    _check_disjoint(e, a.name, args)
    return GroundAction(a.name, args, s, e, _ground_formula(a.inv, b, pool), delta)


def _check_disjoint(s: SnapAction, name: str, args: tuple[Const, ...]) -> None:
    both = set(s.effect_pos) & set(s.effect_neg)
    if both:
        atom = sorted(both, key=Atom.sort_key)[0]
        raise EffectOverlap(f"{name}{tuple(c.name for c in args)}: {atom} both added and deleted by {s.name}")


def ground_network(w: TemporalTaskNetwork, b: Mapping[Var, Term], pool: ObjectPool) -> TemporalTaskNetwork:
    sub = w.substitute(b)
    ct = tuple(
        DecompositionConstraint(
            replace(c.surface, formula=_ground_formula(c.surface.formula, {}, pool)),
            tuple(replace(o, formula=_ground_formula(o.formula, {}, pool)) for o in c.obligations),
        )
        for c in sub.ct
    )
    return replace(sub, ct=ct)


def ground_method(m: Method, b: Mapping[Var, Const], pool: ObjectPool) -> GroundMethod:
    args = tuple(b[v] for v, _ in m.params)
    return GroundMethod(m.name, args, m.task.substitute(b), ground_network(m.tn, b, pool))


def static_predicates(domain: Domain) -> set[str]:
    changed: set[str] = set()
    for a in domain.actions:
        snaps = [a.snap] if isinstance(a, InstantAction) else [a.start, a.end]
        for s in snaps:
            changed.update(x.predicate for x in s.effect_pos + s.effect_neg)
    return {name for name, _ in domain.predicates} - changed


def _static_false(phi: Formula, static: set[str], init: frozenset) -> bool:
    known = {a: a in init for a in atoms(phi) if a.predicate in static}
    return simplify(phi, known) == FALSE


def ground_problem(domain: Domain, problem: Problem, prune: bool = True) -> GroundModel:
    """Instantiate every schema; optionally drop instances that can never apply.

    Pruning removes actions whose start or end conditions on static predicates are false in
    the initial state, then methods whose subtasks can no longer be refined,
    until nothing changes.
    """
    pool = object_pool(domain, problem)
    init = problem.initial_state()
    diagnostics: list[Diagnostic] = []
    stats: dict[str, dict[str, int]] = {}
    static = static_predicates(domain) if prune else set()

    def note_empty(kind: str, name: str, params: Sequence[Param]) -> None:
        for v, t in params:
            if not pool.of_type(t):
                diagnostics.append(
                    Diagnostic("warning", "empty-domain", f"{kind} {name}: no objects of type {t!r} for {v}")
                )

    actions: list[GroundAction] = []
    for a in domain.actions:
        note_empty("action", a.name, a.params)
        count = kept = 0
        for b in enumerate_bindings(a.params, pool):
            g = ground_action(a, b, pool)
            count += 1
            if prune and _action_pruned(g, static, init):
                continue
            kept += 1
            actions.append(g)
        stats[f"action:{a.name}"] = {"instances": count, "kept": kept}

    methods: list[GroundMethod] = []
    for m in domain.methods:
        note_empty("method", m.name, m.params)
        count = kept = 0
        for b in enumerate_bindings(m.params, pool, m.tn.cv):
            g = ground_method(m, b, pool)
            count += 1
            if prune and _method_static_false(g, static, init):
                continue
            methods.append(g)
        stats[f"method:{m.name}"] = {"instances": count, "kept": 0}

    networks: list[TemporalTaskNetwork] = []
    for b in enumerate_bindings(problem.htn_params, pool, problem.htn.cv):
        networks.append(ground_network(problem.htn, b, pool))

    if prune:
        methods = _prune_methods(domain, actions, methods)
    kept_per: Counter[str] = Counter(m.name for m in methods)
    for m in domain.methods:
        stats[f"method:{m.name}"]["kept"] = kept_per[m.name]
    stats["total"] = {
        "actions": len(actions),
        "methods": len(methods),
        "initial_networks": len(networks),
    }
    return GroundModel(pool, init, tuple(actions), tuple(methods), tuple(networks), problem.goal, stats, diagnostics)


def _action_pruned(g: GroundAction, static: set[str], init: frozenset) -> bool:
    if _static_false(g.start.precond, static, init):
        return True
    # a false invariant is not enough: it is only sampled at happenings inside the interval
    return g.end is not None and _static_false(g.end.precond, static, init)


def _method_static_false(g: GroundMethod, static: set[str], init: frozenset) -> bool:
    if not g.tn.ids:
        return False
    for c in g.tn.ct:
        for o in c.obligations:
            if o.mode == "before" and _static_false(o.formula, static, init):
                return True
    return False


def _prune_methods(domain: Domain, actions: list[GroundAction], methods: list[GroundMethod]) -> list[GroundMethod]:
    live_primitive = {a.task for a in actions}
    live = list(methods)
    while True:
        refinable = {m.task for m in live}

        def ok(t: Task) -> bool:
            if domain.is_primitive(t.name):
                return t in live_primitive
            return t in refinable

        nxt = [m for m in live if all(ok(m.tn.alpha[i]) for i in m.tn.ids)]
        if len(nxt) == len(live):
            return nxt
        live = nxt
