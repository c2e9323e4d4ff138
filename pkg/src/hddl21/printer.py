"""Render model values back to HDDL 2.1 text that the parser accepts."""
from __future__ import annotations

from typing import Iterable

from hddl21.logic import TRUE, And, Atom, Eq, Exists, Forall, Formula, Implies, Not, Or
from hddl21.model import (
    SELF,
    AfterCond,
    AtCond,
    BeforeCond,
    BetweenCond,
    Domain,
    DurationConstraint,
    DurBin,
    DurExpr,
    DurLit,
    DurOf,
    DurativeAction,
    InstantAction,
    Method,
    MethodCond,
    OrderingConstraint,
    Param,
    Problem,
    SnapAction,
    TemporalTaskNetwork,
    TimePoint,
    end,
    start,
)


def formula(phi: Formula) -> str:
    if isinstance(phi, Atom):
        return str(phi)
    if isinstance(phi, Eq):
        return f"(= {phi.left} {phi.right})"
    if isinstance(phi, Not):
        return f"(not {formula(phi.body)})"
    if isinstance(phi, And):
        return "(and" + "".join(" " + formula(p) for p in phi.parts) + ")"
    if isinstance(phi, Or):
        return "(or" + "".join(" " + formula(p) for p in phi.parts) + ")"
    if isinstance(phi, Implies):
        return f"(imply {formula(phi.antecedent)} {formula(phi.consequent)})"
    if isinstance(phi, (Forall, Exists)):
        word = "forall" if isinstance(phi, Forall) else "exists"
        return f"({word} ({phi.var} - {phi.type}) {formula(phi.body)})"
    raise TypeError(f"not a formula: {phi!r}")


def typed(pairs: Iterable[tuple[object, str]]) -> str:
    return " ".join(f"{n} - {t}" for n, t in pairs)


def params(ps: Iterable[Param]) -> str:
    return "(" + typed(ps) + ")"


def point(p: TimePoint) -> str:
    return f"({p.kind} {p.id})"


def dur_expr(e: DurExpr) -> str:
    if isinstance(e, DurLit):
        return str(e.value)
    if isinstance(e, DurOf):
        return "(duration)" if e.id == SELF else f"(duration {e.id})"
    if isinstance(e, DurBin):
        return f"({e.op} {dur_expr(e.left)} {dur_expr(e.right)})"
    raise TypeError(e)


def _ids(xs: tuple[str, ...]) -> str:
    return "(" + " ".join(xs) + ")"


def _and(parts: list[str], indent: str) -> str:
    if not parts:
        return "()"
    if len(parts) == 1:
        return parts[0]
    sep = "\n" + indent + "     "
    return "(and " + sep.join(parts) + ")"


def _effects(pos: tuple[Atom, ...], neg: tuple[Atom, ...], wrap: str = "") -> list[str]:
    out = [str(a) for a in pos] + [f"(not {a})" for a in neg]
    if wrap:
        out = [f"({wrap} {x})" for x in out]
    return out


def network(w: TemporalTaskNetwork, indent: str = "    ") -> list[str]:
    """Keyword lines for a network's subtasks and constraints (method preconditions excluded)."""
    lines: list[str] = []
    subtasks = [f"({i} {w.alpha[i]})" for i in w.ids]
    co = list(w.co)
    key = ":subtasks"
    if w.ordered:
        chain = [OrderingConstraint(end(a), "<=", start(b)) for a, b in zip(w.ids, w.ids[1:])]
        if co[: len(chain)] == chain:
            key = ":ordered-subtasks"
            co = co[len(chain):]
    lines.append(f"{indent}{key} {_and(subtasks, indent)}")
    if co:
        lines.append(f"{indent}:ordering {_and([f'({c.rel} {point(c.left)} {point(c.right)})' for c in co], indent)}")
    constraints: list[str] = [
        f"(= {v.left} {v.right})" if v.rel == "=" else f"(not (= {v.left} {v.right}))" for v in w.cv
    ]
    for c in w.ct:
        s = c.surface
        if isinstance(s, MethodCond):
            continue
        if isinstance(s, AtCond):
            where = s.point.kind if s.point.id == SELF else point(s.point)
            constraints.append(f"(at {where} {formula(s.formula)})")
        elif isinstance(s, BeforeCond):
            constraints.append(f"(before {_ids(s.ids)} {formula(s.formula)})")
        elif isinstance(s, AfterCond):
            constraints.append(f"(after {_ids(s.ids)} {formula(s.formula)})")
        elif isinstance(s, BetweenCond):
            constraints.append(f"(between {_ids(s.first)} {_ids(s.second)} {formula(s.formula)})")
    if constraints:
        lines.append(f"{indent}:constraints {_and(constraints, indent)}")
    if w.cd:
        lines.append(f"{indent}:duration-constraints {_and([_dc(c) for c in w.cd], indent)}")
    return lines


def _dc(c: DurationConstraint) -> str:
    return f"({c.rel} {dur_expr(c.left)} {dur_expr(c.right)})"


def _method_pre(w: TemporalTaskNetwork) -> str | None:
    parts: list[str] = []
    for c in w.ct:
        s = c.surface
        if not isinstance(s, MethodCond):
            continue
        if s.when == "at-start":
            parts.append(f"(at start {formula(s.formula)})")
        elif s.when == "at-end":
            parts.append(f"(at end {formula(s.formula)})")
        else:
            parts.append(f"(over all {formula(s.formula)})")
    if not parts:
        return None
    return _and(parts, "    ")


def method(m: Method) -> str:
    lines = [f"  (:method {m.name}", f"    :parameters {params(m.params)}", f"    :task {m.task}"]
    pre = _method_pre(m.tn)
    if pre is not None:
        lines.append(f"    :precondition {pre}")
    lines.extend(network(m.tn))
    return "\n".join(lines) + ")"


def action(a: InstantAction | DurativeAction) -> str:
    if isinstance(a, InstantAction):
        s: SnapAction = a.snap
        lines = [f"  (:action {a.name}", f"    :parameters {params(a.params)}"]
        if s.precond != TRUE:
            lines.append(f"    :precondition {formula(s.precond)}")
        effs = _effects(s.effect_pos, s.effect_neg)
        lines.append(f"    :effect {_and(effs, '    ')}")
        return "\n".join(lines) + ")"
    lines = [
        f"  (:durative-action {a.name}",
        f"    :parameters {params(a.params)}",
        f"    :duration (= ?duration {dur_expr(a.duration)})",
    ]
    conds = []
    if a.start.precond != TRUE:
        conds.append(f"(at start {formula(a.start.precond)})")
    if a.inv != TRUE:
        conds.append(f"(over all {formula(a.inv)})")
    if a.end.precond != TRUE:
        conds.append(f"(at end {formula(a.end.precond)})")
    if conds:
        lines.append(f"    :condition {_and(conds, '    ')}")
    effs = _effects(a.start.effect_pos, a.start.effect_neg, "at start") + _effects(
        a.end.effect_pos, a.end.effect_neg, "at end"
    )
    lines.append(f"    :effect {_and(effs, '    ')}")
    return "\n".join(lines) + ")"


def domain(d: Domain) -> str:
    out = [f"(define (domain {d.name})"]
    if d.requirements:
        out.append(f"  (:requirements {' '.join(d.requirements)})")
    if d.types:
        out.append(f"  (:types {typed(d.types)})")
    if d.constants:
        out.append(f"  (:constants {typed(d.constants)})")
    if d.predicates:
        out.append("  (:predicates")
        for name, ps in d.predicates:
            out.append(f"    ({name}{' ' + typed(ps) if ps else ''})")
        out[-1] += ")"
    for t in d.tasks:
        out.append(f"  (:task {t.name} :parameters {params(t.params)})")
    for m in d.methods:
        out.append(method(m))
    for a in d.actions:
        out.append(action(a))
    return "\n".join(out) + ")\n"


def problem(p: Problem) -> str:
    out = [f"(define (problem {p.name})", f"  (:domain {p.domain_name})"]
    if p.requirements:
        out.append(f"  (:requirements {' '.join(p.requirements)})")
    if p.objects:
        out.append(f"  (:objects {typed(p.objects)})")
    htn = ["  (:htn"]
    if p.htn_params:
        htn.append(f"    :parameters {params(p.htn_params)}")
    htn.extend(network(p.htn))
    out.append("\n".join(htn) + ")")
    out.append("  (:init" + "".join(f"\n    {a}" for a in p.init) + ")")
    if p.goal is not None:
        out.append(f"  (:goal {formula(p.goal)})")
    return "\n".join(out) + ")\n"


def pretty_print(value: object) -> str:
    """Text form of a domain, problem, plan document, method, action or formula."""
    from hddl21.planfile import PlanDocument, print_plan

    if isinstance(value, Domain):
        return domain(value)
    if isinstance(value, Problem):
        return problem(value)
    if isinstance(value, PlanDocument):
        return print_plan(value)
    if isinstance(value, Method):
        return method(value)
    if isinstance(value, (InstantAction, DurativeAction)):
        return action(value)
    if isinstance(value, TemporalTaskNetwork):
        return "\n".join(network(value))
    return formula(value)  # type: ignore[arg-type]
