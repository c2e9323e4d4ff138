"""Plan and problem mutations used to probe the validator.

Each operator takes a valid (domain, problem, plan) triple and returns a
perturbed (problem, plan) pair that a sound validator must reject. Operators
are deterministic; none of them searches for a perturbation that happens to
break validity.
"""
from __future__ import annotations

from dataclasses import replace
from typing import Callable

from hddl21.logic import And, Atom, Const, Formula, Not, substitute_all
from hddl21.model import Domain, DurativeAction, Problem, Task
from hddl21.planfile import PlanAction, PlanDecomposition, PlanDocument

Mutation = Callable[[Domain, Problem, PlanDocument], tuple[Problem, PlanDocument]]


class NotApplicable(ValueError):
    """The operator has nothing to perturb in this plan."""


def _with_actions(doc: PlanDocument, actions: list[PlanAction]) -> PlanDocument:
    return PlanDocument(tuple(actions), doc.roots, doc.decompositions, doc.comments)


def _with_lines(doc: PlanDocument, lines: list[PlanDecomposition]) -> PlanDocument:
    return PlanDocument(doc.actions, doc.roots, tuple(lines), doc.comments)


def _by_date(doc: PlanDocument) -> list[int]:
    return sorted(range(len(doc.actions)), key=lambda k: (doc.actions[k].date, k))


def shift_date(domain: Domain, problem: Problem, doc: PlanDocument) -> tuple[Problem, PlanDocument]:
    """Move the latest-starting action to date 0, or past the makespan if it already starts at 0."""
    if not doc.actions:
        raise NotApplicable("no actions")
    k = max(range(len(doc.actions)), key=lambda k: (doc.actions[k].date, k))
    a = doc.actions[k]
    new_date = 0 if a.date > 0 else doc.makespan() + 1
    actions = list(doc.actions)
    actions[k] = replace(a, date=new_date)
    return problem, _with_actions(doc, actions)


def swap_method(domain: Domain, problem: Problem, doc: PlanDocument) -> tuple[Problem, PlanDocument]:
    """Replace the method of the first trace line, preferring one that refines a different task."""
    if not doc.decompositions:
        raise NotApplicable("empty trace")
    line = doc.decompositions[0]
    others = [m for m in domain.methods if m.name != line.method]
    if not others:
        raise NotApplicable("the domain has a single method")
    foreign = [m for m in others if m.task.name != line.task_name]
    pick = (foreign or others)[0]
    lines = list(doc.decompositions)
    lines[0] = replace(line, method=pick.name)
    return problem, _with_lines(doc, lines)


def drop_action_line(domain: Domain, problem: Problem, doc: PlanDocument) -> tuple[Problem, PlanDocument]:
    """Remove the last action line; trace lines still refer to its id."""
    if not doc.actions:
        raise NotApplicable("no actions")
    return problem, _with_actions(doc, list(doc.actions[:-1]))


def inflate_duration(domain: Domain, problem: Problem, doc: PlanDocument) -> tuple[Problem, PlanDocument]:
    """Lengthen the earliest action by one time unit."""
    if not doc.actions:
        raise NotApplicable("no actions")
    k = _by_date(doc)[0]
    actions = list(doc.actions)
    actions[k] = replace(actions[k], duration=actions[k].duration + 1)
    return problem, _with_actions(doc, actions)


def reorder_trace(domain: Domain, problem: Problem, doc: PlanDocument) -> tuple[Problem, PlanDocument]:
    """Move the first line that refines a child of an earlier line in front of that parent line."""
    lines = list(doc.decompositions)
    for j, parent in enumerate(lines):
        kids = set(parent.children)
        for k in range(j + 1, len(lines)):
            if lines[k].id in kids:
                moved = lines.pop(k)
                lines.insert(j, moved)
                return problem, _with_lines(doc, lines)
    raise NotApplicable("the trace has no nested refinement")


def rename_argument(domain: Domain, problem: Problem, doc: PlanDocument) -> tuple[Problem, PlanDocument]:
    """Replace the first argument of the earliest action by another object of the same type."""
    by_type: dict[str, list[str]] = {}
    for name, typ in list(domain.constants) + list(problem.objects):
        by_type.setdefault(typ, []).append(name)
    type_of = dict(list(domain.constants) + list(problem.objects))
    for k in _by_date(doc):
        a = doc.actions[k]
        for pos, arg in enumerate(a.task.args):
            name = arg.name if isinstance(arg, Const) else str(arg)
            alternatives = [o for o in by_type.get(type_of.get(name, ""), []) if o != name]
            if not alternatives:
                continue
            args = list(a.task.args)
            args[pos] = Const(alternatives[0])
            actions = list(doc.actions)
            actions[k] = replace(a, task=Task(a.task.name, tuple(args)))
            return problem, _with_actions(doc, actions)
    raise NotApplicable("no argument has a same-typed alternative")


def delete_init_atom(domain: Domain, problem: Problem, doc: PlanDocument) -> tuple[Problem, PlanDocument]:
    """Drop an initial atom that the earliest action's start condition requires."""
    init = set(problem.init)
    for k in _by_date(doc):
        schema = domain.action(doc.actions[k].task.name)
        if schema is None:
            continue
        lifted = schema.start.precond if isinstance(schema, DurativeAction) else schema.snap.precond
        binding = dict(zip((v for v, _ in schema.params), doc.actions[k].task.args))
        needed = sorted((substitute_all(a, binding) for a in _positive_atoms(lifted)), key=str)
        hit = [a for a in needed if a in init]
        if hit:
            victim = hit[0]
            return replace(problem, init=tuple(a for a in problem.init if a != victim)), doc
    raise NotApplicable("no start condition reads an initial atom")


def negate_goal(domain: Domain, problem: Problem, doc: PlanDocument) -> tuple[Problem, PlanDocument]:
    goal: Formula = problem.goal if problem.goal is not None else And(())
    return replace(problem, goal=Not(goal)), doc


def _positive_atoms(phi: Formula) -> list[Atom]:
    """Atoms occurring under an even number of negations, outside quantifiers and disjunctions."""
    if isinstance(phi, Atom):
        return [phi]
    if isinstance(phi, And):
        return [a for part in phi.parts for a in _positive_atoms(part)]
    if isinstance(phi, Not) and isinstance(phi.body, Not):
        return _positive_atoms(phi.body.body)
    return []


MUTATIONS: dict[str, Mutation] = {
    "shift-date": shift_date,
    "swap-method": swap_method,
    "drop-action-line": drop_action_line,
    "inflate-duration": inflate_duration,
    "reorder-trace": reorder_trace,
    "rename-argument": rename_argument,
    "delete-init-atom": delete_init_atom,
    "negate-goal": negate_goal,
}
