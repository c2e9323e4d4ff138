"""End-to-end validation of a timed hierarchical plan.

The plan's hierarchy section is the decomposition witness. It is replayed in
file order on the initial network, the resulting primitive network is bound to
the timed action lines, and the schedule is executed and checked against every
constraint store and the goal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

from hddl21.decomposition import (
    DecompositionError,
    DecompositionStep,
    bind_plan_to_network,
    decompose,
    depth,
    placements,
    point_durations,
    rooted,
)
from hddl21.grounding import (
    GroundAction,
    GroundingError,
    GroundMethod,
    enumerate_bindings,
    ground_action,
    ground_method,
    ground_network,
)
from hddl21.logic import Const, Formula, ObjectPool, Term, Var
from hddl21.model import (
    Domain,
    Method,
    Problem,
    Task,
    TemporalTaskNetwork,
    TimePoint,
    has_errors,
    object_pool,
    validate_model,
)
from hddl21.planfile import PlanDecomposition, PlanDocument, PlanFormatError, parse_plan
from hddl21.semantics import (
    ExecutionError,
    Timeline,
    UnmappedDuration,
    UnmappedTimePoint,
    check_durations,
    check_ordering,
    check_temporal_constraints,
    goal_check,
    happening_events,
    obligation_states,
    simulate,
)

MAX_WITNESS_CANDIDATES = 64


@dataclass
class Verdict:
    valid: bool
    errors: list[ExecutionError]
    stats: dict[str, int]
    timeline: Timeline | None = None
    network: TemporalTaskNetwork | None = field(default=None, repr=False)
    point_dates: dict[TimePoint, int | None] = field(default_factory=dict, repr=False)
    pool: ObjectPool | None = field(default=None, repr=False)
    goal: Formula | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "errors": [e.to_json() for e in self.errors],
            "stats": dict(self.stats),
        }


def _verdict(errors: list[ExecutionError], **kw) -> Verdict:
    stats = kw.pop("stats", None) or {"happenings": 0, "makespan": 0, "depth": 0}
    return Verdict(not errors, errors, stats, **kw)


class _Grounder:
    """On-demand grounding of exactly the instances a plan mentions."""

    def __init__(self, domain: Domain, pool: ObjectPool) -> None:
        self.domain = domain
        self.pool = pool
        self._actions: dict[Task, GroundAction | None] = {}

    def action(self, task: Task) -> GroundAction | None:
        if task not in self._actions:
            self._actions[task] = self._ground(task)
        return self._actions[task]

    def _ground(self, task: Task) -> GroundAction | None:
        a = self.domain.action(task.name)
        if a is None or len(a.params) != len(task.args):
            return None
        b: dict[Var, Const] = {}
        for (v, t), c in zip(a.params, task.args):
            if not isinstance(c, Const) or c.name not in self.pool or not self.pool.is_subtype(self.pool.type_of(c.name), t):
                return None
            if v in b and b[v] != c:
                return None
            b[v] = c
        return ground_action(a, b, self.pool)


def _unify(pattern: Task, task: Task, b: dict[Var, Term]) -> bool:
    if pattern.name != task.name or len(pattern.args) != len(task.args):
        return False
    for p, c in zip(pattern.args, task.args):
        if isinstance(p, Var):
            if p in b and b[p] != c:
                return False
            b[p] = c
        elif p != c:
            return False
    return True


def _child_task(doc: PlanDocument, cid: str) -> Task | None:
    a = doc.action_by_id().get(cid)
    if a is not None:
        return a.task
    d = doc.decomposition_by_id().get(cid)
    if d is not None and d.task_args is not None:
        return Task(d.task_name, tuple(Const(x) for x in d.task_args))
    return None


def method_candidates(
    domain: Domain, pool: ObjectPool, line: PlanDecomposition, task: Task, doc: PlanDocument
) -> list[tuple[GroundMethod, dict[str, str]]]:
    """Ground instances of ``line.method`` that refine ``task`` into the line's children.

    Children are matched to the method's subtasks positionally. Method
    variables that occur in no task are enumerated over the objects.
    """
    lifted = [m for m in domain.methods if m.name == line.method]
    if not lifted:
        raise DecompositionError("UnknownMethod", f"no method named {line.method!r}", (line.id,))
    if line.task_name != task.name or (
        line.task_args is not None and tuple(Const(x) for x in line.task_args) != task.args
    ):
        raise DecompositionError("TaskMismatch", f"line says {line.id} is {line.task_name}, network has {task}", (line.id,))
    out: list[tuple[GroundMethod, dict[str, str]]] = []
    problems: list[DecompositionError] = []
    for m in lifted:
        b: dict[Var, Term] = {}
        if not _unify(m.task, task, b):
            problems.append(
                DecompositionError("TaskMismatch", f"method {m.name} refines {m.task.name}, not {task}", (line.id, m.name))
            )
            continue
        if len(m.tn.ids) != len(line.children):
            problems.append(
                DecompositionError(
                    "SubtaskMismatch",
                    f"method {m.name} has {len(m.tn.ids)} subtasks, line {line.id} lists {len(line.children)}",
                    (line.id,),
                )
            )
            continue
        ok = True
        for j, cid in zip(m.tn.ids, line.children):
            ct = _child_task(doc, cid)
            pattern = m.tn.alpha[j]
            if ct is None:
                ok = pattern.name == (doc.decomposition_by_id()[cid].task_name if cid in doc.decomposition_by_id() else None)
            else:
                ok = _unify(pattern, ct, b)
            if not ok:
                problems.append(
                    DecompositionError(
                        "SubtaskMismatch", f"child {cid} of {line.id} does not match subtask {pattern} of {m.name}", (line.id, cid)
                    )
                )
                break
        if not ok:
            continue
        for g in _complete(m, b, pool):
            out.append((g, dict(zip(m.tn.ids, line.children))))
            if len(out) >= MAX_WITNESS_CANDIDATES:
                return out
        if not out:
            problems.append(
                DecompositionError("SubtaskMismatch", f"no admissible binding of {m.name} for {line.id}", (line.id,))
            )
    if not out:
        raise problems[0]
    return out


def _complete(m: Method, b: dict[Var, Term], pool: ObjectPool) -> Iterator[GroundMethod]:
    for v, t in m.params:
        c = b.get(v)
        if c is None:
            continue
        if not isinstance(c, Const) or c.name not in pool or not pool.is_subtype(pool.type_of(c.name), t):
            return
    rest = [(v, t) for v, t in m.params if v not in b]
    for ext in enumerate_bindings(rest, pool):
        full = {**b, **ext}
        if all((full[c.left] == (full.get(c.right, c.right) if isinstance(c.right, Var) else c.right)) == (c.rel == "=") for c in m.tn.cv):
            yield ground_method(m, full, pool)  # type: ignore[arg-type]


def _initial_networks(problem: Problem, pool: ObjectPool) -> list[TemporalTaskNetwork]:
    return [ground_network(problem.htn, b, pool) for b in enumerate_bindings(problem.htn_params, pool, problem.htn.cv)]


def validate(domain: Domain, problem: Problem, doc: PlanDocument, audit: bool = False) -> Verdict:
    """Check ``doc`` against ``domain``/``problem``; never raises on invalid input."""
    diags = validate_model(domain, problem)
    if has_errors(diags):
        return _verdict([ExecutionError("ModelError", d.format()) for d in diags if d.severity == "error"])
    try:
        pool = object_pool(domain, problem)
        nets = _initial_networks(problem, pool)
    except Exception as exc:  # grounding failures surface as a verdict
        return _verdict([ExecutionError("GroundingError", str(exc))])
    if not nets:
        return _verdict([ExecutionError("GroundingError", "the initial network has no admissible parameter binding")])
    grounder = _Grounder(domain, pool)
    first: Verdict | None = None
    attempts = 0
    for w0 in nets:
        for v in _witnesses(domain, problem, doc, w0, pool, grounder, audit):
            attempts += 1
            if v.valid:
                return v
            if first is None:
                first = v
            if attempts >= MAX_WITNESS_CANDIDATES:
                return first
    assert first is not None
    return first


def _witnesses(
    domain: Domain,
    problem: Problem,
    doc: PlanDocument,
    w0: TemporalTaskNetwork,
    pool: ObjectPool,
    grounder: _Grounder,
    audit: bool,
) -> Iterator[Verdict]:
    if len(doc.roots) != len(w0.ids):
        yield _verdict(
            [ExecutionError("RootMismatch", f"plan lists {len(doc.roots)} root tasks, the initial network has {len(w0.ids)}")]
        )
        return
    w = rooted(w0.rename(dict(zip(w0.ids, doc.roots))))
    lines = doc.decompositions

    def rec(k: int, w: TemporalTaskNetwork) -> Iterator[Verdict]:
        if k == len(lines):
            yield _check_leaf(domain, problem, doc, w, pool, grounder, audit)
            return
        line = lines[k]
        try:
            if line.id not in w.ids:
                kind = "AlreadyDecomposed" if line.id in w.aux_ids() else "UnknownTarget"
                raise DecompositionError(kind, f"task id {line.id!r} is not in the network", (line.id,))
            cands = method_candidates(domain, pool, line, w.alpha[line.id], doc)
            steps = [DecompositionStep(line.id, g, ren) for g, ren in cands]
            nexts = [decompose(w, s) for s in steps]
        except DecompositionError as err:
            yield _verdict([err.at_step(k)])
            return
        except GroundingError as err:
            yield _verdict([ExecutionError("GroundingError", str(err))])
            return
        for nw in nexts:
            yield from rec(k + 1, nw)

    yield from rec(0, w)


def _check_leaf(
    domain: Domain,
    problem: Problem,
    doc: PlanDocument,
    w: TemporalTaskNetwork,
    pool: ObjectPool,
    grounder: _Grounder,
    audit: bool,
) -> Verdict:
    residue = [i for i in w.ids if not domain.is_primitive(w.alpha[i].name)]
    if residue:
        return _verdict(
            [DecompositionError("NonPrimitiveResidue", f"compound task {w.alpha[residue[0]]} ({residue[0]}) was never decomposed", tuple(residue))]
        )
    try:
        plan, point_dates, durations = bind_plan_to_network(w, doc, grounder.action)
    except DecompositionError as err:
        return _verdict([err])
    except GroundingError as err:
        return _verdict([ExecutionError("GroundingError", str(err))])
    stats = {"happenings": len(happening_events(plan)), "makespan": plan.makespan(), "depth": depth(w)}
    extra = dict(network=w, point_dates=point_dates, pool=pool, goal=problem.goal)
    errors: list[ExecutionError] = []
    for e in plan.entries:
        if e.action is None:
            errors.append(ExecutionError("NonPrimitiveTask", f"{e.task} is not a ground action", e.date, (e.id or "",)))
        elif e.duration != e.action.duration:
            errors.append(
                ExecutionError(
                    "DurationViolation",
                    f"{e.id} runs {e.task} for {e.duration}, its duration is {e.action.duration}",
                    e.date,
                    (e.id or "",),
                )
            )
        if errors and not audit:
            return _verdict(errors, stats=stats, **extra)
    if any(x.kind == "NonPrimitiveTask" for x in errors):
        return _verdict(errors, stats=stats, **extra)

    timeline: Timeline | None = None
    try:
        timeline = simulate(plan, problem.initial_state(), pool)
    except ExecutionError as err:
        errors.append(err)
        timeline = err.timeline
        if not audit:
            return _verdict(errors, stats=stats, timeline=timeline, **extra)
    sim_ok = not any(x.timeline is not None or x.kind in ("PreconditionFailure", "InvariantViolation", "Interference") for x in errors)
    obligations = [o for c in w.ct for o in c.obligations]
    point_dates = choose_placement(w, point_dates, happening_events(plan), timeline if sim_ok else None, obligations, pool)
    durations = point_durations(point_dates)
    extra["point_dates"] = point_dates

    def run(check, items: Sequence) -> bool:
        for c in items if audit else [list(items)]:
            try:
                check([c] if audit else c)
            except ExecutionError as err:
                errors.append(err)
                if not audit:
                    return False
            except (UnmappedTimePoint, UnmappedDuration) as exc:
                errors.append(ExecutionError(type(exc).__name__, f"constraint refers to unknown point or id {exc}"))
                if not audit:
                    return False
        return True

    if not run(lambda cs: check_ordering(cs, point_dates), w.co):
        return _verdict(errors, stats=stats, timeline=timeline, **extra)
    if not run(lambda cs: check_durations(cs, durations), w.cd):
        return _verdict(errors, stats=stats, timeline=timeline, **extra)
    if sim_ok and timeline is not None:
        if not run(lambda os: check_temporal_constraints(timeline, os, point_dates, pool), obligations):
            return _verdict(errors, stats=stats, timeline=timeline, **extra)
        try:
            goal_check(timeline, problem.goal, pool)
        except ExecutionError as err:
            errors.append(err)
    return _verdict(errors, stats=stats, timeline=timeline, **extra)


def choose_placement(
    w: TemporalTaskNetwork,
    point_dates: dict[TimePoint, int | None],
    happenings: Sequence[int],
    timeline: Timeline | None,
    obligations: Sequence,
    pool: ObjectPool | None,
) -> dict[TimePoint, int | None]:
    """Pick dates for tasks refined into no subtasks.

    The first placement that satisfies every ordering, duration and
    decomposition constraint wins. Failing that, the first placement that
    satisfies the ordering and duration stores is returned, so the reported
    error is about state rather than about the schedule.
    """
    structural: dict[TimePoint, int | None] | None = None
    first: dict[TimePoint, int | None] | None = None
    for pd in placements(w, point_dates, happenings):
        if first is None:
            first = pd
        try:
            check_ordering(w.co, pd)
            check_durations(w.cd, point_durations(pd))
        except (ExecutionError, UnmappedTimePoint, UnmappedDuration):
            continue
        if structural is None:
            structural = pd
        if timeline is None:
            return pd
        try:
            check_temporal_constraints(timeline, obligations, pd, pool)
        except (ExecutionError, UnmappedTimePoint):
            continue
        return pd
    return structural or first or point_dates


def validate_text(
    domain_text: str,
    problem_text: str,
    plan_text: str,
    audit: bool = False,
    files: tuple[str, str] = ("<domain>", "<problem>"),
) -> Verdict:
    """Parse all three inputs, then :func:`validate`; parse failures become verdict errors."""
    from hddl21.parser import HDDLSyntaxError, parse_domain, parse_problem

    try:
        d = parse_domain(domain_text, files[0])
        p = parse_problem(problem_text, files[1])
    except HDDLSyntaxError as err:
        return _verdict([ExecutionError("SyntaxError", str(err))])
    try:
        doc = parse_plan(plan_text)
    except PlanFormatError as err:
        return _verdict([ExecutionError(err.kind, str(err))])
    return validate(d, p, doc, audit)


def explain(v: Verdict) -> str:
    """One line per executed happening, then one closing line with the outcome."""
    lines: list[str] = []
    tl = v.timeline
    sim_err = next((e for e in v.errors if e.timeline is not None), None)
    if tl is not None:
        plan = tl.plan
        checks: dict[int, list[str]] = {}
        if v.network is not None and sim_err is None:
            for c in v.network.ct:
                for o in c.obligations:
                    try:
                        pairs = obligation_states(tl, o, v.point_dates) or []
                    except (ExecutionError, UnmappedTimePoint):
                        continue
                    for date, _ in pairs:
                        checks.setdefault(date, []).append(str(o.formula))
        for step in tl.steps:
            snaps = ", ".join(sn.label(plan) for sn in step.snaps) or "-"
            inv = ", ".join(str(plan.entries[k].task) for k in step.active) or "-"
            added = sorted(str(a) for a in step.after - step.before)
            deleted = sorted(str(a) for a in step.before - step.after)
            delta = " ".join([f"+{a}" for a in added] + [f"-{a}" for a in deleted]) or "no change"
            chk = f"; checks {', '.join(checks[step.date])}" if step.date in checks else ""
            lines.append(f"t={step.date}: apply {snaps}; invariants of {inv}; {delta}{chk}")
    if sim_err is not None:
        formula = f": {sim_err.formula}" if sim_err.formula else ""
        lines.append(f"t={sim_err.date}: FAILED {sim_err.kind} {sim_err.message}{formula}")
        return "\n".join(lines)
    if v.valid:
        if tl is None or not tl.steps:
            lines.append("vacuously valid: empty plan" + ("" if v.goal is None else f", goal {v.goal} holds initially"))
        elif v.goal is None:
            lines.append("goal: none; plan is valid")
        else:
            lines.append(f"goal: {v.goal} holds in the final state; plan is valid")
    else:
        for e in v.errors:
            lines.append(f"INVALID {e.kind}: {e.message}")
    return "\n".join(lines)
