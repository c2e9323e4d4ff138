"""Execution of timed primitive plans and checking of network constraints.

A plan is a multiset of (task, date, duration) entries. Its happenings are the
distinct start and end dates. At each happening the snap actions scheduled
there must be pairwise non-interfering, their preconditions and the active
invariants must hold in the state before the happening, and the next state is
``(s - deletes) | adds``. Invariants are sampled at the happenings strictly
inside their action's interval, never in between.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

from hddl21.grounding import GroundAction
from hddl21.logic import Atom, Formula, ObjectPool, atoms, holds
from hddl21.model import (
    DurationConstraint,
    Obligation,
    OrderingConstraint,
    SnapAction,
    Task,
    TimePoint,
    compare,
    eval_duration,
)

_EMPTY_POOL = ObjectPool()


class UnmappedTimePoint(LookupError):
    pass


class UnmappedDuration(LookupError):
    pass


class ExecutionError(Exception):
    """A failed execution or constraint check, pinned to a date.

    ``kind`` is one of PreconditionFailure, InvariantViolation, Interference,
    NonPrimitiveTask, OrderingViolation, DurationViolation, ConstraintViolation,
    AnchorOutOfScope, GoalNotReached, or a decomposition/binding failure kind
    raised by the validator.
    """

    def __init__(
        self,
        kind: str,
        message: str,
        date: int | None = None,
        items: Sequence[str] = (),
        formula: str | None = None,
        timeline: Timeline | None = None,
    ) -> None:
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.date = date
        self.items = tuple(items)
        self.formula = formula
        self.timeline = timeline

    def to_json(self) -> dict:
        return {"kind": self.kind, "date": self.date, "items": list(self.items), "message": self.message}

    def __repr__(self) -> str:
        return f"ExecutionError({self.kind!r}, {self.message!r}, date={self.date})"


@dataclass(frozen=True)
class PlanEntry:
    task: Task
    date: int
    duration: int
    action: GroundAction | None = None
    id: str | None = None

    @property
    def end_date(self) -> int:
        return self.date + self.duration

    def label(self) -> str:
        return f"{self.id}:{self.task}" if self.id is not None else str(self.task)


@dataclass(frozen=True)
class TemporalPlan:
    entries: tuple[PlanEntry, ...] = ()

    def __post_init__(self) -> None:
        for e in self.entries:
            if not isinstance(e.date, int) or not isinstance(e.duration, int) or e.date < 0 or e.duration < 0:
                raise ValueError(f"dates and durations must be non-negative integers: {e}")

    def makespan(self) -> int:
        return max((e.end_date for e in self.entries), default=0)


@dataclass(frozen=True)
class Snap:
    """One snap action scheduled at a happening."""

    entry: int
    which: str  # "start" | "end" | "instant"
    action: SnapAction

    def label(self, plan: TemporalPlan) -> str:
        return f"{self.which}{plan.entries[self.entry].task}" if self.which != "instant" else str(plan.entries[self.entry].task)


@dataclass(frozen=True)
class TimelineStep:
    date: int
    before: frozenset
    after: frozenset
    snaps: tuple[Snap, ...]
    active: tuple[int, ...]


@dataclass(frozen=True)
class Timeline:
    initial: frozenset
    steps: tuple[TimelineStep, ...] = ()
    plan: TemporalPlan = field(default_factory=TemporalPlan)

    @property
    def final(self) -> frozenset:
        return self.steps[-1].after if self.steps else self.initial

    @property
    def dates(self) -> list[int]:
        return [s.date for s in self.steps]

    def __len__(self) -> int:
        return len(self.steps)

    def step_at(self, date: int) -> TimelineStep | None:
        for s in self.steps:
            if s.date == date:
                return s
        return None

    def pairs(self) -> list[tuple[frozenset, int]]:
        """(state, date) pairs: each happening's pre-state and date."""
        return [(s.before, s.date) for s in self.steps]


def happening_events(plan: TemporalPlan) -> list[int]:
    dates = {e.date for e in plan.entries} | {e.end_date for e in plan.entries}
    return sorted(dates)


def _pre_atoms(s: SnapAction) -> set[Atom]:
    return set(atoms(s.precond))


def interferes(a: SnapAction, b: SnapAction) -> bool:
    """True unless the three non-interference conditions all hold.

    A precondition "mentions" an atom when the atom occurs in it with either polarity.
    """
    eff_a = set(a.effect_pos) | set(a.effect_neg)
    eff_b = set(b.effect_pos) | set(b.effect_neg)
    if _pre_atoms(a) & eff_b:
        return True
    if _pre_atoms(b) & eff_a:
        return True
    if set(a.effect_pos) & set(b.effect_neg):
        return True
    if set(b.effect_pos) & set(a.effect_neg):
        return True
    return False


def snaps_at(plan: TemporalPlan, date: int) -> list[Snap]:
    out: list[Snap] = []
    for k, e in enumerate(plan.entries):
        act = e.action
        if act is None:
            continue
        if act.end is None:
            if e.date == date:
                out.append(Snap(k, "instant", act.start))
            continue
        if e.date == date:
            out.append(Snap(k, "start", act.start))
        if e.end_date == date:
            out.append(Snap(k, "end", act.end))
    return out


def _holds(state: frozenset, phi: Formula, pool: ObjectPool | None) -> bool:
    return holds(state, phi, pool or _EMPTY_POOL)


def simulate(plan: TemporalPlan, s0: frozenset, pool: ObjectPool | None = None) -> Timeline:
    """Execute ``plan`` from ``s0``; raise :class:`ExecutionError` on the first failure.

    Per happening the checks run in order: interference, preconditions,
    invariants; the first failing check wins.
    """
    for e in plan.entries:
        if e.action is None:
            raise ExecutionError("NonPrimitiveTask", f"{e.task} is not primitive", e.date, (e.label(),))
    state = frozenset(s0)
    steps: list[TimelineStep] = []

    def fail(kind: str, msg: str, date: int, items: Sequence[str], phi: Formula | None = None) -> ExecutionError:
        tl = Timeline(frozenset(s0), tuple(steps), plan)
        return ExecutionError(kind, msg, date, items, None if phi is None else str(phi), tl)

    for date in happening_events(plan):
        snaps = snaps_at(plan, date)
        for x, y in combinations(snaps, 2):
            if interferes(x.action, y.action):
                a, b = x.label(plan), y.label(plan)
                raise fail("Interference", f"{a} and {b} interfere at {date}", date, (a, b))
        for sn in snaps:
            if not _holds(state, sn.action.precond, pool):
                lab = sn.label(plan)
                raise fail("PreconditionFailure", f"precondition of {lab} is false at {date}", date, (lab,), sn.action.precond)
        active = tuple(
            k for k, e in enumerate(plan.entries) if e.action is not None and e.action.end is not None and e.date < date < e.end_date
        )
        for k in active:
            e = plan.entries[k]
            if not _holds(state, e.action.inv, pool):  # type: ignore[union-attr]
                raise fail("InvariantViolation", f"invariant of {e.label()} is false at {date}", date, (e.label(),), e.action.inv)  # type: ignore[union-attr]
        dels: set[Atom] = set()
        adds: set[Atom] = set()
        for sn in snaps:
            dels.update(sn.action.effect_neg)
            adds.update(sn.action.effect_pos)
        nxt = (state - dels) | adds
        steps.append(TimelineStep(date, state, nxt, tuple(snaps), active))
        state = nxt
    return Timeline(frozenset(s0), tuple(steps), plan)


def _date(p: TimePoint, point_dates: Mapping[TimePoint, int | None]) -> int | None:
    if p not in point_dates:
        raise UnmappedTimePoint(str(p))
    return point_dates[p]


def check_ordering(co: Sequence[OrderingConstraint], point_dates: Mapping[TimePoint, int | None]) -> None:
    """Raise OrderingViolation for the first unsatisfied constraint.

    Points mapped to ``None`` (tasks refined into empty networks) are never
    scheduled; constraints on them are vacuous.
    """
    for c in co:
        a = _date(c.left, point_dates)
        b = _date(c.right, point_dates)
        if a is None or b is None:
            continue
        if not compare(a, c.rel, b):
            raise ExecutionError(
                "OrderingViolation", f"{c} violated ({a} {c.rel} {b} is false)", min(a, b), (str(c.left), str(c.right))
            )


def check_durations(cd: Sequence[DurationConstraint], durations: Mapping[str, int | None]) -> None:
    for c in cd:
        ids = c.ids()
        for i in ids:
            if i not in durations:
                raise UnmappedDuration(i)
        if any(durations[i] is None for i in ids):
            continue
        left = eval_duration(c.left, durations)  # type: ignore[arg-type]
        right = eval_duration(c.right, durations)  # type: ignore[arg-type]
        if not compare(left, c.rel, right):
            raise ExecutionError(
                "DurationViolation", f"{c} violated ({left} {c.rel} {right} is false)", None, tuple(sorted(ids))
            )


def resolve_anchor(anchor, point_dates: Mapping[TimePoint, int | None]) -> int | None:
    dates = [d for d in (_date(p, point_dates) for p in anchor.points) if d is not None]
    if not dates:
        return None
    return min(dates) if anchor.pick == "min" else max(dates)


def obligation_states(
    timeline: Timeline, ob: Obligation, point_dates: Mapping[TimePoint, int | None]
) -> list[tuple[int, frozenset]] | None:
    """(date, state) pairs an obligation is checked against; None when its anchors are unscheduled."""
    lo = resolve_anchor(ob.lo, point_dates)
    if lo is None:
        return None
    if ob.mode in ("at", "before"):
        if not timeline.steps:
            # nothing happens: the initial state is the only state there is
            return [(lo, timeline.initial)]
        step = timeline.step_at(lo)
        if step is None:
            raise ExecutionError("AnchorOutOfScope", f"{ob.lo} = {lo} is not a happening of the plan", lo, (str(ob.lo),))
        return [(lo, step.after if ob.mode == "at" else step.before)]
    hi = resolve_anchor(ob.hi, point_dates) if ob.hi is not None else None
    if hi is None:
        return None
    if ob.mode == "span":
        return [(s.date, s.after) for s in timeline.steps if lo <= s.date <= hi]
    if ob.mode == "interior":
        return [(s.date, s.after) for s in timeline.steps if lo < s.date < hi]
    raise ValueError(f"unknown obligation mode {ob.mode!r}")


def check_temporal_constraints(
    timeline: Timeline,
    obligations: Sequence[Obligation],
    point_dates: Mapping[TimePoint, int | None],
    pool: ObjectPool | None = None,
) -> None:
    for ob in obligations:
        pairs = obligation_states(timeline, ob, point_dates)
        if pairs is None:
            continue
        for date, state in pairs:
            if not _holds(state, ob.formula, pool):
                raise ExecutionError(
                    "ConstraintViolation",
                    f"{ob.formula} does not hold at {date} as required by {ob}",
                    date,
                    tuple(str(p) for p in ob.lo.points),
                    str(ob.formula),
                )


def goal_check(timeline: Timeline, goal: Formula | None, pool: ObjectPool | None = None) -> None:
    if goal is None:
        return
    if not _holds(timeline.final, goal, pool):
        last = timeline.steps[-1].date if timeline.steps else 0
        raise ExecutionError("GoalNotReached", f"goal {goal} is false in the final state", last, (), str(goal))
