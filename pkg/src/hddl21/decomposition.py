"""Method application on temporal task networks and replay of decomposition traces.

A decomposed identifier leaves the network's task set but stays behind as an
auxiliary record: its start and end points remain usable by every constraint
that names them, and after scheduling they are the earliest start and latest
end of its children.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterator, Mapping, Sequence

from hddl21.grounding import GroundAction, GroundMethod
from hddl21.model import (
    ROOT,
    SELF,
    AuxRecord,
    OrderingConstraint,
    Task,
    TemporalTaskNetwork,
    TimePoint,
    end,
    start,
)
from hddl21.planfile import PlanDocument
from hddl21.semantics import ExecutionError, PlanEntry, TemporalPlan

ROOT_TASK = Task("@root")


class DecompositionError(ExecutionError):
    """A failed decomposition step; ``step`` is its 0-based index in the trace, if known."""

    def __init__(self, kind: str, message: str, items: Sequence[str] = (), step: int | None = None) -> None:
        super().__init__(kind, message, None, items)
        self.step = step

    def at_step(self, k: int) -> DecompositionError:
        return DecompositionError(self.kind, f"step {k}: {self.message}", self.items, k)


@dataclass(frozen=True)
class DecompositionStep:
    target: str
    method: GroundMethod
    renaming: Mapping[str, str] | None = None


def fresh_renaming(w: TemporalTaskNetwork, target: str, method: GroundMethod) -> dict[str, str]:
    taken = w.all_ids() | {SELF, ROOT}
    out: dict[str, str] = {}
    k = 0
    for j in method.tn.ids:
        while f"{target}.{k}" in taken:
            k += 1
        out[j] = f"{target}.{k}"
        taken.add(out[j])
        k += 1
    return out


def decompose(w1: TemporalTaskNetwork, step: DecompositionStep) -> TemporalTaskNetwork:
    i = step.target
    m = step.method
    if i not in w1.ids:
        if i in w1.aux_ids():
            raise DecompositionError("AlreadyDecomposed", f"task id {i!r} was already decomposed", (i,))
        raise DecompositionError("UnknownTarget", f"no task id {i!r} in the network", (i,))
    if w1.alpha[i] != m.task:
        raise DecompositionError(
            "TaskMismatch", f"method {m.name} refines {m.task}, but {i} is {w1.alpha[i]}", (i, m.name)
        )
    renaming = dict(step.renaming) if step.renaming is not None else fresh_renaming(w1, i, m)
    if set(renaming) != set(m.tn.ids):
        raise DecompositionError("IdentifierCollision", f"renaming for {m.name} must cover exactly its subtask ids", (i,))
    taken = w1.all_ids() | {SELF, ROOT}
    new_ids = [renaming[j] for j in m.tn.ids]
    clash = [x for x in new_ids if x in taken]
    if clash or len(set(new_ids)) != len(new_ids):
        bad = clash[0] if clash else new_ids[0]
        raise DecompositionError("IdentifierCollision", f"task id {bad!r} is not fresh", (bad,))
    sub = m.tn.rename({**renaming, SELF: i})
    ids: list[str] = []
    for x in w1.ids:
        if x == i:
            ids.extend(sub.ids)
        else:
            ids.append(x)
    alpha = {x: t for x, t in w1.alpha.items() if x != i}
    alpha.update(sub.alpha)
    containment: list[OrderingConstraint] = []
    for j in sub.ids:
        containment.append(OrderingConstraint(start(i), "<=", start(j)))
        containment.append(OrderingConstraint(end(j), "<=", end(i)))
    return TemporalTaskNetwork(
        ids=tuple(ids),
        alpha=alpha,
        co=w1.co + sub.co + tuple(containment),
        cv=w1.cv + sub.cv,
        cd=w1.cd + sub.cd,
        ct=w1.ct + sub.ct,
        aux=w1.aux + sub.aux + (AuxRecord(i, w1.alpha[i], sub.ids),),
    )


def rooted(w0: TemporalTaskNetwork) -> TemporalTaskNetwork:
    """Give the initial network an explicit root record so its own start/end points resolve."""
    w = w0.rename({SELF: ROOT})
    return TemporalTaskNetwork(w.ids, w.alpha, w.co, w.cv, w.cd, w.ct, w.aux + (AuxRecord(ROOT, ROOT_TASK, w.ids),))


def replay_trace(
    w0: TemporalTaskNetwork,
    trace: Sequence[DecompositionStep],
    is_primitive: Callable[[Task], bool] | None = None,
) -> TemporalTaskNetwork:
    """Fold :func:`decompose` over ``trace``.

    When ``is_primitive`` is given the result must contain primitive tasks only.
    """
    w = w0
    for k, step in enumerate(trace):
        try:
            w = decompose(w, step)
        except DecompositionError as err:
            raise err.at_step(k) from None
    if is_primitive is not None:
        left = [i for i in w.ids if not is_primitive(w.alpha[i])]
        if left:
            raise DecompositionError(
                "NonPrimitiveResidue", f"compound task {w.alpha[left[0]]} ({left[0]}) was never decomposed", tuple(left)
            )
    return w


def depth(w: TemporalTaskNetwork) -> int:
    """Number of decomposition levels below the initial network."""
    children = {r.id: r.children for r in w.aux}
    memo: dict[str, int] = {}

    def d(i: str) -> int:
        if i not in children:
            return 0
        if i not in memo:
            memo[i] = 1 + max((d(c) for c in children[i]), default=0)
        return memo[i]

    roots = set(children) - {c for cs in children.values() for c in cs}
    best = max((d(r) for r in roots), default=0)
    return best - 1 if ROOT in children else best


def aux_dates(w: TemporalTaskNetwork, leaf_dates: Mapping[TimePoint, int]) -> dict[TimePoint, int | None]:
    """Dates for auxiliary points: min of children's starts, max of children's ends.

    A task refined into an empty network gets ``None`` for both points unless
    ``leaf_dates`` pins it (see :func:`placements`).
    """
    children = {r.id: r.children for r in w.aux}
    out: dict[TimePoint, int | None] = {}

    def resolve(p: TimePoint) -> int | None:
        if p in leaf_dates:
            return leaf_dates[p]
        if p in out:
            return out[p]
        kids = [resolve(TimePoint(p.kind, c)) for c in children[p.id]]
        kids_set = [x for x in kids if x is not None]
        val = None if not kids_set else (min(kids_set) if p.kind == "start" else max(kids_set))
        out[p] = val
        return val

    for i in children:
        resolve(start(i))
        resolve(end(i))
    return out


def bind_plan_to_network(
    w: TemporalTaskNetwork,
    doc: PlanDocument,
    actions: Callable[[Task], GroundAction | None] | None = None,
) -> tuple[TemporalPlan, dict[TimePoint, int | None], dict[str, int | None]]:
    """Turn a primitive network plus timed plan lines into a plan and point dates."""
    by_id = doc.action_by_id()
    entries: list[PlanEntry] = []
    leaf: dict[TimePoint, int] = {}
    for i in w.ids:
        if i not in by_id:
            raise DecompositionError("MissingTimedEntry", f"task id {i!r} ({w.alpha[i]}) has no timed action line", (i,))
        a = by_id[i]
        if a.task != w.alpha[i]:
            raise DecompositionError(
                "TaskNameMismatch", f"line for {i} runs {a.task} but the network has {w.alpha[i]}", (i,)
            )
        ga = actions(a.task) if actions is not None else None
        entries.append(PlanEntry(a.task, a.date, a.duration, ga, i))
        leaf[start(i)] = a.date
        leaf[end(i)] = a.date + a.duration
    extra = [a.id for a in doc.actions if a.id not in set(w.ids)]
    if extra:
        raise DecompositionError("UnusedAction", f"action line {extra[0]!r} is not part of the decomposition", (extra[0],))
    point_dates: dict[TimePoint, int | None] = dict(leaf)
    point_dates.update(aux_dates(w, leaf))
    return TemporalPlan(tuple(entries)), point_dates, point_durations(point_dates)


def point_durations(point_dates: Mapping[TimePoint, int | None]) -> dict[str, int | None]:
    """end - start per id; None when either point is undated."""
    out: dict[str, int | None] = {}
    for p, v in point_dates.items():
        if p.kind == "start":
            e = point_dates.get(end(p.id))
            out[p.id] = None if v is None or e is None else e - v
    return out


def empty_leaves(w: TemporalTaskNetwork) -> list[str]:
    """Decomposed ids whose method had no subtasks."""
    return [r.id for r in w.aux if not r.children]


def placements(
    w: TemporalTaskNetwork, point_dates: Mapping[TimePoint, int | None], dates: Sequence[int]
) -> Iterator[dict[TimePoint, int | None]]:
    """Every way of pinning the empty refinements of ``w`` to one of ``dates``.

    A task refined into no subtasks has no date of its own. It is placed at a
    single date (start = end) and the auxiliary points above it are recomputed.
    Without such tasks the only candidate is ``point_dates`` itself.
    """
    empties = empty_leaves(w)
    if not empties:
        yield dict(point_dates)
        return
    live = set(w.ids)
    leaf = {p: v for p, v in point_dates.items() if p.id in live and v is not None}
    for combo in product(dates or [0], repeat=len(empties)):
        pinned: dict[TimePoint, int] = dict(leaf)
        for i, d in zip(empties, combo):
            pinned[start(i)] = d
            pinned[end(i)] = d
        out: dict[TimePoint, int | None] = dict(pinned)
        out.update(aux_dates(w, pinned))
        yield out
