"""Reference solver: depth-first decomposition search plus integer scheduling.

It is meant as an executable reading of the solution definition, not as a
fast planner. Method choice follows declaration order, the compound task to
refine is the one with the smallest id, and schedules are enumerated
chronologically, so every run is deterministic.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping

from hddl21.decomposition import (
    DecompositionStep,
    aux_dates,
    decompose,
    empty_leaves,
    placements,
    point_durations,
    rooted,
)
from hddl21.grounding import GroundAction, GroundMethod, GroundModel
from hddl21.logic import And, Atom, Formula, Not, ObjectPool
from hddl21.model import ROOT, OrderingConstraint, TemporalTaskNetwork, TimePoint, compare, end, start
from hddl21.planfile import PlanAction, PlanDecomposition, PlanDocument
from hddl21.pointalgebra import PointAlgebraGraph, pa_consistent
from hddl21.semantics import (
    ExecutionError,
    PlanEntry,
    UnmappedTimePoint,
    TemporalPlan,
    Timeline,
    check_durations,
    check_ordering,
    check_temporal_constraints,
    goal_check,
    happening_events,
    simulate,
)


# networks with at most this many primitive tasks are scheduled over every integer date
EXHAUSTIVE_UP_TO = 4


class Unschedulable(Exception):
    pass


@dataclass(frozen=True)
class PlannerConfig:
    max_depth: int = 8
    horizon: int | None = None
    optimize: bool = False
    node_limit: int = 500_000
    dates: str = "auto"  # "all" | "events" | "auto"


@dataclass
class PlanResult:
    doc: PlanDocument | None
    reason: str | None = None
    makespan: int | None = None
    stats: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.doc is not None


class _Budget(Exception):
    pass


@dataclass
class _Search:
    gm: GroundModel
    config: PlannerConfig
    nodes: int = 0
    traces: int = 0
    depth_hit: bool = False
    horizon_hit: bool = False
    best: tuple[int, PlanDocument] | None = None
    started: float = field(default_factory=time.perf_counter)

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.config.node_limit:
            raise _Budget()


def default_horizon(deltas: Mapping[str, int]) -> int:
    """Sum of durations, plus one slot per task so zero-duration actions can be separated."""
    return sum(deltas.values()) + len(deltas)


def _empty_aux(w: TemporalTaskNetwork) -> set[str]:
    children = {r.id: r.children for r in w.aux}
    empty: set[str] = set()
    changed = True
    while changed:
        changed = False
        for i, cs in children.items():
            if i not in empty and all(c in empty for c in cs):
                empty.add(i)
                changed = True
    return empty


def network_graph(w: TemporalTaskNetwork, deltas: Mapping[str, int] | None = None) -> PointAlgebraGraph:
    """Point-algebra view of a network's ordering store plus start/end of every task."""
    skip = _empty_aux(w)
    g = PointAlgebraGraph()
    for i in list(w.ids) + [r.id for r in w.aux if r.id not in skip]:
        d = None if deltas is None else deltas.get(i)
        g.constrain(start(i), "<" if d else "=" if d == 0 else "<=", end(i))
    for c in w.co:
        if c.left.id in skip or c.right.id in skip:
            continue
        g.constrain(c.left, c.rel, c.right)
    return g


def _check_bound(c: OrderingConstraint, exact: Mapping[TimePoint, int], lb: Mapping[TimePoint, int]) -> bool:
    a, b = exact.get(c.left), exact.get(c.right)
    if a is not None and b is not None:
        return compare(a, c.rel, b)
    if a is not None and c.right in lb:
        lo = lb[c.right]
        if c.rel == ">":
            return a > lo
        if c.rel in (">=", "="):
            return a >= lo
        return True
    if b is not None and c.left in lb:
        lo = lb[c.left]
        if c.rel == "<":
            return lo < b
        if c.rel in ("<=", "="):
            return lo <= b
        return True
    return True


def _aux_order(w: TemporalTaskNetwork) -> list[tuple[str, tuple[str, ...]]]:
    """Non-empty auxiliary records, children before parents."""
    children = {r.id: r.children for r in w.aux}
    skip = _empty_aux(w)
    out: list[tuple[str, tuple[str, ...]]] = []
    seen: set[str] = set()

    def visit(i: str) -> None:
        if i in seen or i not in children or i in skip:
            return
        seen.add(i)
        for c in children[i]:
            visit(c)
        out.append((i, tuple(c for c in children[i] if c not in skip)))

    for i in children:
        visit(i)
    return out


def _point_values(
    w: TemporalTaskNetwork,
    starts: Mapping[str, int],
    deltas: Mapping[str, int],
    t: int,
    order: list[tuple[str, tuple[str, ...]]] | None = None,
) -> tuple[dict[TimePoint, int], dict[TimePoint, int]]:
    """Exact dates of determined points and lower bounds for the rest."""
    exact: dict[TimePoint, int] = {}
    lb: dict[TimePoint, int] = {}
    for i in w.ids:
        if i in starts:
            exact[start(i)] = starts[i]
            exact[end(i)] = starts[i] + deltas[i]
        else:
            lb[start(i)] = t
            lb[end(i)] = t + deltas[i]
    for i, kids in order if order is not None else _aux_order(w):
        for kind, pick in (("start", min), ("end", max)):
            vals = []
            fixed = True
            for c in kids:
                p = TimePoint(kind, c)
                if p in exact:
                    vals.append(exact[p])
                else:
                    vals.append(lb[p])
                    fixed = False
            # unscheduled children start no earlier than t, which is at least every
            # scheduled start, so one scheduled child already fixes the minimum
            if fixed or (kind == "start" and any(TimePoint(kind, c) in exact for c in kids)):
                exact[TimePoint(kind, i)] = pick(vals)
            else:
                lb[TimePoint(kind, i)] = min(vals) if kind == "start" else max(vals)
    return exact, lb


def _literals(phi: Formula) -> Iterator[tuple[Atom, bool]]:
    """Literals that are top-level conjuncts of ``phi``."""
    if isinstance(phi, Atom):
        yield phi, True
    elif isinstance(phi, Not) and isinstance(phi.body, Atom):
        yield phi.body, False
    elif isinstance(phi, And):
        for part in phi.parts:
            yield from _literals(part)


def _stranded(tl: Timeline, t: int, pending: list[GroundAction]) -> bool:
    """True when a pending action needs a literal that can no longer hold at or after ``t``.

    The test is a relaxation: it looks at every state of the partial timeline
    from ``t`` on and at all effects of pending actions, ignoring their order.
    """
    later = [s for s in tl.steps if s.date >= t]
    states = [later[0].before] + [s.after for s in later] if later else [tl.final]
    adds: set[Atom] = set()
    dels: set[Atom] = set()
    for a in pending:
        for snap in (a.start, a.end):
            if snap is not None:
                adds.update(snap.effect_pos)
                dels.update(snap.effect_neg)
    for st in later:
        for sn in st.snaps:
            adds.update(sn.action.effect_pos)
    consumers: dict[Atom, int] = {}
    for a in pending:
        for snap in (a.start, a.end):
            if snap is None:
                continue
            for atom, positive in _literals(snap.precond):
                if positive:
                    if atom not in adds and not any(atom in st for st in states):
                        return True
                    if atom in snap.effect_neg:
                        consumers[atom] = consumers.get(atom, 0) + 1
                elif atom not in dels and all(atom in st for st in states):
                    return True
    # two snaps that each need and delete an atom nobody re-adds cannot both run
    return any(n > 1 and atom not in adds for atom, n in consumers.items())


def _search_schedules(
    w: TemporalTaskNetwork,
    deltas: Mapping[str, int],
    horizon: int,
    search: _Search | None,
    actions: Mapping[str, GroundAction] | None = None,
    s0: frozenset | None = None,
    pool: ObjectPool | None = None,
    accept: Callable[[dict[str, int]], bool] | None = None,
    bound: Callable[[], int | None] = lambda: None,
    anchored: bool = False,
) -> Iterator[dict[str, int]]:
    """Chronological enumeration of start dates; (date, index) pairs strictly increase.

    With ``anchored`` set, a start date must lie within one step of an already
    fixed event, or make the action end within one step of one. This keeps
    larger instances tractable but is not exhaustive.
    """
    ids = list(w.ids)
    starts: dict[str, int] = {}
    order = _aux_order(w)

    def durations_of(exact: Mapping[TimePoint, int]) -> dict[str, int | None]:
        out: dict[str, int | None] = {}
        for p, v in exact.items():
            if p.kind == "start" and end(p.id) in exact:
                out[p.id] = exact[end(p.id)] - v
        return out

    def partial_ok(t: int) -> bool:
        exact, lb = _point_values(w, starts, deltas, t, order)
        if not all(_check_bound(c, exact, lb) for c in w.co):
            return False
        durs = durations_of(exact)
        for c in w.cd:
            if all(i in durs for i in c.ids()):
                try:
                    check_durations([c], durs)
                except ExecutionError:
                    return False
        if actions is not None and s0 is not None:
            plan = TemporalPlan(tuple(PlanEntry(actions[i].task, d, deltas[i], actions[i], i) for i, d in starts.items()))
            try:
                tl = simulate(plan, s0, pool)
            except ExecutionError as err:
                # later moves start at t or after, so failures up to t are final
                if err.date is not None and err.date <= t:
                    return False
            else:
                if _stranded(tl, t, [actions[i] for i in ids if i not in starts]):
                    return False
        b = bound()
        if b is not None:
            lower = max([d + deltas[i] for i, d in starts.items()] + [t + deltas[i] for i in ids if i not in starts])
            if lower >= b:
                return False
        return True

    def dates_for(i: str, t_last: int) -> list[int]:
        last = horizon - deltas[i]
        if last < t_last and search is not None:
            search.horizon_hit = True
        if not anchored:
            return list(range(t_last, last + 1))
        events = {0}
        for j, d in starts.items():
            events.update((d, d + deltas[j]))
        out = set()
        for h in events:
            out.update((h, h + 1, h - deltas[i] - 1, h - deltas[i], h - deltas[i] + 1))
        if search is not None and any(x > last for x in out):
            search.horizon_hit = True
        return sorted(x for x in out if t_last <= x <= last)

    def rec(t_last: int, k_last: int) -> Iterator[dict[str, int]]:
        if search is not None:
            search.tick()
        if len(starts) == len(ids):
            if accept is None or accept(dict(starts)):
                yield dict(starts)
            return
        moves = sorted(
            (t, k)
            for k, i in enumerate(ids)
            if i not in starts
            for t in dates_for(i, t_last)
            if t > t_last or k > k_last
        )
        for t, k in moves:
            i = ids[k]
            starts[i] = t
            if partial_ok(t):
                yield from rec(t, k)
            del starts[i]

    yield from rec(0, -1)


def schedule(
    network: TemporalTaskNetwork, durations: Mapping[str, int], horizon: int | None = None, optimize: bool = False
) -> dict[TimePoint, int]:
    """Integer dates for every point satisfying the ordering and duration stores.

    The first schedule found is returned unless ``optimize`` asks for a
    minimal-makespan one.
    """
    h = default_horizon(durations) if horizon is None else horizon
    best: dict[str, int] | None = None
    best_span: int | None = None

    def placed(starts: Mapping[str, int]) -> dict[TimePoint, int | None] | None:
        for pd in placements(network, _dates(network, starts, durations), _happenings(starts, durations)):
            try:
                check_ordering(network.co, pd)
                check_durations(network.cd, point_durations(pd))
            except ExecutionError:
                continue
            return pd
        return None

    def full_ok(starts: dict[str, int]) -> bool:
        return placed(starts) is not None

    for s in _search_schedules(network, durations, h, None, accept=full_ok, bound=lambda: best_span):
        span = max((s[i] + durations[i] for i in s), default=0)
        if best_span is None or span < best_span:
            best, best_span = s, span
        if not optimize:
            break
    if best is None:
        raise Unschedulable(f"no schedule within horizon {h}")
    pd = placed(best)
    assert pd is not None
    return {p: v for p, v in pd.items() if v is not None}


def _happenings(starts: Mapping[str, int], deltas: Mapping[str, int]) -> list[int]:
    return sorted({d for d in starts.values()} | {d + deltas[i] for i, d in starts.items()})


def _dates(w: TemporalTaskNetwork, starts: Mapping[str, int], deltas: Mapping[str, int]) -> dict[TimePoint, int | None]:
    leaf: dict[TimePoint, int] = {}
    for i, d in starts.items():
        leaf[start(i)] = d
        leaf[end(i)] = d + deltas[i]
    out: dict[TimePoint, int | None] = dict(leaf)
    out.update(aux_dates(w, leaf))
    return out


def plan(gm: GroundModel, config: PlannerConfig = PlannerConfig()) -> PlanResult:
    """Search for a decomposition and schedule that the validator accepts."""
    search = _Search(gm, config)
    try:
        for w0 in gm.initial_networks:
            root = rooted(w0)
            for doc, span in _decompose_search(search, root, [], {i: 0 for i in root.ids}):
                if search.best is None or span < search.best[0]:
                    search.best = (span, doc)
                if not config.optimize:
                    raise _Budget()
    except _Budget:
        pass
    stats = {"nodes": search.nodes, "traces": search.traces}
    if search.best is not None:
        return PlanResult(search.best[1], None, search.best[0], stats)
    if search.nodes > config.node_limit:
        reason = "limit"
    elif search.depth_hit:
        reason = "depth"
    elif search.horizon_hit and config.horizon is not None:
        reason = "horizon"
    else:
        reason = "exhausted"
    return PlanResult(None, reason, None, stats)


def _decompose_search(
    search: _Search,
    w: TemporalTaskNetwork,
    trace: list[tuple[str, GroundMethod]],
    depth: dict[str, int],
) -> Iterator[tuple[PlanDocument, int]]:
    search.tick()
    gm = search.gm
    compound = sorted(i for i in w.ids if gm.action_for(w.alpha[i]) is None)
    if not compound:
        search.traces += 1
        yield from _leaf(search, w, trace)
        return
    i = compound[0]
    if depth[i] + 1 > search.config.max_depth:
        search.depth_hit = True
        return
    for m in gm.methods_for(w.alpha[i]):
        nw = decompose(w, DecompositionStep(i, m))
        if not pa_consistent(network_graph(nw)):
            continue
        nd = dict(depth)
        for j in nw.ids:
            nd.setdefault(j, depth[i] + 1)
        yield from _decompose_search(search, nw, trace + [(i, m)], nd)


def _leaf(search: _Search, w: TemporalTaskNetwork, trace: list[tuple[str, GroundMethod]]) -> Iterator[tuple[PlanDocument, int]]:
    gm = search.gm
    actions = {i: gm.action_for(w.alpha[i]) for i in w.ids}
    deltas = {i: a.duration for i, a in actions.items()}  # type: ignore[union-attr]
    if not pa_consistent(network_graph(w, deltas)):
        return
    horizon = search.config.horizon if search.config.horizon is not None else default_horizon(deltas)
    obligations = [o for c in w.ct for o in c.obligations]

    has_empty = bool(empty_leaves(w))

    def accept(starts: dict[str, int]) -> bool:
        base = _dates(w, starts, deltas)
        if not has_empty:
            try:
                check_ordering(w.co, base)
                check_durations(w.cd, point_durations(base))
            except ExecutionError:
                return False
        plan = TemporalPlan(tuple(PlanEntry(actions[i].task, starts[i], deltas[i], actions[i], i) for i in w.ids))  # type: ignore[union-attr]
        try:
            tl = simulate(plan, gm.init, gm.pool)
            goal_check(tl, gm.goal, gm.pool)
        except ExecutionError:
            return False
        for pd in placements(w, base, happening_events(plan)):
            try:
                check_ordering(w.co, pd)
                check_durations(w.cd, point_durations(pd))
                check_temporal_constraints(tl, obligations, pd, gm.pool)
            except (ExecutionError, UnmappedTimePoint):
                continue
            return True
        return False

    def bound() -> int | None:
        return search.best[0] if search.config.optimize and search.best is not None else None

    anchored = search.config.dates == "events" or (
        search.config.dates == "auto" and len(w.ids) > EXHAUSTIVE_UP_TO
    )
    for starts in _search_schedules(w, deltas, horizon, search, actions, gm.init, gm.pool, accept, bound, anchored):  # type: ignore[arg-type]
        span = max((starts[i] + deltas[i] for i in w.ids), default=0)
        yield _document(w, trace, starts, actions), span  # type: ignore[arg-type]
        if not search.config.optimize:
            return


def _document(
    w: TemporalTaskNetwork,
    trace: list[tuple[str, GroundMethod]],
    starts: Mapping[str, int],
    actions: Mapping[str, GroundAction],
) -> PlanDocument:
    order = sorted(w.ids, key=lambda i: (starts[i], w.ids.index(i)))
    names = {i: str(k) for k, i in enumerate(order)}
    for i, _ in trace:
        names[i] = str(len(names))
    plan_actions = tuple(
        PlanAction(names[i], starts[i], actions[i].task, actions[i].duration) for i in order
    )
    children = {r.id: r.children for r in w.aux}
    lines = tuple(
        PlanDecomposition(
            names[i],
            m.task.name,
            tuple(a.name for a in m.task.args),  # type: ignore[union-attr]
            m.name,
            tuple(names[c] for c in children[i]),
        )
        for i, m in trace
    )
    roots = tuple(names[c] for c in children[ROOT])
    return PlanDocument(plan_actions, roots, lines)
