from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import Lits, RawSnap, brute_execute, non_interfering, random_plan

from hddl21.grounding import GroundAction
from hddl21.logic import TRUE, And, Atom, Not
from hddl21.model import SELF, Anchor, DurBin, DurLit, DurOf, DurationConstraint, Obligation, OrderingConstraint, Task, end, start
from hddl21.semantics import (
    ExecutionError,
    PlanEntry,
    TemporalPlan,
    check_durations,
    check_ordering,
    check_temporal_constraints,
    goal_check,
    happening_events,
    interferes,
    obligation_states,
    simulate,
)
from hddl21.model import SnapAction

U, V, W = Atom("u"), Atom("v"), Atom("w")


def act(name, duration, pre=TRUE, add=(), delete=(), end_pre=TRUE, end_add=(), end_del=(), inv=TRUE):
    return GroundAction(
        name,
        (),
        SnapAction(f"{name}-start", pre, tuple(add), tuple(delete)),
        SnapAction(f"{name}-end", end_pre, tuple(end_add), tuple(end_del)),
        inv,
        duration,
    )


def instant(name, pre=TRUE, add=(), delete=()):
    return GroundAction(name, (), SnapAction(name, pre, tuple(add), tuple(delete)), None, TRUE, 0)


def plan(*items):
    return TemporalPlan(tuple(PlanEntry(Task(a.name), d, a.duration, a) for a, d in items))


def failure(p, s0=frozenset()):
    with pytest.raises(ExecutionError) as info:
        simulate(p, s0)
    return info.value.kind, info.value.date


def test_happenings_are_distinct_sorted_dates():
    p = plan((act("a", 3), 2), (act("b", 0), 5), (act("c", 1), 4))
    assert happening_events(p) == [2, 4, 5]


def test_states_advance_per_happening():
    a = act("a", 2, add=[U], end_add=[V], end_del=[U])
    tl = simulate(plan((a, 1)), frozenset())
    assert tl.dates == [1, 3]
    assert tl.steps[0].after == {U}
    assert tl.final == {V}


def test_delete_then_add_keeps_the_atom():
    a = instant("a", add=[U], delete=[U])
    assert simulate(plan((a, 0)), frozenset()).final == {U}


def test_precondition_is_read_before_the_happening():
    a = instant("a", add=[U])
    b = instant("b", pre=U)
    assert failure(plan((a, 0), (b, 0))) == ("Interference", 0)
    assert failure(plan((b, 0), (a, 1))) == ("PreconditionFailure", 0)
    simulate(plan((a, 0), (b, 1)), frozenset())


@pytest.mark.parametrize(
    "x, y, expected",
    [
        (SnapAction("x", U), SnapAction("y", TRUE, (U,)), True),
        (SnapAction("x", Not(U)), SnapAction("y", TRUE, (), (U,)), True),
        (SnapAction("x", TRUE, (U,)), SnapAction("y", TRUE, (), (U,)), True),
        (SnapAction("x", TRUE, (U,)), SnapAction("y", TRUE, (U,)), False),
        (SnapAction("x", TRUE, (), (U,)), SnapAction("y", TRUE, (), (U,)), False),
        (SnapAction("x", U), SnapAction("y", U), False),
        (SnapAction("x", V, (W,)), SnapAction("y", W), True),
    ],
)
def test_interference_conditions(x, y, expected):
    assert interferes(x, y) is expected
    assert interferes(y, x) is expected


def test_invariant_is_sampled_strictly_inside():
    guarded = act("g", 4, inv=U)
    noop = instant("n")
    # the deletion at 1 is seen by the pre-state of the next interior happening
    assert failure(plan((guarded, 0), (instant("t", delete=[U]), 1), (noop, 3)), frozenset({U})) == ("InvariantViolation", 3)
    # with no later interior happening the end point is never sampled
    tl = simulate(plan((guarded, 0), (instant("t", delete=[U]), 3)), frozenset({U}))
    assert tl.dates == [0, 3, 4]
    # the start date is not inside either
    simulate(plan((guarded, 0), (noop, 0)), frozenset())


def test_short_action_invariant_is_never_checked():
    # a unit action has no integer date strictly inside, so a false invariant is harmless
    tl = simulate(plan((act("g", 1, inv=U), 0)), frozenset())
    assert tl.dates == [0, 1]


def test_invariant_is_read_in_the_pre_state():
    guarded = act("g", 4, inv=U)
    fixer = instant("f", add=[U])
    assert failure(plan((guarded, 0), (fixer, 2))) == ("InvariantViolation", 2)


def test_interference_is_checked_before_preconditions():
    a = instant("a", pre=W, add=[U])
    b = instant("b", pre=U)
    assert failure(plan((a, 3), (b, 3))) == ("Interference", 3)


def test_zero_duration_durative_action():
    a = act("z", 0, add=[U], end_add=[V])
    # start and end happen together, the end precondition sees the pre-state
    tl = simulate(plan((a, 2)), frozenset())
    assert tl.final == {U, V}
    b = act("z", 0, add=[U], end_pre=U)
    assert failure(plan((b, 2))) == ("Interference", 2)


def test_negative_dates_are_rejected():
    with pytest.raises(ValueError):
        plan((act("a", 1), -1))


def test_non_primitive_entries_fail():
    p = TemporalPlan((PlanEntry(Task("compound"), 0, 1, None),))
    with pytest.raises(ExecutionError) as info:
        simulate(p, frozenset())
    assert info.value.kind == "NonPrimitiveTask"


def test_empty_plan_has_no_steps():
    tl = simulate(TemporalPlan(), frozenset({U}))
    assert len(tl) == 0 and tl.final == {U}


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**6))
def test_simulate_matches_the_oracle(seed):
    rng = random.Random(seed)
    entries, s0 = random_plan(rng, ["u", "v", "w"])
    kind, date, trace = brute_execute(entries, s0)
    p = TemporalPlan(tuple(PlanEntry(Task(a.name), d, a.duration, a.ground()) for a, d in entries))
    state0 = frozenset(Atom(x) for x in s0)
    if kind is None:
        tl = simulate(p, state0)
        assert [(s.date, s.before, s.after) for s in tl.steps] == [
            (d, frozenset(Atom(x) for x in b), frozenset(Atom(x) for x in a)) for d, b, a in trace
        ]
    else:
        with pytest.raises(ExecutionError) as info:
            simulate(p, state0)
        assert (info.value.kind, info.value.date) == (kind, date)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_interferes_matches_the_oracle(seed):
    rng = random.Random(seed)
    props = ["u", "v", "w"]

    def raw():
        pos = frozenset(a for a in props if rng.random() < 0.3)
        neg = frozenset(a for a in props if a not in pos and rng.random() < 0.3)
        add = frozenset(a for a in props if rng.random() < 0.3)
        delete = frozenset(a for a in props if a not in add and rng.random() < 0.3)
        return RawSnap(Lits(pos, neg), add, delete)

    a, b = raw(), raw()
    assert interferes(a.snap("a"), b.snap("b")) is not non_interfering(a, b)


# network-level checks

A_S, A_E, B_S, B_E = start("a"), end("a"), start("b"), end("b")


def test_ordering_constraints():
    dates = {A_S: 0, A_E: 2, B_S: 2, B_E: 5}
    check_ordering([OrderingConstraint(A_E, "<=", B_S)], dates)
    with pytest.raises(ExecutionError) as info:
        check_ordering([OrderingConstraint(A_E, "<", B_S)], dates)
    assert info.value.kind == "OrderingViolation" and info.value.date == 2


def test_ordering_on_unscheduled_points_is_vacuous():
    check_ordering([OrderingConstraint(A_E, "<", B_S)], {A_E: 4, B_S: None})


def test_duration_constraints():
    cd = [DurationConstraint(DurBin("+", DurOf("a"), DurOf("b")), "<=", DurOf(SELF))]
    check_durations(cd, {"a": 2, "b": 3, SELF: 5})
    with pytest.raises(ExecutionError) as info:
        check_durations(cd, {"a": 2, "b": 3, SELF: 4})
    assert info.value.kind == "DurationViolation"
    check_durations([DurationConstraint(DurOf("a"), "=", DurLit(9))], {"a": None})


def obligation_plan():
    a = act("a", 4, add=[U], end_del=[U])
    b = instant("b", add=[V])
    return simulate(plan((a, 0), (b, 2)), frozenset())


DATES = {A_S: 0, A_E: 4, B_S: 2, B_E: 2}


@pytest.mark.parametrize(
    "mode, lo, hi, expected",
    [
        ("at", Anchor((A_S,)), None, [(0, {U})]),
        ("before", Anchor((A_S,)), None, [(0, set())]),
        ("before", Anchor((B_S,)), None, [(2, {U})]),
        ("at", Anchor((A_E, B_E), "max"), None, [(4, {V})]),
        ("at", Anchor((A_E, B_E), "min"), None, [(2, {U, V})]),
        ("span", Anchor((A_S,)), Anchor((A_E,)), [(0, {U}), (2, {U, V}), (4, {V})]),
        ("interior", Anchor((A_S,)), Anchor((A_E,)), [(2, {U, V})]),
    ],
)
def test_obligation_modes(mode, lo, hi, expected):
    got = obligation_states(obligation_plan(), Obligation(mode, lo, hi, TRUE), DATES)
    assert [(d, set(s)) for d, s in got] == expected


def test_anchor_must_be_a_happening():
    with pytest.raises(ExecutionError) as info:
        obligation_states(obligation_plan(), Obligation("at", Anchor((A_S,)), None, TRUE), {A_S: 3})
    assert info.value.kind == "AnchorOutOfScope"


def test_without_steps_the_initial_state_is_used():
    tl = simulate(TemporalPlan(), frozenset({W}))
    assert obligation_states(tl, Obligation("before", Anchor((A_S,)), None, W), {A_S: 0}) == [(0, frozenset({W}))]


def test_unscheduled_anchor_skips_the_obligation():
    assert obligation_states(obligation_plan(), Obligation("at", Anchor((A_S,)), None, W), {A_S: None}) is None


def test_constraint_violation():
    tl = obligation_plan()
    check_temporal_constraints(tl, [Obligation("interior", Anchor((A_S,)), Anchor((A_E,)), And((U, V)))], DATES)
    with pytest.raises(ExecutionError) as info:
        check_temporal_constraints(tl, [Obligation("span", Anchor((A_S,)), Anchor((A_E,)), U)], DATES)
    assert (info.value.kind, info.value.date) == ("ConstraintViolation", 4)


def test_goal_check():
    tl = obligation_plan()
    goal_check(tl, V)
    goal_check(tl, None)
    with pytest.raises(ExecutionError) as info:
        goal_check(tl, U)
    assert (info.value.kind, info.value.date) == ("GoalNotReached", 4)
