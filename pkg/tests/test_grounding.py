from __future__ import annotations

import json

import pytest

from conftest import INSTANCE_IDS, load

from hddl21.grounding import enumerate_bindings, ground_problem, static_predicates
from hddl21.logic import Atom, Const, ObjectPool, Var, atoms
from hddl21.model import Task, VariableConstraint
from hddl21.parser import parse_domain, parse_problem

X, Y = Var("?x"), Var("?y")
POOL = ObjectPool((("a", "room"), ("b", "room"), ("c", "box")), (("room", "object"), ("box", "object")))


def names(bindings):
    return [tuple(b[v].name for v in (X, Y) if v in b) for b in bindings]


def test_bindings_follow_types_and_declaration_order():
    got = names(enumerate_bindings([(X, "room"), (Y, "object")], POOL))
    assert got == [(x, y) for x in "ab" for y in "abc"]


@pytest.mark.parametrize(
    "cv, expected",
    [
        ([VariableConstraint(X, "!=", Y)], [("a", "b"), ("b", "a")]),
        ([VariableConstraint(X, "=", Y)], [("a", "a"), ("b", "b")]),
        ([VariableConstraint(X, "=", Const("b"))], [("b", "a"), ("b", "b")]),
    ],
)
def test_bindings_respect_variable_constraints(cv, expected):
    assert names(enumerate_bindings([(X, "room"), (Y, "room")], POOL, cv)) == expected


def test_no_parameters_gives_one_binding():
    assert list(enumerate_bindings([], POOL)) == [{}]


DOMAIN = """
(define (domain g)
  (:requirements :hierarchy :typing :durative-actions)
  (:types spot - object)
  (:predicates (link ?a ?b - spot) (at ?a - spot) (lit ?a - spot) (busy))
  (:task go :parameters (?b - spot))
  (:method m-go :parameters (?a ?b - spot) :task (go ?b)
    :precondition (at start (link ?a ?b))
    :subtasks (s (step ?a ?b)))
  (:durative-action step :parameters (?a ?b - spot) :duration (= ?duration 2)
    :condition (and (at start (at ?a)) (at start (link ?a ?b)))
    :effect (and (at start (not (at ?a))) (at end (at ?b))))
  (:durative-action glow :parameters (?a - spot) :duration (= ?duration 1)
    :condition (over all (lit ?a))
    :effect (at end (busy))))
"""

PROBLEM = """
(define (problem g1) (:domain g)
  (:objects x y z - spot)
  (:htn :subtasks (t (go y)))
  (:init (at x) (link x y) (link y z)))
"""


def test_static_predicates():
    assert static_predicates(parse_domain(DOMAIN)) == {"link", "lit"}


def test_static_pruning():
    d, p = parse_domain(DOMAIN), parse_problem(PROBLEM)
    full = ground_problem(d, p, prune=False)
    pruned = ground_problem(d, p)
    assert full.stats["action:step"] == {"instances": 9, "kept": 9}
    assert pruned.stats["action:step"] == {"instances": 9, "kept": 2}
    assert {str(a) for a in pruned.actions if a.name == "step"} == {"(step x y)", "(step y z)"}
    assert pruned.stats["method:m-go"] == {"instances": 9, "kept": 2}
    assert [str(m.task) for m in pruned.methods] == ["(go y)", "(go z)"]


def test_a_statically_false_invariant_is_not_pruned():
    # the invariant is only sampled at happenings strictly inside the interval,
    # so a lone glow with nothing happening in between is executable
    pruned = ground_problem(parse_domain(DOMAIN), parse_problem(PROBLEM))
    assert pruned.stats["action:glow"] == {"instances": 3, "kept": 3}


def test_ground_action_shape():
    gm = ground_problem(parse_domain(DOMAIN), parse_problem(PROBLEM))
    a = gm.action_for(Task("step", (Const("x"), Const("y"))))
    assert a.duration == 2 and a.durative
    assert Atom("at", (Const("x"),)) in set(atoms(a.start.precond))
    assert a.start.effect_neg == (Atom("at", (Const("x"),)),)
    assert a.end.effect_pos == (Atom("at", (Const("y"),)),)
    assert gm.action_for(Task("step", (Const("z"), Const("x")))) is None
    assert [str(m.task) for m in gm.methods_for(Task("go", (Const("y"),)))] == ["(go y)"]


def test_initial_network_is_ground():
    gm = ground_problem(parse_domain(DOMAIN), parse_problem(PROBLEM))
    (w,) = gm.initial_networks
    assert w.alpha["t"] == Task("go", (Const("y"),))


@pytest.mark.parametrize("name", INSTANCE_IDS)
def test_to_json_is_deterministic(name):
    d, p = load(name)
    one = json.dumps(ground_problem(d, p).to_json(), sort_keys=True)
    two = json.dumps(ground_problem(d, p).to_json(), sort_keys=True)
    assert one == two


@pytest.mark.parametrize("name", INSTANCE_IDS)
def test_pruning_only_removes(name):
    d, p = load(name)
    full, pruned = ground_problem(d, p, prune=False), ground_problem(d, p)
    assert {a.task for a in pruned.actions} <= {a.task for a in full.actions}
    assert {(m.name, m.args) for m in pruned.methods} <= {(m.name, m.args) for m in full.methods}
