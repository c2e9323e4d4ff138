from __future__ import annotations

import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from oracles import all_ground_atoms, expand, random_formula, random_pool, to_state, truth

from hddl21.logic import (
    FALSE,
    TRUE,
    And,
    Atom,
    Const,
    EmptyDomain,
    Eq,
    Exists,
    Forall,
    Implies,
    LogicError,
    Not,
    NotGround,
    ObjectPool,
    Or,
    UnboundVariable,
    Var,
    atoms,
    canonical,
    evaluate,
    free_vars,
    ground,
    holds,
    simplify,
    substitute,
    substitute_all,
)

X, Y = Var("?x"), Var("?y")
A, B, C = Const("a"), Const("b"), Const("c")
POOL = ObjectPool((("a", "room"), ("b", "room"), ("c", "box")), (("room", "object"), ("box", "object")))


def p(*args):
    return Atom("p", tuple(args))


def test_constants_are_the_empty_junctions():
    assert holds(frozenset(), TRUE, POOL)
    assert not holds(frozenset(), FALSE, POOL)


def test_closed_world_atoms():
    s = frozenset({p(A)})
    assert holds(s, p(A), POOL)
    assert not holds(s, p(B), POOL)
    assert holds(s, Not(p(B)), POOL)


def test_quantifiers_range_over_the_type():
    s = frozenset({p(A), p(B)})
    assert holds(s, Forall(X, "room", p(X)), POOL)
    assert not holds(s, Forall(X, "object", p(X)), POOL)
    assert holds(s, Exists(X, "box", Not(p(X))), POOL)


def test_free_variables_are_existentially_closed():
    s = frozenset({p(B)})
    assert holds(s, p(X), POOL)
    assert not holds(s, p(X), POOL, {X: "box"})
    assert holds(s, And((p(X), Not(Eq(X, A)))), POOL)


def test_equality_is_syntactic_on_constants():
    assert holds(frozenset(), Eq(A, A), POOL)
    assert not holds(frozenset(), Eq(A, B), POOL)
    assert holds(frozenset(), Forall(X, "box", Eq(X, C)), POOL)


def test_implication():
    s = frozenset({p(A)})
    assert holds(s, Implies(p(A), p(A)), POOL)
    assert not holds(s, Implies(p(A), p(B)), POOL)
    assert holds(s, Implies(p(B), p(C)), POOL)


def test_ground_expands_in_declaration_order():
    g = ground(Forall(X, "room", p(X)), POOL)
    assert g == And((p(A), p(B)))
    g = ground(Exists(X, "object", p(X)), POOL)
    assert g == Or((p(A), p(B), p(C)))


def test_ground_rejects_free_variables_and_empty_types():
    with pytest.raises(UnboundVariable):
        ground(p(X), POOL)
    empty = ObjectPool((("a", "room"),), (("room", "object"), ("box", "object")))
    with pytest.raises(EmptyDomain):
        ground(Forall(X, "box", p(X)), empty)


def test_evaluate_needs_ground_input():
    assert evaluate(frozenset({p(A)}), And((p(A), Not(p(B)))))
    with pytest.raises(NotGround):
        evaluate(frozenset(), p(X))
    with pytest.raises(NotGround):
        evaluate(frozenset(), Forall(X, "room", p(X)))


def test_substitute_respects_binders():
    phi = And((p(X), Forall(X, "room", p(X))))
    assert substitute(phi, X, A) == And((p(A), Forall(X, "room", p(X))))
    assert substitute_all(Atom("r", (X, Y)), {X: A, Y: B}) == Atom("r", (A, B))


def test_free_vars_and_atoms():
    phi = Exists(X, "room", Atom("r", (X, Y)))
    assert free_vars(phi) == {Y}
    assert list(atoms(And((p(A), Not(p(B)))))) == [p(A), p(B)]


def test_type_hierarchy():
    pool = ObjectPool((("t", "truck"), ("v", "van")), (("truck", "vehicle"), ("van", "vehicle"), ("vehicle", "object")))
    assert [c.name for c in pool.of_type("vehicle")] == ["t", "v"]
    assert pool.is_subtype("truck", "object")
    assert not pool.is_subtype("truck", "van")
    with pytest.raises(LogicError):
        ObjectPool((), (("a", "b"), ("b", "a")))
    with pytest.raises(LogicError):
        ObjectPool((("x", "ghost"),))


def test_simplify_uses_known_atoms():
    known = {p(A): True, p(B): False}
    assert simplify(And((p(A), p(C))), known) == p(C)
    assert simplify(And((p(B), p(C))), known) == FALSE
    assert simplify(Or((p(A), p(C))), known) == TRUE


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_canonical_form_preserves_truth(seed):
    rng = random.Random(seed)
    pool = random_pool(rng)
    phi = random_formula(rng, pool)
    if free_vars(phi):
        return
    psi = canonical(phi)
    for keys in [set(), set(all_ground_atoms(pool))] + [
        {a for a in all_ground_atoms(pool) if rng.random() < 0.5} for _ in range(6)
    ]:
        s = to_state(keys)
        assert holds(s, psi, pool) == holds(s, phi, pool)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_ground_then_evaluate_matches_holds(seed):
    rng = random.Random(seed)
    pool = random_pool(rng)
    phi = random_formula(rng, pool)
    if free_vars(phi):
        return
    g = ground(phi, pool)
    tree = expand(phi, pool)
    universe = all_ground_atoms(pool)
    for _ in range(8):
        keys = {a for a in universe if rng.random() < 0.5}
        s = to_state(keys)
        assert evaluate(s, g) == holds(s, phi, pool) == truth(tree, {a: a in keys for a in universe})


@pytest.mark.parametrize("bits", list(product((False, True), repeat=2)))
def test_connectives_truth_table(bits):
    s = frozenset(a for a, b in zip((p(A), p(B)), bits) if b)
    x, y = bits
    assert holds(s, And((p(A), p(B))), POOL) == (x and y)
    assert holds(s, Or((p(A), p(B))), POOL) == (x or y)
    assert holds(s, Implies(p(A), p(B)), POOL) == ((not x) or y)
    assert holds(s, Not(p(A)), POOL) == (not x)
