from __future__ import annotations

import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from oracles import basic_of, brute_consistent

from hddl21.pointalgebra import ALL, COMPOSE, EQ, GT, LABELS, LT, NE, PointAlgebraGraph, converse, holds_label, pa_consistent

MASKS = range(1, 8)


@pytest.mark.parametrize("r1, r2", list(product(MASKS, repeat=2)))
def test_composition_matches_brute_force(r1, r2):
    # x r1 y and y r2 z over small integers: collect every x-z relation
    seen = 0
    for x, y, z in product(range(4), repeat=3):
        if r1 & basic_of(x, y) and r2 & basic_of(y, z):
            seen |= basic_of(x, z)
    assert COMPOSE[r1][r2] == seen


@pytest.mark.parametrize("r", range(8))
def test_converse_is_an_involution(r):
    assert converse(converse(r)) == r
    for a, b in product(range(3), repeat=2):
        assert holds_label(r, a, b) == holds_label(converse(r), b, a)


def test_labels():
    assert LABELS["<="] == LT | EQ and LABELS["!="] == NE and ALL == LT | EQ | GT
    assert converse(LT) == GT and converse(EQ) == EQ


@pytest.mark.parametrize(
    "rels, expected",
    [
        ([("a", "<", "b"), ("b", "<", "c"), ("c", "<", "a")], False),
        ([("a", "<=", "b"), ("b", "<=", "c"), ("c", "<=", "a")], True),
        ([("a", "<=", "b"), ("b", "<=", "a"), ("a", "!=", "b")], False),
        ([("a", "!=", "b"), ("b", "!=", "c"), ("a", "!=", "c")], True),
        ([("a", "<=", "b"), ("b", "<=", "c"), ("a", "=", "c"), ("a", "!=", "b")], False),
        ([("a", "<", "a")], False),
        ([("a", "=", "a")], True),
    ],
)
def test_small_networks(rels, expected):
    assert pa_consistent(PointAlgebraGraph.from_relations(rels)) is expected


def test_disequalities_inside_a_window():
    # three pairwise distinct points between p and q with both ends pinned
    rels = [
        ("p", "<=", "x"), ("x", "<=", "q"), ("p", "<=", "y"), ("y", "<=", "q"),
        ("p", "<=", "z"), ("z", "<=", "q"),
        ("x", "!=", "y"), ("y", "!=", "z"), ("x", "!=", "z"),
        ("p", "=", "x"), ("q", "=", "z"),
    ]
    assert pa_consistent(PointAlgebraGraph.from_relations(rels))
    assert not pa_consistent(PointAlgebraGraph.from_relations(rels + [("p", "=", "q")]))


def test_matrix_layout():
    g = PointAlgebraGraph.from_relations([("a", "<", "b")], points=["b", "a"])
    assert g.points == ["b", "a"]
    assert g.matrix() == [[EQ, GT], [LT, EQ]]


def test_the_input_matrix_is_not_modified():
    m = [[EQ, LT], [GT, EQ]]
    pa_consistent(m)
    assert m == [[EQ, LT], [GT, EQ]]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_random_networks_match_brute_force(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 6)
    labels = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.5:
                labels[i, j] = rng.choice((LT, LT | EQ, EQ, NE, GT | EQ, GT))
    g = PointAlgebraGraph(list(range(n)))
    for (i, j), r in labels.items():
        g.constrain(i, r, j)
    assert pa_consistent(g) == brute_consistent(n, labels, n - 1)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_repeated_constraints_intersect(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 5)
    labels = {}
    g = PointAlgebraGraph(list(range(n)))
    for _ in range(rng.randint(1, 2 * n)):
        i, j = sorted(rng.sample(range(n), 2))
        r = rng.choice((LT, LT | EQ, EQ, NE, GT | EQ, GT))
        labels[i, j] = labels.get((i, j), ALL) & r
        g.constrain(i, r, j)
    assert pa_consistent(g) == brute_consistent(n, labels, n - 1)
