"""Qualitative reasoning over time points with the relations <, <=, >, >=, =, !=.

A label is a bitmask over the three basic relations. Path consistency decides
consistency for networks without ``!=``; edges labelled ``!=`` are split into
``<`` and ``>`` and searched.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Hashable, Iterable, Sequence

LT, EQ, GT = 1, 2, 4
ALL = LT | EQ | GT
NE = LT | GT

LABELS = {"<": LT, "<=": LT | EQ, ">": GT, ">=": GT | EQ, "=": EQ, "!=": NE}

_BASIC_COMPOSE = {
    (LT, LT): LT,
    (LT, EQ): LT,
    (LT, GT): ALL,
    (EQ, LT): LT,
    (EQ, EQ): EQ,
    (EQ, GT): GT,
    (GT, LT): ALL,
    (GT, EQ): GT,
    (GT, GT): GT,
}


def _bits(r: int) -> list[int]:
    return [b for b in (LT, EQ, GT) if r & b]


COMPOSE = [[0] * 8 for _ in range(8)]
for _r1, _r2 in product(range(8), repeat=2):
    acc = 0
    for _a in _bits(_r1):
        for _b in _bits(_r2):
            acc |= _BASIC_COMPOSE[(_a, _b)]
    COMPOSE[_r1][_r2] = acc


def converse(r: int) -> int:
    return (LT if r & GT else 0) | (r & EQ) | (GT if r & LT else 0)


def holds_label(r: int, a: int, b: int) -> bool:
    basic = LT if a < b else EQ if a == b else GT
    return bool(r & basic)


@dataclass
class PointAlgebraGraph:
    """Points plus labelled edges; absent edges carry the universal label."""

    points: list[Hashable] = field(default_factory=list)
    edges: dict[tuple[Hashable, Hashable], int] = field(default_factory=dict)

    def add_point(self, p: Hashable) -> None:
        if p not in self.points:
            self.points.append(p)

    def constrain(self, a: Hashable, rel: str | int, b: Hashable) -> None:
        r = LABELS[rel] if isinstance(rel, str) else rel
        self.add_point(a)
        self.add_point(b)
        if a == b:
            r &= EQ
            key = (a, a)
            self.edges[key] = self.edges.get(key, ALL) & r
            return
        self.edges[(a, b)] = self.edges.get((a, b), ALL) & r
        self.edges[(b, a)] = self.edges.get((b, a), ALL) & converse(r)

    @classmethod
    def from_relations(cls, rels: Iterable[tuple[Hashable, str | int, Hashable]], points: Sequence[Hashable] = ()) -> PointAlgebraGraph:
        g = cls(list(dict.fromkeys(points)))
        for a, r, b in rels:
            g.constrain(a, r, b)
        return g

    def matrix(self) -> list[list[int]]:
        idx = {p: k for k, p in enumerate(self.points)}
        n = len(self.points)
        m = [[ALL] * n for _ in range(n)]
        for k in range(n):
            m[k][k] = EQ
        for (a, b), r in self.edges.items():
            if a == b:
                m[idx[a]][idx[a]] &= r
            else:
                m[idx[a]][idx[b]] &= r
        return m


def path_consistency(m: list[list[int]]) -> bool:
    """Tighten ``m`` in place; False as soon as a label becomes empty."""
    n = len(m)
    for i in range(n):
        if m[i][i] & EQ == 0:
            return False
        # repeated constraints on one pair can already have emptied a label
        if 0 in m[i]:
            return False
    changed = True
    while changed:
        changed = False
        for k in range(n):
            mk = m[k]
            for i in range(n):
                rik = m[i][k]
                if rik == ALL or i == k:
                    continue
                mi = m[i]
                for j in range(n):
                    if j == i or j == k:
                        continue
                    new = mi[j] & COMPOSE[rik][mk[j]]
                    if new != mi[j]:
                        if new == 0:
                            return False
                        mi[j] = new
                        m[j][i] = converse(new)
                        changed = True
    return True


def _consistent(m: list[list[int]]) -> bool:
    if not path_consistency(m):
        return False
    n = len(m)
    for i in range(n):
        for j in range(i + 1, n):
            if m[i][j] == NE:
                for choice in (LT, GT):
                    trial = [row[:] for row in m]
                    trial[i][j] = choice
                    trial[j][i] = converse(choice)
                    if _consistent(trial):
                        return True
                return False
    return True


def pa_consistent(g: PointAlgebraGraph | list[list[int]]) -> bool:
    """True iff some integer assignment satisfies every edge label."""
    m = g.matrix() if isinstance(g, PointAlgebraGraph) else [row[:] for row in g]
    return _consistent(m)
