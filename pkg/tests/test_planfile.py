from __future__ import annotations

import pytest

from conftest import CORPUS

from hddl21.logic import Const
from hddl21.model import Task
from hddl21.planfile import PlanAction, PlanFormatError, parse_plan, print_plan

SAMPLE = """;; a comment
3 4: (drive t a b) [5]
0: (load t a p) [1]   ; trailing note
==>
root 9
9 deliver p b -> m-deliver 1 3
"""


def test_parse_sample():
    doc = parse_plan(SAMPLE)
    assert doc.actions == (
        PlanAction("1", 0, Task("load", (Const("t"), Const("a"), Const("p"))), 1),
        PlanAction("3", 4, Task("drive", (Const("t"), Const("a"), Const("b"))), 5),
    )
    assert doc.roots == ("9",)
    (d,) = doc.decompositions
    assert (d.id, d.task_name, d.task_args, d.method, d.children) == ("9", "deliver", ("p", "b"), "m-deliver", ("1", "3"))
    assert doc.comments == (";; a comment",)
    assert doc.makespan() == 9


def test_implicit_ids_are_positions():
    doc = parse_plan("0: (a) [1]\n2: (b) [0]\n")
    assert [a.id for a in doc.actions] == ["0", "1"]
    assert doc.roots == ("0", "1")


def test_arrowless_hierarchy_lines():
    doc = parse_plan("0 0: (a) [1]\n==>\nroot 5\n5 top m 0\n")
    (line,) = doc.decompositions
    assert line.task_args is None and line.method == "m" and line.children == ("0",)
    assert print_plan(doc).endswith("5 top m 0\n")


@pytest.mark.parametrize(
    "text, kind",
    [
        ("-1: (a) [1]\n", "NegativeDate"),
        ("0: (a) [-2]\n", "NegativeDuration"),
        ("1.5: (a) [1]\n", "NonInteger"),
        ("0: (a) [1.0]\n", "NonInteger"),
        ("x 0: (a) [1]\nx 1: (b) [1]\n", "DuplicateIdentifier"),
        ("0: (a) [1]\n==>\nroot 0 0\n", "DuplicateIdentifier"),
        ("0: (a) [1]\n==>\nroot 7\n", "MissingTimedEntry"),
        ("0: (a) [1]\n==>\nroot 0\n==>\n", "SyntaxError"),
        ("0: (a)\n", "SyntaxError"),
        ("0: () [1]\n", "SyntaxError"),
        ("0: (a) [1]\n==>\n5 top -> m 0\n", "SyntaxError"),
        ("a$ 0: (a) [1]\n", "SyntaxError"),
    ],
)
def test_format_errors(text, kind):
    with pytest.raises(PlanFormatError) as info:
        parse_plan(text)
    assert info.value.kind == kind


def test_two_parents_are_rejected():
    text = "0 0: (a) [1]\n==>\nroot 1 2\n1 t -> m 0\n2 t -> m 0\n"
    with pytest.raises(PlanFormatError) as info:
        parse_plan(text)
    assert info.value.kind == "DuplicateIdentifier"


@pytest.mark.parametrize("path", sorted(CORPUS.rglob("*.plan")), ids=lambda p: f"{p.parent.name}/{p.name}")
def test_corpus_plans_round_trip(path):
    doc = parse_plan(path.read_text())
    printed = print_plan(doc)
    assert parse_plan(printed) == doc
    assert printed == path.read_text()
