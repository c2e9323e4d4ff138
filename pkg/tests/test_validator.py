from __future__ import annotations

import pytest

from conftest import CORPUS, INSTANCE_IDS, golden, load

from hddl21.mutations import MUTATIONS, NotApplicable
from hddl21.parser import parse_domain, parse_problem
from hddl21.planfile import parse_plan, print_plan
from hddl21.validator import explain, validate, validate_text


@pytest.mark.parametrize("name", INSTANCE_IDS)
def test_corpus_plans_are_valid(name):
    d, p = load(name)
    v = validate(d, p, golden(name))
    assert v.valid, v.errors
    assert v.stats["makespan"] == golden(name).makespan()
    assert v.stats["depth"] >= 1


@pytest.mark.parametrize("name", INSTANCE_IDS)
def test_explain_has_one_line_per_happening(name):
    d, p = load(name)
    v = validate(d, p, golden(name))
    lines = explain(v).splitlines()
    assert len(lines) == v.stats["happenings"] + 1
    assert lines[-1].endswith("plan is valid")


EXPECTED_KINDS = {
    ("transport/p01", "shift-date"): "PreconditionFailure",
    ("transport/p01", "swap-method"): "TaskMismatch",
    ("transport/p01", "drop-action-line"): "SubtaskMismatch",
    ("transport/p01", "inflate-duration"): "DurationViolation",
    ("transport/p01", "reorder-trace"): "UnknownTarget",
    ("transport/p01", "delete-init-atom"): "PreconditionFailure",
    ("transport/p01", "negate-goal"): "GoalNotReached",
    ("transport/p03", "shift-date"): "Interference",
    ("pa-stress/p01", "shift-date"): "OrderingViolation",
    ("concurrency/p02", "swap-method"): "SubtaskMismatch",
}


@pytest.mark.parametrize("name, op", sorted(EXPECTED_KINDS), ids=lambda x: x)
def test_mutation_error_kinds(name, op):
    d, p = load(name)
    p2, doc2 = MUTATIONS[op](d, p, golden(name))
    v = validate(d, p2, doc2)
    assert not v.valid
    assert v.errors[0].kind == EXPECTED_KINDS[name, op]


def test_failed_explain_ends_with_the_failure():
    d, p = load("transport/p01")
    p2, doc2 = MUTATIONS["shift-date"](d, p, golden("transport/p01"))
    text = explain(validate(d, p2, doc2))
    assert "FAILED PreconditionFailure" in text.splitlines()[-1]


def test_audit_collects_several_errors():
    d, p = load("transport/p01")
    doc = golden("transport/p01")
    _, doc = MUTATIONS["inflate-duration"](d, p, doc)
    p2, _ = MUTATIONS["negate-goal"](d, p, doc)
    quick = validate(d, p2, doc)
    full = validate(d, p2, doc, audit=True)
    assert len(quick.errors) == 1
    assert {e.kind for e in full.errors} >= {"DurationViolation", "GoalNotReached"}


def test_plan_duration_must_match_the_action():
    d, p = load("transport/p01")
    text = print_plan(golden("transport/p01")).replace("(load t1 a p1) [1]", "(load t1 a p1) [2]")
    v = validate(d, p, parse_plan(text))
    assert v.errors[0].kind == "DurationViolation"


def test_root_count_must_match():
    d, p = load("transport/p01")
    doc = parse_plan("0: (load t1 a p1) [1]\n1: (drive t1 a c) [5]\n")
    assert validate(d, p, doc).errors[0].kind == "RootMismatch"


def test_compound_roots_must_be_decomposed():
    d, p = load("transport/p01")
    err = validate(d, p, parse_plan("0: (load t1 a p1) [1]\n")).errors[0]
    assert err.kind == "NonPrimitiveResidue" and err.items == ("0",)


def test_validate_text_reports_parse_failures():
    folder = CORPUS / "transport"
    dom, prob = (folder / "domain.hddl").read_text(), (folder / "p01.hddl").read_text()
    assert validate_text(dom, prob, (folder / "p01.plan").read_text()).valid
    assert validate_text(dom[:-3], prob, "").errors[0].kind == "SyntaxError"
    assert validate_text(dom, prob, "-1: (a) [1]\n").errors[0].kind == "NegativeDate"


def test_every_mutation_is_rejected_or_not_applicable():
    for name in INSTANCE_IDS:
        d, p = load(name)
        for op, fn in MUTATIONS.items():
            try:
                p2, doc2 = fn(d, p, golden(name))
            except NotApplicable:
                continue
            assert not validate(d, p2, doc2).valid, (name, op)


# a method with no subtasks has no date of its own; it is placed at some happening

FLAG_DOMAIN = """
(define (domain flagd)
  (:requirements :hierarchy :durative-actions :method-preconditions)
  (:predicates (flag) (idle))
  (:task top)
  (:task check)
  (:method m-top :task (top)
    :ordered-subtasks (and SUBTASKS))
  (:method m-check :task (check) :precondition (flag) :subtasks ())
  (:durative-action raise :duration (= ?duration 1) :effect (at end (RAISED)))
  (:durative-action wait :duration (= ?duration 1) :effect (at end (idle))))
"""

FLAG_PROBLEM = "(define (problem f1) (:domain flagd) (:htn :subtasks (t (top))) (:init))"


def flag_case(subtasks, raised, plan_text):
    dom = FLAG_DOMAIN.replace("SUBTASKS", subtasks).replace("RAISED", raised)
    return validate(parse_domain(dom), parse_problem(FLAG_PROBLEM), parse_plan(plan_text))


LATE = "(r (raise)) (w (wait)) (c (check))"
EARLY = "(c (check)) (r (raise)) (w (wait))"
PLAN_LATE = "0 0: (raise) [1]\n1 1: (wait) [1]\n==>\nroot 9\n9 top -> m-top 0 1 5\n5 check -> m-check\n"
PLAN_EARLY = "0 0: (raise) [1]\n1 1: (wait) [1]\n==>\nroot 9\n9 top -> m-top 5 0 1\n5 check -> m-check\n"


def test_empty_refinement_placed_after_its_enabler():
    v = flag_case(LATE, "flag", PLAN_LATE)
    assert v.valid, v.errors


def test_empty_refinement_forced_before_its_enabler():
    v = flag_case(EARLY, "flag", PLAN_EARLY)
    assert not v.valid
    assert v.errors[0].kind == "ConstraintViolation"


def test_empty_refinement_whose_condition_never_holds():
    v = flag_case(LATE, "idle", PLAN_LATE)
    assert not v.valid
    assert v.errors[0].kind == "ConstraintViolation"
