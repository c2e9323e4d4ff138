from __future__ import annotations

import sys
from functools import lru_cache
from pathlib import Path

import pytest

TESTS = Path(__file__).resolve().parent
ROOT = TESTS.parent
CORPUS = ROOT / "corpus"
sys.path.insert(0, str(TESTS))

from hddl21.cli import corpus_instances  # noqa: E402
from hddl21.grounding import ground_problem  # noqa: E402
from hddl21.parser import parse_domain, parse_problem  # noqa: E402
from hddl21.planfile import parse_plan  # noqa: E402

INSTANCES = [(d, p) for d, p in corpus_instances(CORPUS)]
INSTANCE_IDS = [f"{d.parent.name}/{p.stem}" for d, p in INSTANCES]

# acceptance outcomes, printed once at the end of the run
ACCEPTANCE_LINES: list[str] = []


@lru_cache(maxsize=None)
def load(name: str):
    """(domain, problem) for a corpus instance such as ``transport/p01``."""
    folder, stem = name.split("/")
    d = parse_domain((CORPUS / folder / "domain.hddl").read_text(), f"{folder}/domain.hddl")
    p = parse_problem((CORPUS / folder / f"{stem}.hddl").read_text(), f"{name}.hddl")
    return d, p


@lru_cache(maxsize=None)
def grounded(name: str):
    d, p = load(name)
    return ground_problem(d, p)


def golden(name: str):
    folder, stem = name.split("/")
    return parse_plan((CORPUS / folder / f"{stem}.plan").read_text())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS
