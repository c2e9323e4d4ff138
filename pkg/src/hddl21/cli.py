"""Command-line interface: check, ground, validate, solve, bench.

Exit codes: 0 success, 1 semantic failure (diagnostics, invalid plan, no plan
found), 2 operational failure (unreadable input, internal error).
"""
from __future__ import annotations

import argparse
import json
from importlib import resources
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from hddl21.grounding import GroundingError, ground_problem
from hddl21.model import Diagnostic, Domain, Problem, has_errors, validate_model
from hddl21.parser import HDDLSyntaxError, parse_domain, parse_problem
from hddl21.planfile import PlanFormatError, parse_plan, print_plan
from hddl21.planner import PlannerConfig, plan
from hddl21.semantics import ExecutionError
from hddl21.validator import Verdict, explain, validate

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2

SCHEMAS = ("verdict", "diagnostics", "solve", "bench", "ground", "stats")


def load_schema(name: str) -> dict:
    """The shipped JSON schema for one of the ``--format json`` outputs."""
    if name not in SCHEMAS:
        raise KeyError(name)
    return json.loads(resources.files("hddl21").joinpath(f"schemas/{name}.schema.json").read_text(encoding="utf-8"))


class OperationalError(Exception):
    pass


def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OperationalError(f"{path}: {exc.strerror or exc}") from exc


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


def _load(domain_path: str, problem_path: str | None, diags: list[Diagnostic]) -> tuple[Domain, Problem | None]:
    d = parse_domain(_read(domain_path), domain_path, diags)
    p = parse_problem(_read(problem_path), problem_path, diags) if problem_path else None
    return d, p


def _load_strict(domain_path: str, problem_path: str) -> tuple[Domain, Problem]:
    """Parse and model-check; any error here makes the inputs unusable."""
    diags: list[Diagnostic] = []
    try:
        d, p = _load(domain_path, problem_path, diags)
    except HDDLSyntaxError as err:
        raise OperationalError(err.diagnostic().format()) from err
    diags.extend(validate_model(d, p))
    if has_errors(diags):
        raise OperationalError("\n".join(x.format() for x in diags if x.severity == "error"))
    assert p is not None
    return d, p


def cmd_check(args: argparse.Namespace) -> int:
    diags: list[Diagnostic] = []
    try:
        d, p = _load(args.domain, args.problem, diags)
        diags.extend(validate_model(d, p))
    except HDDLSyntaxError as err:
        diags.append(err.diagnostic())
    if args.format == "json":
        print(json.dumps({"ok": not has_errors(diags), "diagnostics": [x.to_json() for x in diags]}, indent=2))
    else:
        for x in diags:
            print(x.format(), file=sys.stderr)
    return EXIT_FAIL if has_errors(diags) else EXIT_OK


def cmd_ground(args: argparse.Namespace) -> int:
    d, p = _load_strict(args.domain, args.problem)
    try:
        gm = ground_problem(d, p, prune=not args.no_prune)
    except GroundingError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FAIL
    for x in gm.diagnostics:
        print(x.format(args.problem), file=sys.stderr)
    if args.dump_ground or args.format == "json":
        print(json.dumps(gm.to_json() if args.dump_ground else {"stats": gm.stats}, indent=2, sort_keys=True))
    else:
        for key, row in gm.stats.items():
            print(f"{key}: " + ", ".join(f"{k}={v}" for k, v in row.items()))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    d, p = _load_strict(args.domain, args.problem)
    text = _read(args.plan)
    try:
        doc = parse_plan(text)
        v = validate(d, p, doc, audit=args.audit)
    except PlanFormatError as err:
        v = Verdict(False, [ExecutionError(err.kind, str(err))], {"happenings": 0, "makespan": 0, "depth": 0})
    if args.format == "json":
        print(json.dumps(v.to_json(), indent=2))
    else:
        if args.explain:
            print(explain(v))
        print("valid" if v.valid else "invalid")
        for e in v.errors:
            where = "" if e.date is None else f" at {e.date}"
            print(f"  {e.kind}{where}: {e.message}")
    return EXIT_OK if v.valid else EXIT_FAIL


def _config(args: argparse.Namespace) -> PlannerConfig:
    return PlannerConfig(
        max_depth=args.max_depth,
        horizon=args.horizon,
        optimize=args.optimize,
        node_limit=args.node_limit,
    )


def cmd_solve(args: argparse.Namespace) -> int:
    d, p = _load_strict(args.domain, args.problem)
    gm = ground_problem(d, p)
    result = plan(gm, _config(args))
    if not result.ok:
        if args.format == "json":
            print(json.dumps({"solved": False, "reason": result.reason, "makespan": None, "stats": result.stats, "plan": None}))
        print(f"no plan found: {result.reason} bound reached" if result.reason != "exhausted" else "no plan found: search space exhausted", file=sys.stderr)
        return EXIT_FAIL
    doc = result.doc
    assert doc is not None
    if args.optimize:
        doc = type(doc)(doc.actions, doc.roots, doc.decompositions, (f";; makespan: {result.makespan}",))
    text = print_plan(doc)
    check = validate(d, p, parse_plan(text))
    if not check.valid:
        msgs = "; ".join(f"{e.kind}: {e.message}" for e in check.errors)
        raise OperationalError(f"internal error: emitted plan does not validate ({msgs})")
    if args.format == "json":
        print(json.dumps({"solved": True, "reason": None, "makespan": result.makespan, "stats": result.stats, "plan": text}, indent=2))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def corpus_instances(root: Path) -> list[tuple[Path, Path]]:
    """(domain, problem) pairs: every ``<dir>/domain.hddl`` with its sibling ``*.hddl`` files."""
    out: list[tuple[Path, Path]] = []
    for dom in sorted(root.rglob("domain.hddl")):
        for prob in sorted(dom.parent.glob("*.hddl")):
            if prob.name != "domain.hddl":
                out.append((dom, prob))
    return out


def expects_failure(problem: Path) -> bool:
    return problem.with_suffix(".expect-fail").exists() or Path(str(problem) + ".expect-fail").exists()


def bench_one(domain: Path, problem: Path, config: PlannerConfig) -> dict:
    name = f"{domain.parent.name}/{problem.stem}"
    t0 = time.perf_counter()
    row = {"instance": name, "solved": False, "valid": None, "makespan": None, "nodes": 0, "seconds": 0.0,
           "expected_fail": expects_failure(problem), "error": None}
    try:
        d = parse_domain(domain.read_text(encoding="utf-8"), str(domain))
        p = parse_problem(problem.read_text(encoding="utf-8"), str(problem))
        result = plan(ground_problem(d, p), config)
        row["nodes"] = result.stats.get("nodes", 0)
        if result.ok:
            assert result.doc is not None
            row["solved"] = True
            row["makespan"] = result.makespan
            row["valid"] = validate(d, p, parse_plan(print_plan(result.doc))).valid
        else:
            row["error"] = result.reason
    except Exception as exc:  # one broken instance must not stop the run
        row["error"] = f"{type(exc).__name__}: {exc}"
    row["seconds"] = round(time.perf_counter() - t0, 3)
    return row


def _row_ok(row: dict) -> bool:
    if row["expected_fail"]:
        return not row["solved"] or bool(row["valid"])
    return row["solved"] and bool(row["valid"])


def cmd_bench(args: argparse.Namespace) -> int:
    root = Path(args.corpus)
    if not root.is_dir():
        raise OperationalError(f"{root}: not a directory")
    instances = corpus_instances(root)
    if not instances:
        raise OperationalError(f"{root}: no domain.hddl with problems found")
    if args.seed is not None:
        random.Random(args.seed).shuffle(instances)
    config = _config(args)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(bench_one, [d for d, _ in instances], [p for _, p in instances], [config] * len(instances)))
    else:
        rows = [bench_one(d, p, config) for d, p in instances]
    ok = all(_row_ok(r) for r in rows)
    if args.format == "json":
        print(json.dumps({"ok": ok, "rows": rows}, indent=2))
    else:
        print(f"{'instance':<28} {'solved':<9} {'makespan':>8} {'nodes':>8} {'seconds':>8}")
        for r in rows:
            status = "yes" if r["solved"] and r["valid"] else "INVALID" if r["solved"] else "expected" if r["expected_fail"] else "no"
            span = "-" if r["makespan"] is None else str(r["makespan"])
            print(f"{r['instance']:<28} {status:<9} {span:>8} {r['nodes']:>8} {r['seconds']:>8.3f}")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hddl21", description="Temporal HTN (HDDL 2.1) checker, validator and reference planner.")
    sub = ap.add_subparsers(dest="command", required=True)

    def fmt(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=("text", "json"), default="text")

    def search(p: argparse.ArgumentParser) -> None:
        p.add_argument("--max-depth", type=_positive, default=8, help="maximum decomposition depth")
        p.add_argument("--horizon", type=_positive, default=None, help="latest admissible date")
        p.add_argument("--optimize", action="store_true", help="minimize makespan")
        p.add_argument("--node-limit", type=_positive, default=500_000)

    p = sub.add_parser("check", help="parse and statically check a domain (and problem)")
    p.add_argument("domain")
    p.add_argument("problem", nargs="?")
    fmt(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("ground", help="instantiate a problem and report statistics")
    p.add_argument("domain")
    p.add_argument("problem")
    p.add_argument("--dump-ground", action="store_true", help="print the whole ground model as JSON")
    p.add_argument("--no-prune", action="store_true")
    fmt(p)
    p.set_defaults(func=cmd_ground)

    p = sub.add_parser("validate", help="validate a timed hierarchical plan ('-' reads standard input)")
    p.add_argument("domain")
    p.add_argument("problem")
    p.add_argument("plan")
    p.add_argument("--audit", action="store_true", help="report every independent error")
    p.add_argument("--explain", action="store_true", help="narrate the execution")
    fmt(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="find a plan with the reference planner")
    p.add_argument("domain")
    p.add_argument("problem")
    search(p)
    fmt(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="solve and validate every instance of a corpus directory")
    p.add_argument("corpus")
    p.add_argument("--seed", type=int, default=None, help="shuffle the instance order")
    p.add_argument("--jobs", type=_positive, default=1)
    search(p)
    fmt(p)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OperationalError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
