"""Function-free first-order formulas over typed objects.

States are closed-world: a ground atom is true iff it is a member of the state.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator, Mapping, Union

ROOT_TYPE = "object"


class LogicError(Exception):
    pass


class UnboundVariable(LogicError):
    pass


class EmptyDomain(LogicError):
    pass


class NotGround(LogicError):
    pass


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class Const:
    name: str

    def __str__(self) -> str:
        return self.name


Term = Union[Var, Const]


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def is_ground(self) -> bool:
        return all(isinstance(a, Const) for a in self.args)

    def __str__(self) -> str:
        if not self.args:
            return f"({self.predicate})"
        return f"({self.predicate} {' '.join(map(str, self.args))})"

    def sort_key(self) -> tuple:
        return (self.predicate, tuple(a.name for a in self.args))


@dataclass(frozen=True)
class Eq:
    """Structural equality between two terms; never looked up in a state."""

    left: Term
    right: Term

    def __str__(self) -> str:
        return f"(= {self.left} {self.right})"


@dataclass(frozen=True)
class Not:
    body: Formula

    def __str__(self) -> str:
        return f"(not {self.body})"


@dataclass(frozen=True)
class And:
    parts: tuple[Formula, ...] = ()

    def __str__(self) -> str:
        return "(and" + "".join(f" {p}" for p in self.parts) + ")"


@dataclass(frozen=True)
class Or:
    parts: tuple[Formula, ...] = ()

    def __str__(self) -> str:
        return "(or" + "".join(f" {p}" for p in self.parts) + ")"


@dataclass(frozen=True)
class Implies:
    antecedent: Formula
    consequent: Formula

    def __str__(self) -> str:
        return f"(imply {self.antecedent} {self.consequent})"


@dataclass(frozen=True)
class Forall:
    var: Var
    type: str
    body: Formula

    def __str__(self) -> str:
        return f"(forall ({self.var} - {self.type}) {self.body})"


@dataclass(frozen=True)
class Exists:
    var: Var
    type: str
    body: Formula

    def __str__(self) -> str:
        return f"(exists ({self.var} - {self.type}) {self.body})"


Formula = Union[Atom, Eq, Not, And, Or, Implies, Forall, Exists]

TRUE: Formula = And(())
FALSE: Formula = Or(())

State = frozenset  # frozenset[Atom], every member ground


@dataclass(frozen=True)
class ObjectPool:
    """Typed constants plus a single-inheritance type hierarchy rooted at ``object``."""

    objects: tuple[tuple[str, str], ...] = ()
    type_parents: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        parents = dict(self.type_parents)
        for t in parents:
            seen = {t}
            cur = t
            while cur in parents:
                cur = parents[cur]
                if cur in seen:
                    raise LogicError(f"type hierarchy cycle through {t!r}")
                seen.add(cur)
        known = self.types()
        for name, tag in self.objects:
            if tag not in known:
                raise LogicError(f"object {name!r} has undeclared type {tag!r}")

    @classmethod
    def untyped(cls, names: Iterable[str]) -> ObjectPool:
        return cls(tuple((n, ROOT_TYPE) for n in names))

    def types(self) -> set[str]:
        out = {ROOT_TYPE}
        for child, parent in self.type_parents:
            out.add(child)
            out.add(parent)
        return out

    def ancestors(self, type_name: str) -> list[str]:
        parents = dict(self.type_parents)
        chain = [type_name]
        while chain[-1] in parents:
            chain.append(parents[chain[-1]])
        if chain[-1] != ROOT_TYPE:
            chain.append(ROOT_TYPE)
        return chain

    def is_subtype(self, sub: str, sup: str) -> bool:
        return sup in self.ancestors(sub)

    def of_type(self, type_name: str) -> tuple[Const, ...]:
        return tuple(
            Const(name) for name, tag in self.objects if self.is_subtype(tag, type_name)
        )

    def type_of(self, name: str) -> str | None:
        for obj, tag in self.objects:
            if obj == name:
                return tag
        return None

    def __contains__(self, name: object) -> bool:
        return any(obj == name for obj, _ in self.objects)


def term_subst(t: Term, binding: Mapping[Var, Term]) -> Term:
    if isinstance(t, Var):
        return binding.get(t, t)
    return t


def substitute_all(phi: Formula, binding: Mapping[Var, Term]) -> Formula:
    """Simultaneous substitution of free variables; quantifiers shadow their own variable."""
    if not binding:
        return phi
    if isinstance(phi, Atom):
        return Atom(phi.predicate, tuple(term_subst(a, binding) for a in phi.args), phi.span)
    if isinstance(phi, Eq):
        return Eq(term_subst(phi.left, binding), term_subst(phi.right, binding))
    if isinstance(phi, Not):
        return Not(substitute_all(phi.body, binding))
    if isinstance(phi, And):
        return And(tuple(substitute_all(p, binding) for p in phi.parts))
    if isinstance(phi, Or):
        return Or(tuple(substitute_all(p, binding) for p in phi.parts))
    if isinstance(phi, Implies):
        return Implies(substitute_all(phi.antecedent, binding), substitute_all(phi.consequent, binding))
    if isinstance(phi, (Forall, Exists)):
        inner = {k: v for k, v in binding.items() if k != phi.var}
        return type(phi)(phi.var, phi.type, substitute_all(phi.body, inner))
    raise TypeError(f"not a formula: {phi!r}")


def substitute(phi: Formula, x: Var, c: Const) -> Formula:
    """phi[x/c]: replace the free occurrences of ``x`` by ``c``."""
    return substitute_all(phi, {x: c})


def free_vars(phi: Formula) -> set[Var]:
    if isinstance(phi, Atom):
        return {a for a in phi.args if isinstance(a, Var)}
    if isinstance(phi, Eq):
        return {a for a in (phi.left, phi.right) if isinstance(a, Var)}
    if isinstance(phi, Not):
        return free_vars(phi.body)
    if isinstance(phi, (And, Or)):
        out: set[Var] = set()
        for p in phi.parts:
            out |= free_vars(p)
        return out
    if isinstance(phi, Implies):
        return free_vars(phi.antecedent) | free_vars(phi.consequent)
    if isinstance(phi, (Forall, Exists)):
        return free_vars(phi.body) - {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def is_ground(phi: Formula) -> bool:
    """True when no variable occurs anywhere, bound or free."""
    if isinstance(phi, Atom):
        return phi.is_ground()
    if isinstance(phi, Eq):
        return isinstance(phi.left, Const) and isinstance(phi.right, Const)
    if isinstance(phi, Not):
        return is_ground(phi.body)
    if isinstance(phi, (And, Or)):
        return all(is_ground(p) for p in phi.parts)
    if isinstance(phi, Implies):
        return is_ground(phi.antecedent) and is_ground(phi.consequent)
    return False


def atoms(phi: Formula) -> Iterator[Atom]:
    """Every atom occurrence, regardless of polarity."""
    if isinstance(phi, Atom):
        yield phi
    elif isinstance(phi, Eq):
        return
    elif isinstance(phi, Not):
        yield from atoms(phi.body)
    elif isinstance(phi, (And, Or)):
        for p in phi.parts:
            yield from atoms(p)
    elif isinstance(phi, Implies):
        yield from atoms(phi.antecedent)
        yield from atoms(phi.consequent)
    elif isinstance(phi, (Forall, Exists)):
        yield from atoms(phi.body)
    else:
        raise TypeError(f"not a formula: {phi!r}")


def canonical(phi: Formula) -> Formula:
    """Rewrite implications as disjunctions and existentials as negated universals."""
    if isinstance(phi, (Atom, Eq)):
        return phi
    if isinstance(phi, Not):
        return Not(canonical(phi.body))
    if isinstance(phi, And):
        return And(tuple(canonical(p) for p in phi.parts))
    if isinstance(phi, Or):
        return Or(tuple(canonical(p) for p in phi.parts))
    if isinstance(phi, Implies):
        return Or((Not(canonical(phi.antecedent)), canonical(phi.consequent)))
    if isinstance(phi, Forall):
        return Forall(phi.var, phi.type, canonical(phi.body))
    if isinstance(phi, Exists):
        return Not(Forall(phi.var, phi.type, Not(canonical(phi.body))))
    raise TypeError(f"not a formula: {phi!r}")


def ground(phi: Formula, pool: ObjectPool) -> Formula:
    """Expand quantifiers over the pool; ``phi`` must be closed.

    Universal quantifiers become conjunctions and existentials disjunctions, one
    copy per type-compatible constant in declaration order.
    """
    unbound = free_vars(phi)
    if unbound:
        names = ", ".join(sorted(v.name for v in unbound))
        raise UnboundVariable(f"free variables in formula to ground: {names}")
    return _expand(phi, pool)


def _expand(phi: Formula, pool: ObjectPool) -> Formula:
    if isinstance(phi, (Atom, Eq)):
        return phi
    if isinstance(phi, Not):
        return Not(_expand(phi.body, pool))
    if isinstance(phi, And):
        return And(tuple(_expand(p, pool) for p in phi.parts))
    if isinstance(phi, Or):
        return Or(tuple(_expand(p, pool) for p in phi.parts))
    if isinstance(phi, Implies):
        return Implies(_expand(phi.antecedent, pool), _expand(phi.consequent, pool))
    if isinstance(phi, (Forall, Exists)):
        consts = pool.of_type(phi.type)
        if not consts:
            raise EmptyDomain(f"no objects of type {phi.type!r} for {phi.var}")
        copies = tuple(_expand(substitute(phi.body, phi.var, c), pool) for c in consts)
        return And(copies) if isinstance(phi, Forall) else Or(copies)
    raise TypeError(f"not a formula: {phi!r}")


def evaluate(state: State, phi: Formula) -> bool:
    """Truth value of a ground, quantifier-free formula under closed-world semantics."""
    if isinstance(phi, Atom):
        if not phi.is_ground():
            raise NotGround(f"atom {phi} is not ground")
        return phi in state
    if isinstance(phi, Eq):
        if not (isinstance(phi.left, Const) and isinstance(phi.right, Const)):
            raise NotGround(f"{phi} is not ground")
        return phi.left == phi.right
    if isinstance(phi, Not):
        return not evaluate(state, phi.body)
    if isinstance(phi, And):
        return all(evaluate(state, p) for p in phi.parts)
    if isinstance(phi, Or):
        return any(evaluate(state, p) for p in phi.parts)
    if isinstance(phi, Implies):
        return (not evaluate(state, phi.antecedent)) or evaluate(state, phi.consequent)
    if isinstance(phi, (Forall, Exists)):
        raise NotGround(f"quantified formula must be grounded first: {phi}")
    raise TypeError(f"not a formula: {phi!r}")


def holds(state: State, phi: Formula, pool: ObjectPool, var_types: Mapping[Var, str] | None = None) -> bool:
    """s |= phi, with free variables existentially closed over the pool.

    Free variables range over ``var_types[v]`` when given, else over every object.
    """
    free = sorted(free_vars(phi))
    if not free:
        return _sat(state, phi, pool, {})
    types = var_types or {}
    domains = [pool.of_type(types.get(v, ROOT_TYPE)) for v in free]
    for combo in product(*domains):
        if _sat(state, phi, pool, dict(zip(free, combo))):
            return True
    return False


def _term(t: Term, env: Mapping[Var, Const]) -> Term:
    return env.get(t, t) if isinstance(t, Var) else t


def _sat(state: State, phi: Formula, pool: ObjectPool, env: dict[Var, Const]) -> bool:
    if isinstance(phi, Atom):
        if env:
            phi = Atom(phi.predicate, tuple(_term(a, env) for a in phi.args))
        return phi in state
    if isinstance(phi, Eq):
        return _term(phi.left, env) == _term(phi.right, env)
    if isinstance(phi, Not):
        return not _sat(state, phi.body, pool, env)
    if isinstance(phi, And):
        return all(_sat(state, p, pool, env) for p in phi.parts)
    if isinstance(phi, Or):
        return any(_sat(state, p, pool, env) for p in phi.parts)
    if isinstance(phi, Implies):
        return (not _sat(state, phi.antecedent, pool, env)) or _sat(state, phi.consequent, pool, env)
    if isinstance(phi, (Forall, Exists)):
        test = all if isinstance(phi, Forall) else any
        return test(
            _sat(state, phi.body, pool, {**env, phi.var: c}) for c in pool.of_type(phi.type)
        )
    raise TypeError(f"not a formula: {phi!r}")


def simplify(phi: Formula, known: Mapping[Atom, bool]) -> Formula:
    """Partially evaluate a ground formula, replacing atoms whose truth is known."""
    if isinstance(phi, Atom):
        if phi in known:
            return TRUE if known[phi] else FALSE
        return phi
    if isinstance(phi, Eq):
        if isinstance(phi.left, Const) and isinstance(phi.right, Const):
            return TRUE if phi.left == phi.right else FALSE
        return phi
    if isinstance(phi, Not):
        inner = simplify(phi.body, known)
        if inner == TRUE:
            return FALSE
        if inner == FALSE:
            return TRUE
        return Not(inner)
    if isinstance(phi, And):
        parts = []
        for p in phi.parts:
            q = simplify(p, known)
            if q == FALSE:
                return FALSE
            if q != TRUE:
                parts.append(q)
        return parts[0] if len(parts) == 1 else And(tuple(parts))
    if isinstance(phi, Or):
        parts = []
        for p in phi.parts:
            q = simplify(p, known)
            if q == TRUE:
                return TRUE
            if q != FALSE:
                parts.append(q)
        return parts[0] if len(parts) == 1 else Or(tuple(parts))
    if isinstance(phi, Implies):
        return simplify(Or((Not(phi.antecedent), phi.consequent)), known)
    return phi


def conjoin(parts: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.parts)
        else:
            flat.append(p)
    return flat[0] if len(flat) == 1 else And(tuple(flat))
