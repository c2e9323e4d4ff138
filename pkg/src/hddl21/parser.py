"""S-expression reader and HDDL 2.1 domain/problem parser.

Keywords and structural words are case-insensitive; predicate, task, action
and object names keep their case.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

from hddl21.logic import (
    TRUE,
    And,
    Atom,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    SourceSpan,
    Term,
    Var,
    conjoin,
)
from hddl21.model import (
    RELATIONS,
    SELF,
    AfterCond,
    AtCond,
    BeforeCond,
    BetweenCond,
    Diagnostic,
    Domain,
    DurationConstraint,
    DurBin,
    DurExpr,
    DurLit,
    DurOf,
    DurativeAction,
    InstantAction,
    Method,
    MethodCond,
    OrderingConstraint,
    Param,
    Problem,
    SnapAction,
    Surface,
    Task,
    TaskSchema,
    TemporalTaskNetwork,
    TimePoint,
    VariableConstraint,
    end,
    make_network,
    start,
)

KNOWN_REQUIREMENTS = {
    ":strips",
    ":typing",
    ":negative-preconditions",
    ":disjunctive-preconditions",
    ":equality",
    ":existential-preconditions",
    ":universal-preconditions",
    ":quantified-preconditions",
    ":hierarchy",
    ":method-preconditions",
    ":durative-actions",
    ":method-constraints",
    ":duration-inequalities",
}

_SYMBOL_CHARS = re.compile(r"[A-Za-z0-9_\-.<>=!*+/@]")
_INTEGER = re.compile(r"-?\d+\Z")


class HDDLSyntaxError(Exception):
    """Malformed input; carries the location and what the parser expected there."""

    def __init__(self, message: str, span: SourceSpan, expected: tuple[str, ...] = ()) -> None:
        self.span = span
        self.expected = expected or ("well-formed expression",)
        detail = f" (expected {' or '.join(self.expected)})"
        super().__init__(f"{span}: {message}{detail}")
        self.message = message

    def diagnostic(self) -> Diagnostic:
        return Diagnostic("error", "syntax", f"{self.message}; expected {' or '.join(self.expected)}", self.span)


class IllegalCharacter(HDDLSyntaxError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # LP RP SYMBOL KEYWORD VARIABLE INTEGER
    text: str
    span: SourceSpan

    def __repr__(self) -> str:
        return self.text if self.kind not in ("LP", "RP") else self.kind


def tokenize(text: str, file: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    line, col, i, n = 1, 1, 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if ch.isspace():
            i, col = i + 1, col + 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in "()":
            tokens.append(Token("LP" if ch == "(" else "RP", ch, SourceSpan(file, line, col, 1)))
            i, col = i + 1, col + 1
            continue
        j = i
        if ch in "?:":
            j += 1
        while j < n and _SYMBOL_CHARS.match(text[j]):
            j += 1
        if j == i or (j == i + 1 and ch in "?:"):
            raise IllegalCharacter(
                f"illegal character {ch!r}", SourceSpan(file, line, col, 1), ("symbol", "(", ")")
            )
        word = text[i:j]
        span = SourceSpan(file, line, col, j - i)
        if ch == "?":
            kind = "VARIABLE"
        elif ch == ":":
            kind, word = "KEYWORD", word.lower()
        elif _INTEGER.match(word):
            kind = "INTEGER"
        else:
            kind = "SYMBOL"
        tokens.append(Token(kind, word, span))
        col += j - i
        i = j
    return tokens


@dataclass
class SList:
    items: list[Node]
    span: SourceSpan

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, k):
        return self.items[k]

    def __iter__(self) -> Iterator[Node]:
        return iter(self.items)


Node = Union[Token, SList]


def read_sexprs(text: str, file: str = "<input>") -> list[Node]:
    tokens = tokenize(text, file)
    stack: list[list[Node]] = [[]]
    opens: list[Token] = []
    for tok in tokens:
        if tok.kind == "LP":
            stack.append([])
            opens.append(tok)
        elif tok.kind == "RP":
            if not opens:
                raise HDDLSyntaxError("unbalanced ')'", tok.span, ("(", "end of input"))
            items = stack.pop()
            lp = opens.pop()
            stack[-1].append(SList(items, lp.span))
        else:
            stack[-1].append(tok)
    if opens:
        last = tokens[-1].span if tokens else SourceSpan(file, 1, 1, 0)
        raise HDDLSyntaxError(f"{len(opens)} unclosed '('", _clip(last, text), (")",))
    return stack[0]


def _clip(span: SourceSpan, text: str) -> SourceSpan:
    return SourceSpan(span.file, span.line, span.column, max(span.length, 0))


# helpers ---------------------------------------------------------------------


def _span(node: Node) -> SourceSpan:
    return node.span


def _is_sym(node: Node, *words: str) -> bool:
    return isinstance(node, Token) and node.kind == "SYMBOL" and node.text.lower() in words


def _expect_list(node: Node, what: str) -> SList:
    if not isinstance(node, SList):
        raise HDDLSyntaxError(f"expected a parenthesized {what}", node.span, ("(",))
    return node


def _expect_token(node: Node, kinds: tuple[str, ...], what: str) -> Token:
    if not isinstance(node, Token) or node.kind not in kinds:
        raise HDDLSyntaxError(f"expected {what}", node.span, tuple(k.lower() for k in kinds))
    return node


def _head(node: SList) -> str | None:
    if node.items and isinstance(node.items[0], Token):
        return node.items[0].text.lower()
    return None


def _keyword_args(items: list[Node], start_at: int, allowed: set[str], where: str) -> dict[str, Node]:
    out: dict[str, Node] = {}
    k = start_at
    while k < len(items):
        key = items[k]
        if not isinstance(key, Token) or key.kind != "KEYWORD":
            raise HDDLSyntaxError(f"expected a keyword in {where}", key.span, tuple(sorted(allowed)))
        if key.text not in allowed:
            raise HDDLSyntaxError(f"unexpected keyword {key.text} in {where}", key.span, tuple(sorted(allowed)))
        if key.text in out:
            raise HDDLSyntaxError(f"duplicate {key.text} in {where}", key.span, tuple(sorted(allowed)))
        if k + 1 >= len(items):
            raise HDDLSyntaxError(f"missing value after {key.text}", key.span, ("value",))
        out[key.text] = items[k + 1]
        k += 2
    return out


class _Parser:
    def __init__(self, file: str, diagnostics: list[Diagnostic] | None) -> None:
        self.file = file
        self.diags = diagnostics if diagnostics is not None else []

    def warn(self, rule: str, message: str, span: SourceSpan) -> None:
        self.diags.append(Diagnostic("warning", rule, message, span))

    def unsupported(self, message: str, span: SourceSpan) -> None:
        self.diags.append(Diagnostic("error", "unsupported-feature", message, span))

    # terms, typed lists -------------------------------------------------

    def term(self, node: Node) -> Term:
        tok = _expect_token(node, ("VARIABLE", "SYMBOL", "INTEGER"), "a variable or constant")
        return Var(tok.text) if tok.kind == "VARIABLE" else Const(tok.text)

    def typed_list(self, node: Node, kind: str) -> list[tuple[str, str, SourceSpan]]:
        lst = _expect_list(node, f"{kind} list")
        out: list[tuple[str, str, SourceSpan]] = []
        pending: list[Token] = []
        items = lst.items
        k = 0
        want = ("VARIABLE",) if kind == "variable" else ("SYMBOL", "INTEGER")
        while k < len(items):
            it = items[k]
            if isinstance(it, Token) and it.kind == "SYMBOL" and it.text == "-":
                if not pending or k + 1 >= len(items):
                    raise HDDLSyntaxError("dangling '-' in typed list", it.span, ("type name",))
                tnode = items[k + 1]
                if isinstance(tnode, SList):
                    self.unsupported("'either' types are not supported", tnode.span)
                    tname = "object"
                else:
                    tname = _expect_token(tnode, ("SYMBOL",), "a type name").text
                out.extend((p.text, tname, p.span) for p in pending)
                pending = []
                k += 2
                continue
            pending.append(_expect_token(it, want, f"a {kind} name"))
            k += 1
        out.extend((p.text, "object", p.span) for p in pending)
        return out

    def params(self, node: Node) -> tuple[Param, ...]:
        return tuple((Var(n), t) for n, t, _ in self.typed_list(node, "variable"))

    # formulas ------------------------------------------------------------

    def atom(self, node: Node) -> Atom:
        lst = _expect_list(node, "atom")
        if not lst.items:
            raise HDDLSyntaxError("empty atom", lst.span, ("predicate name",))
        name = _expect_token(lst.items[0], ("SYMBOL",), "a predicate name")
        return Atom(name.text, tuple(self.term(a) for a in lst.items[1:]), lst.span)

    def formula(self, node: Node) -> Formula:
        lst = _expect_list(node, "formula")
        if not lst.items:
            return TRUE
        head = _head(lst)
        if head == "and":
            return And(tuple(self.formula(p) for p in lst.items[1:]))
        if head == "or":
            return Or(tuple(self.formula(p) for p in lst.items[1:]))
        if head == "not":
            self._arity(lst, 2, "not")
            return Not(self.formula(lst.items[1]))
        if head == "imply":
            self._arity(lst, 3, "imply")
            return Implies(self.formula(lst.items[1]), self.formula(lst.items[2]))
        if head in ("forall", "exists"):
            self._arity(lst, 3, head)
            body = self.formula(lst.items[2])
            for var, tname in reversed(self.params(lst.items[1])):
                body = Forall(var, tname, body) if head == "forall" else Exists(var, tname, body)
            return body
        if head == "=":
            self._arity(lst, 3, "=")
            return Eq(self.term(lst.items[1]), self.term(lst.items[2]))
        if head in ("when",):
            raise HDDLSyntaxError("conditional effects are not supported", lst.span, ("formula",))
        return self.atom(lst)

    def _arity(self, lst: SList, n: int, what: str) -> None:
        if len(lst.items) != n:
            raise HDDLSyntaxError(f"'{what}' takes {n - 1} argument(s)", lst.span, (f"{n - 1} argument(s)",))

    def _timed(self, node: Node) -> tuple[str, Node] | None:
        """Recognize (at start X), (at end X), (over all X)."""
        if not isinstance(node, SList) or len(node.items) != 3:
            return None
        a, b, body = node.items
        if _is_sym(a, "at") and _is_sym(b, "start", "end") and isinstance(body, SList):
            return ("at-" + b.text.lower(), body)
        if _is_sym(a, "over") and _is_sym(b, "all") and isinstance(body, SList):
            return ("overall", body)
        return None

    def _conjuncts(self, node: Node) -> list[Node]:
        lst = _expect_list(node, "expression")
        if _head(lst) == "and":
            return list(lst.items[1:])
        if not lst.items:
            return []
        return [lst]

    def effects(self, node: Node) -> tuple[list[Atom], list[Atom]]:
        pos: list[Atom] = []
        neg: list[Atom] = []
        for part in self._conjuncts(node):
            lst = _expect_list(part, "effect literal")
            head = _head(lst)
            if head in ("forall", "when"):
                self.unsupported(f"'{head}' effects are not supported", lst.span)
                continue
            if head in ("increase", "decrease", "assign", "scale-up", "scale-down"):
                self.unsupported("numeric effects are not supported", lst.span)
                continue
            if head == "not":
                self._arity(lst, 2, "not")
                neg.append(self.atom(lst.items[1]))
            else:
                pos.append(self.atom(lst))
        return pos, neg

    # actions -------------------------------------------------------------

    def action(self, lst: SList) -> InstantAction:
        name = _expect_token(lst.items[1], ("SYMBOL",), "an action name").text
        kw = _keyword_args(lst.items, 2, {":parameters", ":precondition", ":effect"}, f"action {name}")
        params = self.params(kw[":parameters"]) if ":parameters" in kw else ()
        pre = self.formula(kw[":precondition"]) if ":precondition" in kw else TRUE
        pos, neg = self.effects(kw[":effect"]) if ":effect" in kw else ([], [])
        return InstantAction(name, params, SnapAction(name, pre, tuple(pos), tuple(neg)), lst.span)

    def durative_action(self, lst: SList) -> DurativeAction:
        name = _expect_token(lst.items[1], ("SYMBOL",), "an action name").text
        kw = _keyword_args(
            lst.items, 2, {":parameters", ":duration", ":condition", ":effect"}, f"durative-action {name}"
        )
        params = self.params(kw[":parameters"]) if ":parameters" in kw else ()
        if ":duration" not in kw:
            raise HDDLSyntaxError(f"durative-action {name} lacks :duration", lst.span, (":duration",))
        duration = self.duration_decl(kw[":duration"])
        conds: dict[str, list[Formula]] = {"at-start": [], "at-end": [], "overall": []}
        if ":condition" in kw:
            for part in self._conjuncts(kw[":condition"]):
                timed = self._timed(part)
                if timed is None:
                    raise HDDLSyntaxError(
                        "durative conditions must be timed", _span(part), ("(at start ...)", "(at end ...)", "(over all ...)")
                    )
                conds[timed[0]].append(self.formula(timed[1]))
        effs: dict[str, tuple[list[Atom], list[Atom]]] = {"at-start": ([], []), "at-end": ([], [])}
        if ":effect" in kw:
            for part in self._conjuncts(kw[":effect"]):
                timed = self._timed(part)
                if timed is None or timed[0] == "overall":
                    raise HDDLSyntaxError("durative effects must be timed", _span(part), ("(at start ...)", "(at end ...)"))
                pos, neg = self.effects(timed[1])
                effs[timed[0]][0].extend(pos)
                effs[timed[0]][1].extend(neg)

        def cond(parts: list[Formula]) -> Formula:
            return TRUE if not parts else conjoin(parts) if len(parts) > 1 else parts[0]

        start_snap = SnapAction(f"{name}-start", cond(conds["at-start"]), tuple(effs["at-start"][0]), tuple(effs["at-start"][1]))
        end_snap = SnapAction(f"{name}-end", cond(conds["at-end"]), tuple(effs["at-end"][0]), tuple(effs["at-end"][1]))
        return DurativeAction(name, params, start_snap, end_snap, cond(conds["overall"]), duration, lst.span)

    def duration_decl(self, node: Node) -> DurExpr:
        lst = _expect_list(node, "duration constraint")
        if len(lst.items) == 3 and _is_sym(lst.items[0], "="):
            lhs = lst.items[1]
            if isinstance(lhs, Token) and lhs.kind == "VARIABLE" and lhs.text.lower() == "?duration":
                return self.dur_expr(lst.items[2], allow_ids=False)
        if _head(lst) in ("<=", ">=", "<", ">", "and"):
            self.unsupported("duration inequalities on actions are not supported; use (= ?duration n)", lst.span)
            return DurLit(0)
        raise HDDLSyntaxError("malformed :duration", lst.span, ("(= ?duration <integer expression>)",))

    def dur_expr(self, node: Node, allow_ids: bool = True) -> DurExpr:
        if isinstance(node, Token):
            if node.kind == "INTEGER":
                return DurLit(int(node.text))
            raise HDDLSyntaxError("expected an integer duration expression", node.span, ("integer", "(duration id)", "(+ ...)"))
        head = _head(node)
        if head in ("+", "-", "*") and len(node.items) >= 3:
            expr = self.dur_expr(node.items[1], allow_ids)
            for operand in node.items[2:]:
                expr = DurBin(head, expr, self.dur_expr(operand, allow_ids))
            return expr
        if head == "duration" and allow_ids:
            if len(node.items) == 1:
                return DurOf(SELF)
            if len(node.items) == 2:
                return DurOf(_expect_token(node.items[1], ("SYMBOL", "INTEGER"), "a task id").text)
        if head == "/":
            raise HDDLSyntaxError("division is not allowed in duration expressions", node.span, ("+", "-", "*"))
        raise HDDLSyntaxError("malformed duration expression", node.span, ("integer", "(duration id)", "(+ a b)", "(- a b)", "(* a b)"))

    # networks ------------------------------------------------------------

    def subtasks(self, node: Node) -> tuple[list[str], dict[str, Task]]:
        ids: list[str] = []
        alpha: dict[str, Task] = {}
        for k, part in enumerate(self._conjuncts(node)):
            lst = _expect_list(part, "subtask")
            if len(lst.items) == 2 and isinstance(lst.items[1], SList) and isinstance(lst.items[0], Token):
                tid = _expect_token(lst.items[0], ("SYMBOL", "INTEGER"), "a task id").text
                tnode = lst.items[1]
            else:
                tid, tnode = f"task{k}", lst
            t = _expect_list(tnode, "task")
            if not t.items:
                raise HDDLSyntaxError("empty task", t.span, ("task name",))
            tname = _expect_token(t.items[0], ("SYMBOL",), "a task name").text
            if tid in alpha:
                raise HDDLSyntaxError(f"duplicate task id {tid!r}", lst.span, ("fresh task id",))
            ids.append(tid)
            alpha[tid] = Task(tname, tuple(self.term(a) for a in t.items[1:]), t.span)
        return ids, alpha

    def point(self, node: Node) -> TimePoint:
        lst = _expect_list(node, "time point")
        if len(lst.items) == 2 and _is_sym(lst.items[0], "start", "end"):
            tid = _expect_token(lst.items[1], ("SYMBOL", "INTEGER"), "a task id").text
            return TimePoint(lst.items[0].text.lower(), tid)
        raise HDDLSyntaxError("malformed time point", lst.span, ("(start id)", "(end id)"))

    def ordering(self, node: Node) -> list[OrderingConstraint]:
        out: list[OrderingConstraint] = []
        for part in self._conjuncts(node):
            lst = _expect_list(part, "ordering constraint")
            negated = False
            if _head(lst) == "not" and len(lst.items) == 2 and isinstance(lst.items[1], SList):
                lst, negated = lst.items[1], True
            head = _head(lst)
            if head not in RELATIONS or len(lst.items) != 3:
                raise HDDLSyntaxError("malformed ordering constraint", lst.span, tuple(f"({r} a b)" for r in RELATIONS))
            if negated:
                if head != "=":
                    raise HDDLSyntaxError("only (not (= ...)) may be negated", lst.span, ("(!= a b)",))
                head = "!="
            a, b = lst.items[1], lst.items[2]
            if isinstance(a, Token) and isinstance(b, Token):
                if head == "<":
                    out.append(OrderingConstraint(end(a.text), "<=", start(b.text)))
                elif head == ">":
                    out.append(OrderingConstraint(end(b.text), "<=", start(a.text)))
                else:
                    raise HDDLSyntaxError(
                        "task-level ordering only supports < and >", lst.span, ("(< id id)", "(rel (start id) (end id))")
                    )
                continue
            out.append(OrderingConstraint(self.point(a), head, self.point(b)))
        return out

    def id_set(self, node: Node) -> tuple[str, ...]:
        if isinstance(node, Token):
            return (_expect_token(node, ("SYMBOL", "INTEGER"), "a task id").text,)
        return tuple(_expect_token(x, ("SYMBOL", "INTEGER"), "a task id").text for x in node.items)

    def constraints(self, node: Node) -> tuple[list[VariableConstraint], list[Surface]]:
        cv: list[VariableConstraint] = []
        ct: list[Surface] = []
        for part in self._conjuncts(node):
            lst = _expect_list(part, "constraint")
            head = _head(lst)
            if head == "=" and len(lst.items) == 3:
                cv.append(self.var_constraint(lst, "="))
            elif head == "not" and len(lst.items) == 2 and isinstance(lst.items[1], SList) and _head(lst.items[1]) == "=":
                cv.append(self.var_constraint(lst.items[1], "!="))
            elif head == "at" and len(lst.items) == 3:
                where = lst.items[1]
                if _is_sym(where, "start", "end"):
                    ct.append(AtCond(TimePoint(where.text.lower(), SELF), self.formula(lst.items[2])))
                else:
                    ct.append(AtCond(self.point(where), self.formula(lst.items[2])))
            elif head == "before" and len(lst.items) == 3:
                ct.append(BeforeCond(self.id_set(lst.items[1]), self.formula(lst.items[2])))
            elif head == "after" and len(lst.items) == 3:
                ct.append(AfterCond(self.id_set(lst.items[1]), self.formula(lst.items[2])))
            elif head == "between" and len(lst.items) == 4:
                ct.append(BetweenCond(self.id_set(lst.items[1]), self.id_set(lst.items[2]), self.formula(lst.items[3])))
            elif head in ("always", "sometime", "within", "at-most-once", "sometime-after", "sometime-before", "preference"):
                self.unsupported(f"trajectory constraint '{head}' is not supported", lst.span)
            else:
                raise HDDLSyntaxError(
                    "malformed constraint",
                    lst.span,
                    ("(= ?x ?y)", "(not (= ?x ?y))", "(at (start id) phi)", "(before ids phi)", "(after ids phi)", "(between ids ids phi)"),
                )
        return cv, ct

    def var_constraint(self, lst: SList, rel: str) -> VariableConstraint:
        left = self.term(lst.items[1])
        right = self.term(lst.items[2])
        if not isinstance(left, Var):
            left, right = right, left
        if not isinstance(left, Var):
            raise HDDLSyntaxError("variable constraint needs a variable", lst.span, ("?variable",))
        return VariableConstraint(left, rel, right)

    def duration_constraints(self, node: Node) -> list[DurationConstraint]:
        out: list[DurationConstraint] = []
        for part in self._conjuncts(node):
            lst = _expect_list(part, "duration constraint")
            head = _head(lst)
            if head not in RELATIONS or len(lst.items) != 3:
                raise HDDLSyntaxError("malformed duration constraint", lst.span, tuple(f"({r} a b)" for r in RELATIONS))
            out.append(DurationConstraint(self.dur_expr(lst.items[1]), head, self.dur_expr(lst.items[2])))
        return out

    def method_conditions(self, node: Node) -> list[Surface]:
        out: list[Surface] = []
        plain: list[Formula] = []
        for part in self._conjuncts(node):
            timed = self._timed(part)
            if timed is None:
                plain.append(self.formula(part))
            else:
                out.append(MethodCond(timed[0], self.formula(timed[1])))
        if plain:
            out.insert(0, MethodCond("at-start", plain[0] if len(plain) == 1 else And(tuple(plain))))
        return out

    def network(self, kw: dict[str, Node], where: str, span: SourceSpan, extra_ct: list[Surface]) -> TemporalTaskNetwork:
        task_keys = [k for k in (":subtasks", ":tasks", ":ordered-subtasks", ":ordered-tasks") if k in kw]
        if len(task_keys) > 1:
            raise HDDLSyntaxError(f"{where} declares subtasks twice", span, (":subtasks",))
        ids: list[str] = []
        alpha: dict[str, Task] = {}
        ordered = False
        co: list[OrderingConstraint] = []
        if task_keys:
            ids, alpha = self.subtasks(kw[task_keys[0]])
            if task_keys[0].startswith(":ordered"):
                ordered = True
                co.extend(OrderingConstraint(end(a), "<=", start(b)) for a, b in zip(ids, ids[1:]))
        if ":ordering" in kw:
            co.extend(self.ordering(kw[":ordering"]))
        cv: list[VariableConstraint] = []
        ct: list[Surface] = list(extra_ct)
        if ":constraints" in kw:
            more_cv, more_ct = self.constraints(kw[":constraints"])
            cv.extend(more_cv)
            ct.extend(more_ct)
        cd = self.duration_constraints(kw[":duration-constraints"]) if ":duration-constraints" in kw else []
        try:
            return make_network(ids, alpha, co, cv, cd, ct, ordered=ordered)
        except Exception as exc:  # UnknownIdentifier from normalization
            raise HDDLSyntaxError(str(exc), span, ("known task id",)) from exc

    def method(self, lst: SList) -> Method:
        name = _expect_token(lst.items[1], ("SYMBOL",), "a method name").text
        allowed = {
            ":parameters", ":task", ":precondition", ":subtasks", ":tasks", ":ordered-subtasks",
            ":ordered-tasks", ":ordering", ":constraints", ":duration-constraints",
        }
        kw = _keyword_args(lst.items, 2, allowed, f"method {name}")
        params = self.params(kw[":parameters"]) if ":parameters" in kw else ()
        if ":task" not in kw:
            raise HDDLSyntaxError(f"method {name} lacks :task", lst.span, (":task",))
        t = _expect_list(kw[":task"], "task")
        task = Task(_expect_token(t.items[0], ("SYMBOL",), "a task name").text, tuple(self.term(a) for a in t.items[1:]), t.span)
        pre = self.method_conditions(kw[":precondition"]) if ":precondition" in kw else []
        tn = self.network(kw, f"method {name}", lst.span, pre)
        return Method(name, params, task, tn, lst.span)

    # top level -----------------------------------------------------------

    def requirements(self, lst: SList) -> tuple[str, ...]:
        reqs = []
        for it in lst.items[1:]:
            tok = _expect_token(it, ("KEYWORD",), "a requirement flag")
            if tok.text not in KNOWN_REQUIREMENTS:
                self.warn("unknown-requirement", f"unknown requirement {tok.text}", tok.span)
            reqs.append(tok.text)
        return tuple(reqs)

    def _define(self, text: str, kind: str) -> tuple[SList, str]:
        nodes = read_sexprs(text, self.file)
        if len(nodes) != 1:
            span = _span(nodes[1]) if len(nodes) > 1 else SourceSpan(self.file, 1, 1, 0)
            raise HDDLSyntaxError("expected exactly one (define ...) form", span, ("(define ...)",))
        top = _expect_list(nodes[0], "define form")
        if _head(top) != "define" or len(top.items) < 2:
            raise HDDLSyntaxError("expected (define ...)", top.span, ("define",))
        decl = _expect_list(top.items[1], f"({kind} name)")
        if _head(decl) != kind or len(decl.items) != 2:
            raise HDDLSyntaxError(f"expected ({kind} <name>)", decl.span, (kind,))
        return top, _expect_token(decl.items[1], ("SYMBOL", "INTEGER"), f"a {kind} name").text

    def domain(self, text: str) -> Domain:
        top, name = self._define(text, "domain")
        reqs: tuple[str, ...] = ()
        types: list[tuple[str, str]] = []
        constants: list[tuple[str, str]] = []
        predicates: list[tuple[str, tuple[Param, ...]]] = []
        tasks: list[TaskSchema] = []
        actions: list = []
        methods: list[Method] = []
        for node in top.items[2:]:
            lst = _expect_list(node, "domain section")
            head = _head(lst)
            if head == ":requirements":
                reqs = self.requirements(lst)
            elif head == ":types":
                types.extend((n, t) for n, t, _ in self.typed_list(SList(lst.items[1:], lst.span), "type"))
            elif head == ":constants":
                constants.extend((n, t) for n, t, _ in self.typed_list(SList(lst.items[1:], lst.span), "constant"))
            elif head == ":predicates":
                for p in lst.items[1:]:
                    pl = _expect_list(p, "predicate declaration")
                    pname = _expect_token(pl.items[0], ("SYMBOL",), "a predicate name").text
                    if any(pname == q for q, _ in predicates):
                        raise HDDLSyntaxError(f"predicate {pname!r} declared twice", pl.span, ("new predicate",))
                    predicates.append((pname, self.params(SList(pl.items[1:], pl.span))))
            elif head == ":functions":
                self.unsupported("numeric fluents (:functions) are not supported", lst.span)
            elif head == ":task":
                tname = _expect_token(lst.items[1], ("SYMBOL",), "a task name").text
                kw = _keyword_args(lst.items, 2, {":parameters"}, f"task {tname}")
                tasks.append(TaskSchema(tname, self.params(kw[":parameters"]) if ":parameters" in kw else (), lst.span))
            elif head == ":method":
                methods.append(self.method(lst))
            elif head == ":action":
                actions.append(self.action(lst))
            elif head == ":durative-action":
                actions.append(self.durative_action(lst))
            else:
                raise HDDLSyntaxError(
                    f"unknown domain section {head!r}",
                    lst.span,
                    (":requirements", ":types", ":constants", ":predicates", ":task", ":method", ":action", ":durative-action"),
                )
        types = [(c, p) for c, p in types if c != "object"]
        return Domain(name, reqs, tuple(types), tuple(constants), tuple(predicates), tuple(tasks), tuple(actions), tuple(methods))

    def problem(self, text: str) -> Problem:
        top, name = self._define(text, "problem")
        domain_name = ""
        reqs: tuple[str, ...] = ()
        objects: list[tuple[str, str]] = []
        init: list[Atom] = []
        htn = TemporalTaskNetwork()
        htn_params: tuple[Param, ...] = ()
        goal: Formula | None = None
        for node in top.items[2:]:
            lst = _expect_list(node, "problem section")
            head = _head(lst)
            if head == ":domain":
                domain_name = _expect_token(lst.items[1], ("SYMBOL", "INTEGER"), "a domain name").text
            elif head == ":requirements":
                reqs = self.requirements(lst)
            elif head == ":objects":
                objects.extend((n, t) for n, t, _ in self.typed_list(SList(lst.items[1:], lst.span), "object"))
            elif head == ":init":
                for a in lst.items[1:]:
                    al = _expect_list(a, "initial atom")
                    if _head(al) == "=":
                        self.unsupported("numeric initial values are not supported", al.span)
                        continue
                    init.append(self.atom(al))
            elif head == ":goal":
                goal = self.formula(lst.items[1]) if len(lst.items) > 1 else None
            elif head == ":htn":
                allowed = {
                    ":parameters", ":subtasks", ":tasks", ":ordered-subtasks", ":ordered-tasks",
                    ":ordering", ":constraints", ":duration-constraints",
                }
                kw = _keyword_args(lst.items, 1, allowed, ":htn")
                htn_params = self.params(kw[":parameters"]) if ":parameters" in kw else ()
                htn = self.network(kw, ":htn", lst.span, [])
            elif head == ":metric":
                self.unsupported("plan metrics are not supported", lst.span)
            else:
                raise HDDLSyntaxError(
                    f"unknown problem section {head!r}", lst.span, (":domain", ":objects", ":htn", ":init", ":goal")
                )
        return Problem(name, domain_name, tuple(objects), tuple(init), htn, htn_params, goal, reqs)


def parse_domain(text: str, file: str = "<domain>", diagnostics: list[Diagnostic] | None = None) -> Domain:
    return _Parser(file, diagnostics).domain(text)


def parse_problem(text: str, file: str = "<problem>", diagnostics: list[Diagnostic] | None = None) -> Problem:
    return _Parser(file, diagnostics).problem(text)
