"""Surface syntax for TX10 programs.

    stmt  := "skip;" | "throw" EXC ";" | "val" ID "=" expr "in" block
           | expr "." ID "=" expr ";" | block
           | "at" "(" NAT ")" ["val" ID "=" expr] block
           | "async" block | "finish" block | "try" block "catch" block
    block := "{" stmt* "}"
    expr  := EXC | ID | expr "." ID | "{" [ID ":" expr ("," ID ":" expr)*] "}"
           | "globalref" expr | "valof" expr | "(" expr ")"

With ``allow_dynamic=True`` the runtime forms printed by
:func:`tx10.syntax.show` are accepted as well: ``spawned``, ``dynat``,
``finish[E,BF]`` and the value literals ``o(p,n)`` / ``gr(p,n)``.
"""
from __future__ import annotations

import re
from itertools import count

from .syntax import (EXCEPTIONS, At, AtSimple, Async, DynAt, Exc, FieldAssign,
                     Finish, GlobalRef, GlobalRefOf, ObjLit, Oid, Select, Seq,
                     Skip, Spawned, Throw, TryCatch, ValDecl, ValOf, Var,
                     expr_vars, free_vars)

KEYWORDS = {"skip", "throw", "val", "in", "at", "async", "finish", "try", "catch",
            "globalref", "valof"}
DYNAMIC_KEYWORDS = {"spawned", "dynat"}

_TOKEN = re.compile(r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<nat>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{}();.=,:\[\]])
""", re.VERBOSE)


class ParseError(Exception):
    def __init__(self, msg, line=None, col=None):
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + msg)
        self.line, self.col = line, col


class ScopeError(ParseError):
    pass


def tokenize(text: str) -> list:
    toks, pos, line, line_start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            toks.append((kind, m.group(), line, pos - line_start + 1))
        nl = m.group().count("\n")
        if nl:
            line += nl
            line_start = pos + m.group().rfind("\n") + 1
        pos = m.end()
    toks.append(("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text, allow_dynamic, first_label):
        self.toks = tokenize(text)
        self.i = 0
        self.dynamic = allow_dynamic
        self.labels = count(first_label)

    # token helpers
    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok[2], tok[3])

    def take(self, value=None, kind=None):
        tok = self.peek()
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            want = value if value is not None else kind
            self.fail(f"expected {want!r}, found {tok[1] or 'end of input'!r}")
        self.i += 1
        return tok

    def at(self, value):
        return self.peek()[1] == value and self.peek()[0] != "eof"

    def label(self):
        return next(self.labels)

    # statements
    def program(self):
        items = []
        while self.peek()[0] != "eof":
            items.append(self.stmt())
        return self.fold(items)

    def fold(self, items):
        if not items:
            return Skip(self.label())
        out = items[-1]
        for s in reversed(items[:-1]):
            out = Seq(s, out, self.label())
        return out

    def block(self):
        self.take("{")
        items = []
        while not self.at("}"):
            if self.peek()[0] == "eof":
                self.fail("unterminated block")
            items.append(self.stmt())
        self.take("}")
        return self.fold(items)

    def stmt(self):
        tok = self.peek()
        word = tok[1] if tok[0] == "id" else None
        if word == "skip":
            self.take()
            self.take(";")
            return Skip(self.label())
        if word == "throw":
            self.take()
            exc = self.peek()
            if exc[1] not in EXCEPTIONS:
                raise ScopeError(f"throw of non-exception {exc[1]!r}", exc[2], exc[3])
            self.take()
            self.take(";")
            return Throw(Exc(exc[1]), self.label())
        if word == "val":
            self.take()
            name = self.ident()
            self.take("=")
            e = self.expr()
            self.take("in")
            body = self.block()
            return ValDecl(name, e, body, self.label())
        if word == "at":
            self.take()
            place = self.paren_nat()
            if self.at("val"):
                self.take()
                name = self.ident()
                self.take("=")
                e = self.expr()
                body = self.block()
                return At(place, name, e, body, self.label())
            return AtSimple(place, self.block(), self.label())
        if word == "async":
            self.take()
            return Async(self.block(), self.label())
        if word == "finish":
            self.take()
            mu = frozenset()
            if self.at("["):
                if not self.dynamic:
                    self.fail("finish with exception set is a runtime-only form")
                mu = self.exc_set()
            return Finish(mu, self.block(), self.label())
        if word == "try":
            self.take()
            body = self.block()
            self.take("catch")
            return TryCatch(body, self.block(), self.label())
        if self.dynamic and word == "spawned":
            self.take()
            return Spawned(self.block(), self.label())
        if self.dynamic and word == "dynat":
            self.take()
            place = self.paren_nat()
            return DynAt(place, self.block(), self.label())
        if tok[1] == "{":
            return self.block()
        # field assignment: expr "." ID "=" expr ";"
        lhs = self.expr()
        if not isinstance(lhs, Select):
            self.fail("expected a statement", tok)
        self.take("=")
        rhs = self.expr()
        self.take(";")
        return FieldAssign(lhs.target, lhs.field, rhs, self.label())

    def exc_set(self):
        self.take("[")
        names = []
        while not self.at("]"):
            tok = self.take(kind="id")
            if tok[1] not in EXCEPTIONS:
                self.fail(f"unknown exception {tok[1]!r}", tok)
            names.append(tok[1])
            if not self.at("]"):
                self.take(",")
        self.take("]")
        return frozenset(names)

    def paren_nat(self):
        self.take("(")
        n = int(self.take(kind="nat")[1])
        self.take(")")
        return n

    def ident(self):
        tok = self.take(kind="id")
        if tok[1] in KEYWORDS or tok[1] in EXCEPTIONS or (
                self.dynamic and tok[1] in DYNAMIC_KEYWORDS):
            self.fail(f"reserved word {tok[1]!r} used as identifier", tok)
        return tok[1]

    # expressions
    def expr(self):
        tok = self.peek()
        if tok[1] == "globalref":
            self.take()
            return GlobalRefOf(self.expr())
        if tok[1] == "valof":
            self.take()
            return ValOf(self.expr())
        return self.postfix()

    def postfix(self):
        e = self.primary()
        while self.at("."):
            self.take(".")
            e = Select(e, self.ident())
        return e

    def primary(self):
        tok = self.peek()
        if tok[1] == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if tok[1] == "{":
            self.take()
            fields = []
            while not self.at("}"):
                name = self.ident()
                self.take(":")
                fields.append((name, self.expr()))
                if not self.at("}"):
                    self.take(",")
            self.take("}")
            try:
                return ObjLit(tuple(fields))
            except ValueError as err:
                self.fail(str(err), tok)
        if tok[0] == "id" and tok[1] in EXCEPTIONS:
            self.take()
            return Exc(tok[1])
        if self.dynamic and tok[0] == "id" and tok[1] in ("o", "gr") and self.peek(1)[1] == "(":
            self.take()
            self.take("(")
            p = int(self.take(kind="nat")[1])
            self.take(",")
            n = int(self.take(kind="nat")[1])
            self.take(")")
            return Oid(p, n) if tok[1] == "o" else GlobalRef(Oid(p, n))
        if tok[0] == "id":
            return Var(self.ident())
        self.fail(f"expected an expression, found {tok[1] or 'end of input'!r}")


def check_scopes(s, bound=()):
    """Reject free variables, shadowing, and ``at`` bodies that capture."""
    bound = tuple(bound)

    def check_expr(e, scope):
        missing = expr_vars(e) - set(scope)
        if missing:
            raise ScopeError(f"free variable {sorted(missing)[0]!r}")

    def walk(t, scope):
        if isinstance(t, ValDecl):
            check_expr(t.expr, scope)
            if t.var in scope:
                raise ScopeError(f"variable {t.var!r} re-declared in its own scope")
            walk(t.body, scope + (t.var,))
        elif isinstance(t, FieldAssign):
            check_expr(t.target, scope)
            check_expr(t.value, scope)
        elif isinstance(t, At):
            check_expr(t.expr, scope)
            extra = free_vars(t.body) - {t.var}
            if extra:
                raise ScopeError(
                    f"at-body may only use its own variable {t.var!r}, not {sorted(extra)[0]!r}")
            walk(t.body, (t.var,))
        elif isinstance(t, AtSimple):
            if free_vars(t.body):
                raise ScopeError(
                    f"at-body without val cannot use {sorted(free_vars(t.body))[0]!r}")
            walk(t.body, ())
        elif isinstance(t, (Seq, TryCatch)):
            for c in ((t.first, t.second) if isinstance(t, Seq) else (t.body, t.handler)):
                walk(c, scope)
        elif isinstance(t, (Async, Finish, DynAt, Spawned)):
            walk(t.body, scope)

    walk(s, bound)


def parse_program(text: str, allow_dynamic: bool = False, first_label: int = 1):
    """Parse ``text`` into a statement with distinct labels starting at ``first_label``."""
    s = _Parser(text, allow_dynamic, first_label).program()
    check_scopes(s)
    return s


def parse_expr(text: str, allow_dynamic: bool = True):
    p = _Parser(text, allow_dynamic, 1)
    e = p.expr()
    p.take(kind="eof")
    return e
