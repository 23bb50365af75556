"""Abstract syntax of TX10: values, expressions, static and runtime statements.

Every statement node carries an integer ``label`` identifying the source
statement it descends from.  Labels are compared as part of node equality,
so two configurations that differ only in provenance are distinct; use
:func:`erase_labels` when provenance is irrelevant.
"""
from __future__ import annotations

import operator
from dataclasses import dataclass, field, replace
from typing import Iterator, Union

EXCEPTIONS = ("E", "BF", "BG", "DP")

# label shared by the nodes of the implicit program wrapper
WRAPPER_LABEL = 0


def _fields(obj):
    return tuple(getattr(obj, f) for f in obj.__dataclass_fields__)


def _cached_hash(self):
    h = self.__dict__.get("_hash")
    if h is None:
        h = hash((self.__class__.__name__,) + self._key(self))
        object.__setattr__(self, "_hash", h)
    return h


def _fast_eq(self, other):
    if self is other:
        return True
    if other.__class__ is not self.__class__:
        return NotImplemented
    if hash(self) != hash(other):
        return False
    return self._key(self) == self._key(other)


def node(cls):
    """Frozen dataclass with a memoized hash; syntax trees are hashed a lot."""
    cls = dataclass(frozen=True)(cls)
    names = tuple(cls.__dataclass_fields__)
    # attrgetter returns a bare value for one name; keep it a tuple
    getter = operator.attrgetter(*names) if len(names) > 1 else None
    if len(names) == 1:
        name = names[0]
        cls._key = staticmethod(lambda o: (getattr(o, name),))
    elif not names:
        cls._key = staticmethod(lambda o: ())
    else:
        cls._key = staticmethod(getter)
    cls.__hash__ = _cached_hash
    cls.__eq__ = _fast_eq
    return cls


# ---------------------------------------------------------------- values

@dataclass(frozen=True, order=True)
class Oid:
    place: int
    serial: int

    def __str__(self):
        return f"o({self.place},{self.serial})"


@dataclass(frozen=True, order=True)
class GlobalRef:
    oid: Oid

    @property
    def home(self) -> int:
        return self.oid.place

    def __str__(self):
        return f"gr({self.oid.place},{self.oid.serial})"


@dataclass(frozen=True, order=True)
class Exc:
    name: str

    def __post_init__(self):
        if self.name not in EXCEPTIONS:
            raise ValueError(f"unknown exception constant {self.name!r}")

    def __str__(self):
        return self.name


Value = Union[Oid, GlobalRef, Exc]
VALUE_TYPES = (Oid, GlobalRef, Exc)


def is_value(e) -> bool:
    return isinstance(e, VALUE_TYPES)


# ----------------------------------------------------------- expressions

@node
class Var:
    name: str


@node
class Select:
    target: "Expr"
    field: str


@node
class ObjLit:
    fields: tuple  # ((name, Expr), ...) in written order

    def __post_init__(self):
        names = [f for f, _ in self.fields]
        if len(names) != len(set(names)):
            raise ValueError(f"duplicate field in object literal: {names}")


@node
class GlobalRefOf:
    expr: "Expr"


@node
class ValOf:
    expr: "Expr"


Expr = Union[Oid, GlobalRef, Exc, Var, Select, ObjLit, GlobalRefOf, ValOf]


# ------------------------------------------------------------ statements

@node
class Skip:
    label: int = 0


@node
class Throw:
    value: Exc
    label: int = 0


@node
class ValDecl:
    var: str
    expr: Expr
    body: "Stmt"
    label: int = 0


@node
class FieldAssign:
    target: Expr
    field: str
    value: Expr
    label: int = 0


@node
class Seq:
    first: "Stmt"
    second: "Stmt"
    label: int = 0


@node
class At:
    place: int
    var: str
    expr: Expr
    body: "Stmt"
    label: int = 0


@node
class AtSimple:
    place: int
    body: "Stmt"
    label: int = 0


@node
class Async:
    body: "Stmt"
    label: int = 0


@node
class Finish:
    mu: frozenset = field(default=frozenset())
    body: "Stmt" = None
    label: int = 0


@node
class TryCatch:
    body: "Stmt"
    handler: "Stmt"
    label: int = 0


# runtime-only forms

@node
class DynAt:
    place: int
    body: "Stmt"
    label: int = 0


@node
class Spawned:
    body: "Stmt"
    label: int = 0


Stmt = Union[Skip, Throw, ValDecl, FieldAssign, Seq, At, AtSimple, Async,
             Finish, TryCatch, DynAt, Spawned]

DYNAMIC_TYPES = (DynAt, Spawned)
# statements that execute at the current place when activated
BASIC_TYPES = (Skip, Throw, ValDecl, FieldAssign, Async, At, AtSimple)


def finish(body, mu=frozenset(), label=0) -> Finish:
    return Finish(frozenset(mu), body, label)


# -------------------------------------------------------- classification

def is_async(s) -> bool:
    """Spawned activities and compositions made only of them."""
    if isinstance(s, Spawned):
        return True
    if isinstance(s, (DynAt, TryCatch)):
        return is_async(s.body)
    if isinstance(s, Seq):
        return is_async(s.first) and is_async(s.second)
    return False


def is_sync(s) -> bool:
    if isinstance(s, (Skip, Throw, ValDecl, FieldAssign, At, AtSimple,
                      Async, Finish)):
        return True
    if isinstance(s, Seq):
        return is_sync(s.first) or is_sync(s.second)
    if isinstance(s, (DynAt, TryCatch)):
        return is_sync(s.body)
    return False


def classify(s) -> str:
    return "Async" if is_async(s) else "Sync"


def children(s) -> tuple:
    if isinstance(s, Seq):
        return (s.first, s.second)
    if isinstance(s, TryCatch):
        return (s.body, s.handler)
    if isinstance(s, (ValDecl, At, AtSimple, Async, Finish, DynAt, Spawned)):
        return (s.body,)
    return ()


def subterms(s) -> Iterator:
    yield s
    for c in children(s):
        yield from subterms(c)


def no_async(s) -> bool:
    return not any(isinstance(t, (Async, Spawned)) for t in subterms(s))


def is_local(s) -> bool:
    return not any(isinstance(t, DynAt) for t in subterms(s))


def is_remote(s, p: int) -> bool:
    """Every basic statement of ``s`` sits under some ``DynAt(q, .)`` with q != p."""
    def ok(t, under_remote):
        if isinstance(t, DynAt):
            # the innermost DynAt decides where the body runs
            under_remote = t.place != p
        elif isinstance(t, BASIC_TYPES) and not under_remote:
            return False
        return all(ok(c, under_remote) for c in children(t))

    return ok(s, False)


def resilience_predicates(s, p: int) -> dict:
    return {"noAsync": no_async(s), "isLocal": is_local(s),
            "isRemote": is_remote(s, p)}


# ----------------------------------------------------------- substitution

def subst_expr(e, x: str, v):
    if isinstance(e, Var):
        return v if e.name == x else e
    if isinstance(e, Select):
        return Select(subst_expr(e.target, x, v), e.field)
    if isinstance(e, ObjLit):
        return ObjLit(tuple((f, subst_expr(fe, x, v)) for f, fe in e.fields))
    if isinstance(e, GlobalRefOf):
        return GlobalRefOf(subst_expr(e.expr, x, v))
    if isinstance(e, ValOf):
        return ValOf(subst_expr(e.expr, x, v))
    return e


def substitute(s, x: str, v):
    """``s[v/x]``; labels are preserved."""
    if isinstance(s, (Skip, Throw)):
        return s
    if isinstance(s, ValDecl):
        body = s.body if s.var == x else substitute(s.body, x, v)
        return replace(s, expr=subst_expr(s.expr, x, v), body=body)
    if isinstance(s, FieldAssign):
        return replace(s, target=subst_expr(s.target, x, v),
                       value=subst_expr(s.value, x, v))
    if isinstance(s, Seq):
        return replace(s, first=substitute(s.first, x, v),
                       second=substitute(s.second, x, v))
    if isinstance(s, At):
        body = s.body if s.var == x else substitute(s.body, x, v)
        return replace(s, expr=subst_expr(s.expr, x, v), body=body)
    if isinstance(s, TryCatch):
        return replace(s, body=substitute(s.body, x, v),
                       handler=substitute(s.handler, x, v))
    return replace(s, body=substitute(s.body, x, v))


def expr_vars(e) -> set:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Select):
        return expr_vars(e.target)
    if isinstance(e, ObjLit):
        out = set()
        for _, fe in e.fields:
            out |= expr_vars(fe)
        return out
    if isinstance(e, (GlobalRefOf, ValOf)):
        return expr_vars(e.expr)
    return set()


def free_vars(s) -> set:
    if isinstance(s, (Skip, Throw)):
        return set()
    if isinstance(s, ValDecl):
        return expr_vars(s.expr) | (free_vars(s.body) - {s.var})
    if isinstance(s, FieldAssign):
        return expr_vars(s.target) | expr_vars(s.value)
    if isinstance(s, At):
        return expr_vars(s.expr) | (free_vars(s.body) - {s.var})
    out = set()
    for c in children(s):
        out |= free_vars(c)
    return out


# ---------------------------------------------------- evaluation contexts

def active_subterms(s) -> Iterator:
    """Substatements ``s1`` with ``s = E[s1]`` for some evaluation context E."""
    yield s
    if isinstance(s, Seq):
        yield from active_subterms(s.first)
        if is_async(s.first):
            yield from active_subterms(s.second)
    elif isinstance(s, (DynAt, Spawned, Finish)):
        yield from active_subterms(s.body)
    elif isinstance(s, TryCatch):
        yield from active_subterms(s.body)


def active_labels(s) -> frozenset:
    return frozenset(t.label for t in active_subterms(s))


def labels(s) -> frozenset:
    return frozenset(t.label for t in subterms(s))


def erase_labels(s):
    if isinstance(s, (Skip, Throw, FieldAssign)):
        return replace(s, label=0)
    if isinstance(s, Seq):
        return Seq(erase_labels(s.first), erase_labels(s.second))
    if isinstance(s, TryCatch):
        return TryCatch(erase_labels(s.body), erase_labels(s.handler))
    return replace(s, body=erase_labels(s.body), label=0)


# --------------------------------------------------------------- values in terms

def expr_values(e) -> Iterator:
    if is_value(e):
        yield e
    elif isinstance(e, Select):
        yield from expr_values(e.target)
    elif isinstance(e, ObjLit):
        for _, fe in e.fields:
            yield from expr_values(fe)
    elif isinstance(e, (GlobalRefOf, ValOf)):
        yield from expr_values(e.expr)


def stmt_values(s) -> Iterator:
    """Values occurring in ``s`` in left-to-right order."""
    if isinstance(s, Throw):
        yield s.value
    elif isinstance(s, ValDecl):
        yield from expr_values(s.expr)
    elif isinstance(s, FieldAssign):
        yield from expr_values(s.target)
        yield from expr_values(s.value)
    elif isinstance(s, At):
        yield from expr_values(s.expr)
    for c in children(s):
        yield from stmt_values(c)


def placed_values(s, here: int) -> Iterator:
    """Pairs ``(place, value)``: each value with the place it is evaluated at.

    Bodies of ``at``/``DynAt`` are evaluated at the target place; the
    value expression of an ``at`` is evaluated at the enclosing place.
    """
    if isinstance(s, Throw):
        yield here, s.value
    elif isinstance(s, ValDecl):
        for v in expr_values(s.expr):
            yield here, v
    elif isinstance(s, FieldAssign):
        for v in expr_values(s.target):
            yield here, v
        for v in expr_values(s.value):
            yield here, v
    elif isinstance(s, At):
        for v in expr_values(s.expr):
            yield here, v
    inner = s.place if isinstance(s, (At, AtSimple, DynAt)) else here
    for c in children(s):
        yield from placed_values(c, inner)


def map_values_expr(e, fn):
    if is_value(e):
        return fn(e)
    if isinstance(e, Select):
        return Select(map_values_expr(e.target, fn), e.field)
    if isinstance(e, ObjLit):
        return ObjLit(tuple((f, map_values_expr(fe, fn)) for f, fe in e.fields))
    if isinstance(e, GlobalRefOf):
        return GlobalRefOf(map_values_expr(e.expr, fn))
    if isinstance(e, ValOf):
        return ValOf(map_values_expr(e.expr, fn))
    return e


def map_values(s, fn):
    """Rebuild ``s`` applying ``fn`` to every value occurrence."""
    if isinstance(s, Skip):
        return s
    if isinstance(s, Throw):
        return s
    if isinstance(s, ValDecl):
        return replace(s, expr=map_values_expr(s.expr, fn), body=map_values(s.body, fn))
    if isinstance(s, FieldAssign):
        return replace(s, target=map_values_expr(s.target, fn),
                       value=map_values_expr(s.value, fn))
    if isinstance(s, At):
        return replace(s, expr=map_values_expr(s.expr, fn), body=map_values(s.body, fn))
    if isinstance(s, Seq):
        return replace(s, first=map_values(s.first, fn), second=map_values(s.second, fn))
    if isinstance(s, TryCatch):
        return replace(s, body=map_values(s.body, fn), handler=map_values(s.handler, fn))
    return replace(s, body=map_values(s.body, fn))


def is_static(s) -> bool:
    for t in subterms(s):
        if isinstance(t, DYNAMIC_TYPES):
            return False
        if isinstance(t, Finish) and t.mu:
            return False
    return True


def size(s) -> int:
    return sum(1 for _ in subterms(s))


# --------------------------------------------------------- pretty printing

def show_expr(e) -> str:
    if is_value(e):
        return str(e)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Select):
        inner = show_expr(e.target)
        if isinstance(e.target, (GlobalRefOf, ValOf)):
            inner = f"({inner})"
        return f"{inner}.{e.field}"
    if isinstance(e, ObjLit):
        return "{" + ", ".join(f"{f}: {show_expr(fe)}" for f, fe in e.fields) + "}"
    if isinstance(e, GlobalRefOf):
        return f"globalref {show_expr(e.expr)}"
    if isinstance(e, ValOf):
        return f"valof {show_expr(e.expr)}"
    raise TypeError(e)


def _block(s) -> str:
    items = []
    while isinstance(s, Seq):
        items.append(show(s.first))
        s = s.second
    items.append(show(s))
    return "{ " + " ".join(items) + " }"


def _body(s) -> str:
    """Render ``s`` as a block; a lone Seq is already a block."""
    if isinstance(s, Seq):
        return _block(s)
    return "{ " + show(s) + " }"


def show(s) -> str:
    """Surface syntax; runtime forms use the extended keywords of the parser."""
    if isinstance(s, Skip):
        return "skip;"
    if isinstance(s, Throw):
        return f"throw {s.value};"
    if isinstance(s, ValDecl):
        return f"val {s.var} = {show_expr(s.expr)} in {_body(s.body)}"
    if isinstance(s, FieldAssign):
        target = show_expr(s.target)
        if isinstance(s.target, (GlobalRefOf, ValOf)):
            target = f"({target})"
        return f"{target}.{s.field} = {show_expr(s.value)};"
    if isinstance(s, Seq):
        return _block(s)
    if isinstance(s, At):
        return f"at ({s.place}) val {s.var} = {show_expr(s.expr)} {_body(s.body)}"
    if isinstance(s, AtSimple):
        return f"at ({s.place}) {_body(s.body)}"
    if isinstance(s, Async):
        return f"async {_body(s.body)}"
    if isinstance(s, Finish):
        if s.mu:
            return f"finish[{','.join(sorted(s.mu))}] {_body(s.body)}"
        return f"finish {_body(s.body)}"
    if isinstance(s, TryCatch):
        return f"try {_body(s.body)} catch {_body(s.handler)}"
    if isinstance(s, DynAt):
        return f"dynat ({s.place}) {_body(s.body)}"
    if isinstance(s, Spawned):
        return f"spawned {_body(s.body)}"
    raise TypeError(s)
