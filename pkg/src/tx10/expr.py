"""Expression evaluation (one deterministic step at a time)."""
from __future__ import annotations

from dataclasses import dataclass

from .heap import LocalHeap, fresh_oids, record, record_get, record_has
from .syntax import (Exc, GlobalRef, GlobalRefOf, ObjLit, Oid, Select, ValOf,
                     Var, is_value)


@dataclass(frozen=True)
class Step:
    expr: object
    heap: LocalHeap
    rule: str


@dataclass(frozen=True)
class Thrown:
    exc: Exc
    rule: str


@dataclass(frozen=True)
class AlreadyValue:
    pass


ALREADY_VALUE = AlreadyValue()


def _bad_field():
    return Thrown(Exc("BF"), "Select Bad")


def eval_step(e, h: LocalHeap, p: int):
    if is_value(e):
        return ALREADY_VALUE
    if isinstance(e, Var):
        raise ValueError(f"free variable {e.name!r} during evaluation")

    if isinstance(e, ObjLit):
        for i, (f, fe) in enumerate(e.fields):
            if not is_value(fe):
                out = eval_step(fe, h, p)
                if isinstance(out, Thrown):
                    return out
                fields = e.fields[:i] + ((f, out.expr),) + e.fields[i + 1:]
                return Step(ObjLit(fields), out.heap, f"Exp Ctx/{out.rule}")
        [o] = fresh_oids(h, p, 1)
        return Step(o, h.put(o, record(dict(e.fields))), "New Obj")

    inner = e.target if isinstance(e, Select) else e.expr
    if not is_value(inner):
        out = eval_step(inner, h, p)
        if isinstance(out, Thrown):
            return out
        if isinstance(e, Select):
            return Step(Select(out.expr, e.field), out.heap, f"Exp Ctx/{out.rule}")
        return Step(type(e)(out.expr), out.heap, f"Exp Ctx/{out.rule}")

    if isinstance(e, Select):
        if not isinstance(inner, Oid) or inner not in h:
            return _bad_field()
        r = h[inner]
        if not record_has(r, e.field):
            return _bad_field()
        return Step(record_get(r, e.field), h, "Select")
    if isinstance(e, GlobalRefOf):
        if isinstance(inner, Oid) and inner.place == p and inner in h:
            return Step(GlobalRef(inner), h, "New Global Ref")
        return Thrown(Exc("BG"), "New Global Ref Bad")
    if isinstance(e, ValOf):
        if isinstance(inner, GlobalRef) and inner.home == p:
            return Step(inner.oid, h, "Valof")
        return Thrown(Exc("BG"), "Valof Bad")
    raise TypeError(e)


def eval_full(e, h: LocalHeap, p: int):
    """Iterate :func:`eval_step`; returns ``("value", v, h)`` or ``("thrown", exc, h)``."""
    while True:
        out = eval_step(e, h, p)
        if out is ALREADY_VALUE:
            return ("value", e, h)
        if isinstance(out, Thrown):
            return ("thrown", out.exc, h)
        e, h = out.expr, out.heap
