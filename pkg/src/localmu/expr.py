"""Boolean expressions over finite-domain variables.

Expressions are parsed with bare names; :func:`resolve` decides which names are
variables and which are domain constants, and :func:`compile_expr` turns the
resolved tree into a closure over an integer-encoded valuation tuple.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union


class ExprError(ValueError):
    def __init__(self, message, span=None):
        super().__init__(message)
        self.span = span


@dataclass(frozen=True)
class Name:
    """Unresolved identifier (parser output)."""
    name: str


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class ConstRef:
    name: str


Operand = Union[Name, VarRef, ConstRef]


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class Cmp:
    op: str  # "==" or "!="
    left: Operand
    right: Operand


@dataclass(frozen=True)
class Not:
    arg: "Expr"


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


@dataclass(frozen=True)
class Exactly:
    """True iff exactly ``k`` of ``args`` hold."""
    k: int
    args: tuple


Expr = Union[BoolConst, Cmp, Not, And, Or, Exactly]

TRUE = BoolConst(True)
FALSE = BoolConst(False)


def mk_and(args):
    flat = []
    for a in args:
        if isinstance(a, And):
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def mk_or(args):
    flat = []
    for a in args:
        if isinstance(a, Or):
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def names(e) -> set:
    """Variable names referenced by a resolved expression."""
    out = set()

    def walk(x):
        if isinstance(x, Cmp):
            for side in (x.left, x.right):
                if isinstance(side, VarRef):
                    out.add(side.name)
        elif isinstance(x, Not):
            walk(x.arg)
        elif isinstance(x, (And, Or, Exactly)):
            for a in x.args:
                walk(a)

    walk(e)
    return out


def resolve(e, domains: Mapping[str, Sequence[str]], span=None):
    """Resolve bare names against ``domains`` (variable -> value list).

    Names bound in ``domains`` become variables, everything else must be a
    value of the domain on the other side of the comparison.
    """
    if isinstance(e, BoolConst):
        return e
    if isinstance(e, Not):
        return Not(resolve(e.arg, domains, span))
    if isinstance(e, And):
        return And(tuple(resolve(a, domains, span) for a in e.args))
    if isinstance(e, Or):
        return Or(tuple(resolve(a, domains, span) for a in e.args))
    if isinstance(e, Exactly):
        return Exactly(e.k, tuple(resolve(a, domains, span) for a in e.args))
    if isinstance(e, Cmp):
        left, right = _side(e.left, domains), _side(e.right, domains)
        if isinstance(left, ConstRef) and isinstance(right, ConstRef):
            raise ExprError(f"comparison of two constants {left.name!r} and {right.name!r}", span)
        if isinstance(left, VarRef) and isinstance(right, VarRef):
            if tuple(domains[left.name]) != tuple(domains[right.name]):
                raise ExprError(f"{left.name!r} and {right.name!r} have different domains", span)
        else:
            var, const = (left, right) if isinstance(left, VarRef) else (right, left)
            if const.name not in domains[var.name]:
                raise ExprError(f"unknown name {const.name!r} (not a variable, not a value of {var.name!r})", span)
        return Cmp(e.op, left, right)
    raise TypeError(e)


def _side(x, domains):
    name = x.name
    if isinstance(x, VarRef) or (isinstance(x, Name) and name in domains):
        if name not in domains:
            raise ExprError(f"unknown variable {name!r}")
        return VarRef(name)
    return ConstRef(name)


def compile_expr(e, slots: Mapping[str, int], domains: Mapping[str, Sequence[str]]) -> Callable:
    """Compile a resolved expression to ``f(values) -> bool``.

    ``values`` holds domain indices; ``slots`` maps variable names to
    positions in that tuple.
    """
    if isinstance(e, BoolConst):
        v = e.value
        return lambda vals: v
    if isinstance(e, Cmp):
        eq = e.op == "=="
        left, right = e.left, e.right
        if isinstance(left, VarRef) and isinstance(right, VarRef):
            i, j = slots[left.name], slots[right.name]
            if eq:
                return lambda vals: vals[i] == vals[j]
            return lambda vals: vals[i] != vals[j]
        var, const = (left, right) if isinstance(left, VarRef) else (right, left)
        i = slots[var.name]
        c = list(domains[var.name]).index(const.name)
        if eq:
            return lambda vals: vals[i] == c
        return lambda vals: vals[i] != c
    if isinstance(e, Not):
        f = compile_expr(e.arg, slots, domains)
        return lambda vals: not f(vals)
    if isinstance(e, And):
        fs = [compile_expr(a, slots, domains) for a in e.args]
        return lambda vals: all(f(vals) for f in fs)
    if isinstance(e, Or):
        fs = [compile_expr(a, slots, domains) for a in e.args]
        return lambda vals: any(f(vals) for f in fs)
    if isinstance(e, Exactly):
        fs = [compile_expr(a, slots, domains) for a in e.args]
        k = e.k
        return lambda vals: sum(1 for f in fs if f(vals)) == k
    raise TypeError(e)


def compile_partial(e, slots, domains) -> Callable:
    """Kleene three-valued version of :func:`compile_expr`.

    Unknown slots hold ``None``; the closure returns True, False or None.
    Used to prune partial global valuations against a network constraint.
    """
    if isinstance(e, BoolConst):
        v = e.value
        return lambda vals: v
    if isinstance(e, Cmp):
        eq = e.op == "=="
        left, right = e.left, e.right
        if isinstance(left, VarRef) and isinstance(right, VarRef):
            i, j = slots[left.name], slots[right.name]

            def f(vals):
                a, b = vals[i], vals[j]
                if a is None or b is None:
                    return None
                return (a == b) == eq
            return f
        var, const = (left, right) if isinstance(left, VarRef) else (right, left)
        i = slots[var.name]
        c = list(domains[var.name]).index(const.name)

        def g(vals):
            a = vals[i]
            if a is None:
                return None
            return (a == c) == eq
        return g
    if isinstance(e, Not):
        f = compile_partial(e.arg, slots, domains)

        def neg(vals):
            r = f(vals)
            return None if r is None else not r
        return neg
    if isinstance(e, (And, Or)):
        fs = [compile_partial(a, slots, domains) for a in e.args]
        dominant = isinstance(e, Or)  # value that decides the connective

        def conn(vals):
            unknown = False
            for f in fs:
                r = f(vals)
                if r is None:
                    unknown = True
                elif r == dominant:
                    return dominant
            return None if unknown else not dominant
        return conn
    if isinstance(e, Exactly):
        fs = [compile_partial(a, slots, domains) for a in e.args]
        k = e.k

        def exactly(vals):
            yes = unknown = 0
            for f in fs:
                r = f(vals)
                if r is None:
                    unknown += 1
                elif r:
                    yes += 1
            if yes > k or yes + unknown < k:
                return False
            if unknown == 0:
                return True
            return None
        return exactly
    raise TypeError(e)


_PREC = {Or: 1, And: 2, Not: 3}


def to_text(e, parent: int = 0) -> str:
    """Render in the concrete syntax accepted by the model parser."""
    if isinstance(e, BoolConst):
        return "true" if e.value else "false"
    if isinstance(e, Cmp):
        return f"{e.left.name} {e.op} {e.right.name}"
    if isinstance(e, Exactly):
        inner = ", ".join(to_text(a) for a in e.args)
        if e.k == 1:
            return f"exactly_one({inner})"
        return f"exactly({e.k}, {inner})"
    if isinstance(e, Not):
        return "!" + to_text(e.arg, 3)
    prec = _PREC[type(e)]
    sep = " && " if isinstance(e, And) else " || "
    s = sep.join(to_text(a, prec + 1) for a in e.args)
    return f"({s})" if prec < parent else s


def evaluate(e, env: Mapping[str, str]) -> bool:
    """Reference evaluator over a name -> value-name environment."""
    if isinstance(e, BoolConst):
        return e.value
    if isinstance(e, Cmp):
        def val(x):
            return env[x.name] if isinstance(x, VarRef) else x.name
        same = val(e.left) == val(e.right)
        return same if e.op == "==" else not same
    if isinstance(e, Not):
        return not evaluate(e.arg, env)
    if isinstance(e, And):
        return all(evaluate(a, env) for a in e.args)
    if isinstance(e, Or):
        return any(evaluate(a, env) for a in e.args)
    if isinstance(e, Exactly):
        return sum(evaluate(a, env) for a in e.args) == e.k
    raise TypeError(e)
