"""Local mu-calculus: formulas, derived operators and fixpoint evaluation.

The core connectives are propositions, variables, negation, conjunction,
``E[phi U_a psi]`` and ``mu``. Everything else (``||``, ``->``, ``A[. W_a .]``,
``nu``, and the label-set modalities AG/AF/EF/EG) is sugar that
:func:`expand_derived` rewrites into the core.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import count
from typing import Mapping, Optional

TAU = "tau"
ANY = "any"


class FormulaError(ValueError):
    pass


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Prop:
    name: str
    # resolved predicate for inline comparisons such as ``state == E``
    expr: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class Implies:
    left: object
    right: object


@dataclass(frozen=True)
class EU:
    phi: object
    label: str
    psi: object


@dataclass(frozen=True)
class AW:
    phi: object
    label: str
    psi: object


@dataclass(frozen=True)
class Mu:
    var: str
    body: object


@dataclass(frozen=True)
class Nu:
    var: str
    body: object


@dataclass(frozen=True)
class Modal:
    """AG / AF / EF / EG over a label set; ``labels=None`` means all labels."""
    op: str
    labels: Optional[tuple]
    arg: object


TRUE = Const(True)
FALSE = Const(False)
MODAL_OPS = ("AG", "AF", "EF", "EG")


def conj(items):
    items = list(items)
    if not items:
        return TRUE
    out = items[0]
    for x in items[1:]:
        out = And(out, x)
    return out


def disj(items):
    items = list(items)
    if not items:
        return FALSE
    out = items[0]
    for x in items[1:]:
        out = Or(out, x)
    return out


def children(f):
    if isinstance(f, (Not, Modal)):
        return (f.arg,)
    if isinstance(f, (And, Or, Implies)):
        return (f.left, f.right)
    if isinstance(f, (EU, AW)):
        return (f.phi, f.psi)
    if isinstance(f, (Mu, Nu)):
        return (f.body,)
    return ()


def subformulas(f):
    yield f
    for c in children(f):
        yield from subformulas(c)


def props_of(f) -> dict:
    """Propositions used by ``f``: name -> inline predicate (or None)."""
    return {g.name: g.expr for g in subformulas(f) if isinstance(g, Prop)}


def labels_of(f) -> set:
    out = set()
    for g in subformulas(f):
        if isinstance(g, (EU, AW)):
            out.add(g.label)
        elif isinstance(g, Modal) and g.labels:
            out.update(g.labels)
    return out


def free_vars(f, bound=frozenset()):
    if isinstance(f, Var):
        return set() if f.name in bound else {f.name}
    if isinstance(f, (Mu, Nu)):
        return free_vars(f.body, bound | {f.var})
    out = set()
    for c in children(f):
        out |= free_vars(c, bound)
    return out


def bound_vars(f):
    return {g.var for g in subformulas(f) if isinstance(g, (Mu, Nu))}


def check_monotone(f):
    """Raise unless every bound variable occurs under an even number of negations."""

    def walk(g, polarity):
        if isinstance(g, Var):
            if g.name in polarity and polarity[g.name] % 2:
                raise FormulaError(f"{g.name} occurs negatively; fixpoint body is not monotone")
            return
        if isinstance(g, Not):
            walk(g.arg, {k: v + 1 for k, v in polarity.items()})
        elif isinstance(g, Implies):
            walk(g.left, {k: v + 1 for k, v in polarity.items()})
            walk(g.right, polarity)
        elif isinstance(g, (Mu, Nu)):
            inner = dict(polarity)
            inner[g.var] = 0
            walk(g.body, inner)
        else:
            for c in children(g):
                walk(c, polarity)

    walk(f, {})


def substitute(f, name, repl):
    """Replace free occurrences of variable ``name`` by ``repl``."""
    if isinstance(f, Var):
        return repl if f.name == name else f
    if isinstance(f, (Mu, Nu)):
        if f.var == name:
            return f
        return type(f)(f.var, substitute(f.body, name, repl))
    if isinstance(f, Not):
        return Not(substitute(f.arg, name, repl))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(substitute(f.left, name, repl), substitute(f.right, name, repl))
    if isinstance(f, (EU, AW)):
        return type(f)(substitute(f.phi, name, repl), f.label, substitute(f.psi, name, repl))
    if isinstance(f, Modal):
        return Modal(f.op, f.labels, substitute(f.arg, name, repl))
    return f


def rename_apart(f):
    """Alpha-rename so that no binder shadows an enclosing binder of the same name."""

    def walk(g, scope, used):
        if isinstance(g, (Mu, Nu)):
            v = g.var
            if v in scope:
                k = 1
                while f"{v}_{k}" in used:
                    k += 1
                new = f"{v}_{k}"
                used.add(new)
                body = substitute(g.body, v, Var(new))
                return type(g)(new, walk(body, scope | {new}, used))
            used.add(v)
            return type(g)(v, walk(g.body, scope | {v}, used))
        if isinstance(g, Not):
            return Not(walk(g.arg, scope, used))
        if isinstance(g, (And, Or, Implies)):
            return type(g)(walk(g.left, scope, used), walk(g.right, scope, used))
        if isinstance(g, (EU, AW)):
            return type(g)(walk(g.phi, scope, used), g.label, walk(g.psi, scope, used))
        if isinstance(g, Modal):
            return Modal(g.op, g.labels, walk(g.arg, scope, used))
        return g

    return walk(f, frozenset(), set(bound_vars(f)))


class _Fresh:
    def __init__(self, f):
        self.taken = bound_vars(f) | free_vars(f)
        self.counter = count()

    def __call__(self):
        while True:
            name = f"Z{next(self.counter)}"
            if name not in self.taken:
                self.taken.add(name)
                return name


def expand_derived(f, labels=None):
    """Rewrite into core connectives (Const, Prop, Var, Not, And, EU, Mu).

    ``labels`` is the non-tau label alphabet used for label-set defaults and
    the ``any`` label; when omitted, a single symbolic label ``any`` stands in
    (enough for syntactic classification).
    """
    alphabet = tuple(labels) if labels is not None else (ANY,)
    if not alphabet:
        raise FormulaError("empty label set")
    fresh = _Fresh(f)

    def label_set(ls):
        if ls is None:
            return alphabet
        if not ls:
            raise FormulaError("empty label set")
        return tuple(ls)

    def eu(phi, a, psi):
        if a == ANY and labels is not None:
            return _core_disj(EU(phi, b, psi) for b in alphabet)
        return EU(phi, a, psi)

    def nu(var, body):
        # nu Z. body == not mu Z. not body[Z := not Z]
        return Not(Mu(var, Not(substitute(body, var, Not(Var(var))))))

    def ex(g):
        if isinstance(g, (Const, Prop, Var)):
            return g
        if isinstance(g, Not):
            return Not(ex(g.arg))
        if isinstance(g, And):
            return And(ex(g.left), ex(g.right))
        if isinstance(g, Or):
            return Not(And(Not(ex(g.left)), Not(ex(g.right))))
        if isinstance(g, Implies):
            return Not(And(ex(g.left), Not(ex(g.right))))
        if isinstance(g, EU):
            return eu(ex(g.phi), g.label, ex(g.psi))
        if isinstance(g, AW):
            return Not(eu(Not(ex(g.phi)), g.label, Not(ex(g.psi))))
        if isinstance(g, Mu):
            return Mu(g.var, ex(g.body))
        if isinstance(g, Nu):
            return nu(g.var, ex(g.body))
        if isinstance(g, Modal):
            ls = label_set(g.labels)
            arg = ex(g.arg)
            z = fresh()
            if g.op == "EF":
                return Mu(z, _or(arg, _core_disj(eu(TRUE, a, Var(z)) for a in ls)))
            if g.op == "AG":
                return nu(z, And(arg, conj(Not(eu(TRUE, a, Not(Var(z)))) for a in ls)))
            if g.op == "EG":
                return nu(z, And(arg, _core_disj(eu(arg, a, Var(z)) for a in ls)))
            if g.op == "AF":
                neg = Not(arg)
                return Not(nu(z, And(neg, _core_disj(eu(neg, a, Var(z)) for a in ls))))
        raise TypeError(g)

    return ex(f)


def _or(a, b):
    return Not(And(Not(a), Not(b)))


def _core_disj(items):
    items = list(items)
    out = items[0]
    for g in items[1:]:
        out = _or(out, g)
    return out


def to_nnf(f, labels=None):
    """Negation normal form: negations only on propositions and constants."""
    core = expand_derived(f, labels)

    def pos(g):
        if isinstance(g, (Const, Prop, Var)):
            return g
        if isinstance(g, Not):
            return neg(g.arg)
        if isinstance(g, And):
            return And(pos(g.left), pos(g.right))
        if isinstance(g, EU):
            return EU(pos(g.phi), g.label, pos(g.psi))
        if isinstance(g, Mu):
            return Mu(g.var, pos(g.body))
        raise TypeError(g)

    def neg(g):
        if isinstance(g, Const):
            return Const(not g.value)
        if isinstance(g, Prop):
            return Not(g)
        if isinstance(g, Var):
            # only reachable through the Z := not Z substitution of a dual
            return Not(g)
        if isinstance(g, Not):
            return pos(g.arg)
        if isinstance(g, And):
            return Or(neg(g.left), neg(g.right))
        if isinstance(g, EU):
            return AW(neg(g.phi), g.label, neg(g.psi))
        if isinstance(g, Mu):
            return Nu(g.var, neg(substitute(g.body, g.var, Not(Var(g.var)))))
        raise TypeError(g)

    return pos(core)


def is_universal(f) -> bool:
    return not any(isinstance(g, EU) for g in subformulas(to_nnf(f)))


# -- evaluation ---------------------------------------------------------------

def evaluate(f, lts, env: Optional[Mapping[str, frozenset]] = None) -> frozenset:
    """States of ``lts`` satisfying ``f`` under ``env`` (variable -> state set)."""
    env = dict(env or {})
    core = expand_derived(f, lts.alphabet)
    all_states = frozenset(range(lts.size))
    cache = {}

    def ev(g, env):
        if isinstance(g, Const):
            return all_states if g.value else frozenset()
        if isinstance(g, Prop):
            if g.expr is not None and hasattr(lts, "expr_states"):
                return lts.expr_states(g.expr)
            if g.name not in lts.props:
                raise EvaluationError(f"unknown proposition {g.name!r}")
            return lts.prop_states(g.name)
        if isinstance(g, Var):
            if g.name not in env:
                raise EvaluationError(f"unbound variable {g.name!r}")
            return env[g.name]
        if isinstance(g, Not):
            return all_states - ev(g.arg, env)
        if isinstance(g, And):
            left = ev(g.left, env)
            if not left:
                return left
            return left & ev(g.right, env)
        if isinstance(g, EU):
            if g.label == TAU or g.label not in lts.alphabet:
                raise EvaluationError(f"unknown label {g.label!r}")
            key = None
            if not (free_vars(g) & set(env)):
                key = g
                if key in cache:
                    return cache[key]
            res = eu_states(lts, ev(g.phi, env), g.label, ev(g.psi, env))
            if key is not None:
                cache[key] = res
            return res
        if isinstance(g, Mu):
            x = frozenset()
            while True:
                inner = dict(env)
                inner[g.var] = x
                y = ev(g.body, inner)
                if y == x:
                    return x
                x = y
        raise TypeError(g)

    return ev(core, env)


def eu_states(lts, phi: frozenset, label: str, psi: frozenset) -> frozenset:
    """Least X with X = phi & (pre_label(psi) | pre_tau(X))."""
    pre_a = lts.pre(label)
    pre_t = lts.pre(TAU)
    result = set()
    stack = []
    for t in psi:
        for s in pre_a[t]:
            if s in phi and s not in result:
                result.add(s)
                stack.append(s)
    while stack:
        t = stack.pop()
        for s in pre_t[t]:
            if s in phi and s not in result:
                result.add(s)
                stack.append(s)
    return frozenset(result)


def holds(f, lts) -> bool:
    """True iff every initial state satisfies the closed formula ``f``."""
    if free_vars(f):
        raise EvaluationError(f"formula has free variables {sorted(free_vars(f))}")
    if not lts.initial:
        raise EvaluationError("transition system has no initial states")
    return lts.initial <= evaluate(f, lts)


# -- surface syntax -------------------------------------------------------------

def to_text(f, parent=0) -> str:
    """Render in the concrete formula syntax (round-trips through the parser)."""
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, (Prop, Var)):
        return f.name
    if isinstance(f, Not):
        return "!" + to_text(f.arg, 5)
    if isinstance(f, Modal):
        ls = "" if f.labels is None else "[" + ",".join(f.labels) + "]"
        s = f"{f.op}{ls} {to_text(f.arg, 5)}"
        return f"({s})" if parent > 5 else s
    if isinstance(f, EU):
        return f"E[{to_text(f.phi, 1)} U[{f.label}] {to_text(f.psi, 1)}]"
    if isinstance(f, AW):
        return f"A[{to_text(f.phi, 1)} W[{f.label}] {to_text(f.psi, 1)}]"
    if isinstance(f, (Mu, Nu)):
        kw = "mu" if isinstance(f, Mu) else "nu"
        s = f"{kw} {f.var}. {to_text(f.body)}"
        return f"({s})" if parent > 0 else s
    if isinstance(f, Implies):
        s = f"{to_text(f.left, 2)} -> {to_text(f.right, 1)}"
        return f"({s})" if parent > 1 else s
    if isinstance(f, Or):
        s = f"{to_text(f.left, 2)} || {to_text(f.right, 3)}"
        return f"({s})" if parent > 2 else s
    if isinstance(f, And):
        s = f"{to_text(f.left, 3)} && {to_text(f.right, 4)}"
        return f"({s})" if parent > 3 else s
    raise TypeError(f)
