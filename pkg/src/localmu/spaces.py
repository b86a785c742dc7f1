"""Labeled transition systems: local spaces H_n and node-relative global spaces G_n."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional

from .model import (LocalState, ModelError, ProcessNetwork, global_successors, interference_successors,
                    is_joint, reachable, step_successors)
from .mucalc import TAU

SELF = "self"


@dataclass(frozen=True, eq=False)
class LabeledTS:
    """States are integer ids; ``payloads[i]`` is the LocalState or GlobalState behind id ``i``."""
    payloads: tuple
    initial: frozenset
    transitions: frozenset  # {(src, label, dst)}
    alphabet: tuple  # visible labels
    labeling: tuple  # per state: frozenset of proposition names
    props: frozenset = frozenset()
    template: object = field(default=None, repr=False)
    local_values: Optional[tuple] = field(default=None, repr=False)  # per state, values of the observed node
    totalized: tuple = ()
    node: Optional[str] = None

    @classmethod
    def from_edges(cls, size, initial, transitions, props=None, alphabet=None):
        """Plain LTS over ids ``0..size-1``; ``props`` maps names to state sets."""
        props = {k: frozenset(v) for k, v in (props or {}).items()}
        labels = tuple(frozenset(p for p, ss in props.items() if i in ss) for i in range(size))
        trans = frozenset(transitions)
        if alphabet is None:
            alphabet = tuple(sorted({a for _, a, _ in trans if a != TAU}))
        return cls(tuple(range(size)), frozenset(initial), trans, tuple(alphabet), labels, frozenset(props))

    @property
    def size(self):
        return len(self.payloads)

    @cached_property
    def index(self):
        return {p: i for i, p in enumerate(self.payloads)}

    @cached_property
    def succ(self):
        out = [[] for _ in range(self.size)]
        for s, a, t in sorted(self.transitions, key=repr):
            out[s].append((a, t))
        return out

    @cached_property
    def _pre(self):
        out = {}
        for s, a, t in self.transitions:
            out.setdefault(a, [[] for _ in range(self.size)])[t].append(s)
        return out

    def pre(self, label):
        """Predecessor lists indexed by target state."""
        got = self._pre.get(label)
        return got if got is not None else [[] for _ in range(self.size)]

    def prop_states(self, name) -> frozenset:
        return frozenset(i for i, ls in enumerate(self.labeling) if name in ls)

    def expr_states(self, e) -> frozenset:
        if self.template is None or self.local_values is None:
            raise ModelError("inline propositions need a template-backed space")
        f = self.template.compile(e)
        return frozenset(i for i, v in enumerate(self.local_values) if f(v))

    def deadlocks(self):
        return [i for i in range(self.size) if not self.succ[i]]

    def label_counts(self):
        out = {}
        for _, a, _ in self.transitions:
            out[a] = out.get(a, 0) + 1
        return out

    def dump(self, describe=str) -> str:
        """Transition lines ``src label dst`` followed by a state table."""
        lines = [f"{s} {a} {t}" for s, a, t in sorted(self.transitions, key=lambda x: (x[0], x[2], x[1]))]
        lines.append("")
        lines.append("# id initial propositions payload")
        for i, p in enumerate(self.payloads):
            mark = "*" if i in self.initial else "-"
            props = ",".join(sorted(self.labeling[i])) or "-"
            lines.append(f"# {i} {mark} {props} {describe(p)}")
        return "\n".join(lines) + "\n"


def ensure_total(lts: LabeledTS) -> LabeledTS:
    """Add a tau self-loop at every deadlocked state; ``totalized`` lists them."""
    dead = tuple(lts.deadlocks())
    if not dead:
        return lts
    trans = lts.transitions | {(i, TAU, i) for i in dead}
    return replace(lts, transitions=frozenset(trans), totalized=lts.totalized + dead)


def label_port(net: ProcessNetwork, n, m) -> str:
    """Label of interference by neighbour ``m``: the least port of ``n`` on an edge shared with ``m``."""
    shared = net.shared_edges(n, m)
    if not shared:
        raise ModelError(f"{m} is not a neighbour of {n}")
    return min(net.port_of(n, e) for e in shared)


def node_alphabet(net: ProcessNetwork, n) -> tuple:
    return (SELF,) + tuple(net.template(n).port_names)


def _labels_of(net, n, values):
    t = net.template(n)
    return frozenset(name for name, f in t.compiled_props.items() if f(values))


def _theta_of(theta, n):
    if hasattr(theta, "theta"):
        return theta.theta(n)
    if n not in theta:
        raise ModelError(f"invariant has no entry for node {n}")
    return theta[n]


def build_local_space(net: ProcessNetwork, theta, n, initial=None, quiet: bool = False,
                      total: bool = True) -> LabeledTS:
    """H_n over the states of theta_n.

    ``initial`` defaults to the projections of the globally initial states
    onto ``n``, restricted to theta_n. With ``quiet`` an interference move that
    leaves n's local state unchanged is labeled tau.
    """
    from .compositional import initial_projections
    states = sorted(_theta_of(theta, n))
    index = {s: i for i, s in enumerate(states)}
    init = initial if initial is not None else initial_projections(net)[n]
    trans = set()
    for i, s in enumerate(states):
        for _, s2 in step_successors(net, n, s):
            if s2 not in index:
                raise ModelError(f"theta_{n} is not closed under steps: {net.local_text(s2)}")
            trans.add((i, SELF, index[s2]))
    for m in sorted(net.neighbors(n)):
        label = label_port(net, n, m)
        # index the neighbour's states by their values on the shared edges
        shared = sorted(net.shared_edges(n, m))
        pm, pn = net.edge_positions(m), net.edge_positions(n)
        by_key = {}
        for u in _theta_of(theta, m):
            by_key.setdefault(tuple(u.values[pm[e]] for e in shared), []).append(u)
        for i, s in enumerate(states):
            for u in by_key.get(tuple(s.values[pn[e]] for e in shared), ()):
                for _, (s2, _) in interference_successors(net, n, s, m, u):
                    if s2 not in index:
                        raise ModelError(f"theta_{n} is not closed under interference: {net.local_text(s2)}")
                    j = index[s2]
                    trans.add((i, TAU if quiet and i == j else label, j))
    t = net.template(n)
    lts = LabeledTS(
        payloads=tuple(states),
        initial=frozenset(index[s] for s in init if s in index),
        transitions=frozenset(trans),
        alphabet=node_alphabet(net, n),
        labeling=tuple(_labels_of(net, n, s.values) for s in states),
        props=frozenset(t.prop_map),
        template=t,
        local_values=tuple(s.values for s in states),
        node=n,
    )
    return ensure_total(lts) if total else lts


def build_global_space(net: ProcessNetwork, n, cap: int = 10**6, quiet: bool = False, reach=None,
                       total: bool = True) -> LabeledTS:
    """Reachable global states labeled relative to node ``n``."""
    r = reach or reachable(net, cap)
    labels = {m: label_port(net, n, m) for m in net.neighbors(n)}
    proj = [net.project(g, n) for g in r.states]
    trans = set()
    for i, actor, j in r.edges:
        if actor == n:
            a = SELF
        elif actor in labels and not (quiet and proj[i] == proj[j]):
            a = labels[actor]
        else:
            a = TAU
        trans.add((i, a, j))
    t = net.template(n)
    lts = LabeledTS(
        payloads=tuple(r.states),
        initial=frozenset(r.index[g] for g in r.initial),
        transitions=frozenset(trans),
        alphabet=node_alphabet(net, n),
        labeling=tuple(_labels_of(net, n, s.values) for s in proj),
        props=frozenset(t.prop_map),
        template=t,
        local_values=tuple(s.values for s in proj),
        node=n,
    )
    return ensure_total(lts) if total else lts


def projection_map(net: ProcessNetwork, G: LabeledTS, n) -> list:
    return [net.project(g, n) for g in G.payloads]


__all__ = ["SELF", "TAU", "LabeledTS", "ensure_total", "build_local_space", "build_global_space",
           "label_port", "node_alphabet", "projection_map", "is_joint"]
