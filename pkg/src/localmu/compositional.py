"""Strongest compositional invariants and their global checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .balance import RepresentativeScheme, identity, is_similarity, natural_key, state_map
from .model import (CapExceeded, ModelError, ProcessNetwork, apply_local, global_initial, initial_local_states,
                    interference_successors, is_joint, join_states, reachable, step_successors)


def initial_projections(net: ProcessNetwork, cap: int = 10**6) -> dict:
    """Per node, the local states that occur in some globally initial state.

    Without a network-level constraint these are the local initial states.
    """
    if net.initially is None:
        return {n: initial_local_states(net, n) for n in net.nodes}
    cached = _INIT_CACHE.get(id(net))
    if cached is not None and cached[0] is net:
        return cached[1]
    out = {n: set() for n in net.nodes}
    for g in global_initial(net, cap):
        for n in net.nodes:
            out[n].add(net.project(g, n))
    res = {n: frozenset(v) for n, v in out.items()}
    _INIT_CACHE[id(net)] = (net, res)
    return res


_INIT_CACHE: dict = {}


def trivial_scheme(net: ProcessNetwork) -> RepresentativeScheme:
    """Every node is its own representative."""
    nodes = sorted(net.nodes, key=natural_key)
    return RepresentativeScheme(tuple((n,) for n in nodes), {n: n for n in nodes},
                                {n: identity(net, n) for n in nodes})


@dataclass
class CompositionalInvariant:
    net: ProcessNetwork = field(repr=False)
    scheme: RepresentativeScheme
    per_rep: dict  # representative -> frozenset of LocalState

    def __post_init__(self):
        self._cache = {}

    def theta(self, n) -> frozenset:
        got = self._cache.get(n)
        if got is None:
            r = self.scheme.rep[n]
            f = state_map(self.net, r, self.scheme.gamma[n].mapping, self.net, n)
            got = frozenset(f(s) for s in self.per_rep[r])
            self._cache[n] = got
        return got

    def materialize(self) -> dict:
        return {n: self.theta(n) for n in self.net.nodes}

    def to_json(self):
        return {r: [self.net.describe(s) for s in sorted(states)] for r, states in self.per_rep.items()}


def _check_scheme(net, scheme, seeds):
    for n in net.nodes:
        r = scheme.rep[n]
        g = scheme.gamma[n]
        if not is_similarity(net, r, g.mapping, net, n):
            raise ModelError(f"scheme maps {r} to {n} by a map that is not a similarity")
        f = state_map(net, r, g.mapping, net, n)
        if frozenset(f(s) for s in seeds[r]) != seeds[n]:
            raise ModelError(f"initial states of {n} are not the image of those of {r}; "
                             f"the network does not respect the balance relation")


def strongest_compositional_invariant(net: ProcessNetwork, scheme: Optional[RepresentativeScheme] = None,
                                      cap: int = 10**6) -> CompositionalInvariant:
    """Least sets closed under Init, Step and Non-Interference, kept per representative."""
    scheme = scheme or trivial_scheme(net)
    seeds = initial_projections(net, cap)
    _check_scheme(net, scheme, seeds)
    reps = scheme.representatives
    per_rep = {r: set(seeds[r]) for r in reps}
    maps = {n: state_map(net, scheme.rep[n], scheme.gamma[n].mapping, net, n) for n in net.nodes}
    nbrs = {r: sorted(net.neighbors(r), key=natural_key) for r in reps}
    shared = {(r, m): sorted(net.shared_edges(r, m)) for r in reps for m in nbrs[r]}

    def theta(m):
        return [maps[m](s) for s in per_rep[scheme.rep[m]]]

    changed = True
    while changed:
        changed = False
        for r in reps:
            todo = set()
            for s in per_rep[r]:
                todo.update(s2 for _, s2 in step_successors(net, r, s))
            pr = net.edge_positions(r)
            for m in nbrs[r]:
                es = shared[(r, m)]
                pm = net.edge_positions(m)
                by_key = {}
                for u in theta(m):
                    by_key.setdefault(tuple(u.values[pm[e]] for e in es), []).append(u)
                for s in list(per_rep[r]):
                    for u in by_key.get(tuple(s.values[pr[e]] for e in es), ()):
                        todo.update(s2 for _, (s2, _) in interference_successors(net, r, s, m, u))
            new = todo - per_rep[r]
            if new:
                per_rep[r] |= new
                changed = True
    return CompositionalInvariant(net, scheme, {r: frozenset(v) for r, v in per_rep.items()})


@dataclass
class CompositionalReport:
    valid: bool
    rule: Optional[str] = None  # Init | Step | Non-Interference
    node: Optional[str] = None
    witness: tuple = ()

    def __bool__(self):
        return self.valid


def _as_map(net, theta):
    return theta.materialize() if isinstance(theta, CompositionalInvariant) else dict(theta)


def check_compositional(net: ProcessNetwork, theta, cap: int = 10**6) -> CompositionalReport:
    th = _as_map(net, theta)
    seeds = initial_projections(net, cap)
    for n in sorted(net.nodes, key=natural_key):
        for s in sorted(seeds[n] - th[n]):
            return CompositionalReport(False, "Init", n, (s,))
    for n in sorted(net.nodes, key=natural_key):
        for s in sorted(th[n]):
            for _, s2 in sorted(step_successors(net, n, s)):
                if s2 not in th[n]:
                    return CompositionalReport(False, "Step", n, (s, s2))
    for n in sorted(net.nodes, key=natural_key):
        pn = net.edge_positions(n)
        for m in sorted(net.neighbors(n), key=natural_key):
            es = sorted(net.shared_edges(n, m))
            pm = net.edge_positions(m)
            for s in sorted(th[n]):
                key = tuple(s.values[pn[e]] for e in es)
                for u in sorted(th[m]):
                    if tuple(u.values[pm[e]] for e in es) != key:
                        continue
                    for _, (s2, u2) in sorted(interference_successors(net, n, s, m, u)):
                        if s2 not in th[n]:
                            return CompositionalReport(False, "Non-Interference", n, (s, u, s2, u2))
    return CompositionalReport(True)


@dataclass
class OracleReport:
    holds: bool
    kind: Optional[str] = None  # "reachable" or "inductive"
    state: object = None
    successor: object = None
    node: Optional[str] = None
    trace: list = field(default_factory=list)
    reachable_count: int = 0

    def __bool__(self):
        return self.holds


def global_invariant_oracle(net: ProcessNetwork, theta, cap: int = 10**6) -> OracleReport:
    """Brute force: reachable states project into every theta_n, and the conjunction is inductive."""
    th = _as_map(net, theta)
    r = reachable(net, cap)
    for i, g in enumerate(r.states):
        for n in net.nodes:
            if net.project(g, n) not in th[n]:
                from .model import trace_to
                return OracleReport(False, "reachable", g, None, n, trace_to(r, i), len(r.states))
    # a move of n changes only n and, through shared edges, its neighbours; a violating
    # pair counts once it extends to a full state of the conjunction
    for n in sorted(net.nodes, key=natural_key):
        for s in sorted(th[n]):
            for _, s2 in sorted(step_successors(net, n, s)):
                if s2 not in th[n]:
                    g = _extend(net, th, {n: s})
                    if g is not None:
                        return OracleReport(False, "inductive", g, apply_local(net, g, s2), n, [], len(r.states))
                for k in sorted(net.neighbors(n), key=natural_key):
                    for u in sorted(th[k]):
                        if not is_joint(net, s, u) or _after_move(net, s2, u) in th[k]:
                            continue
                        g = _extend(net, th, {n: s, k: u})
                        if g is not None:
                            return OracleReport(False, "inductive", g, apply_local(net, g, s2), k, [],
                                                len(r.states))
    return OracleReport(True, reachable_count=len(r.states))


def _after_move(net, s2, u):
    """Neighbour state ``u`` after its neighbour moved to ``s2``: shared edges copied."""
    if u.node == s2.node:
        return s2
    ps, pu = net.edge_positions(s2.node), net.edge_positions(u.node)
    vals = list(u.values)
    for e in net.shared_edges(s2.node, u.node):
        vals[pu[e]] = s2.values[ps[e]]
    return u._replace(values=tuple(vals))


def _extend(net, th, fixed):
    """Some global state in the conjunction that agrees with ``fixed``, or None."""
    cands = {n: ([fixed[n]] if n in fixed else th[n]) for n in net.nodes}
    out = join_states(net, cands, None, limit=1)
    return out[0] if out else None


def respects_invariant(net: ProcessNetwork, theta, B) -> bool:
    th = _as_map(net, theta)
    for t in B:
        f = state_map(net, t.m, t.mapping, net, t.n)
        if frozenset(f(s) for s in th[t.m]) != frozenset(th[t.n]):
            return False
    return True


def reachable_projections(net: ProcessNetwork, cap: int = 10**6) -> dict:
    r = reachable(net, cap)
    return {n: frozenset(net.project(g, n) for g in r.states) for n in net.nodes}


__all__ = ["CompositionalInvariant", "CompositionalReport", "OracleReport", "initial_projections",
           "trivial_scheme", "strongest_compositional_invariant", "check_compositional",
           "global_invariant_oracle", "respects_invariant", "reachable_projections"]
