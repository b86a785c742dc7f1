"""Neighbourhood similarities and balance relations."""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations, product
from typing import Optional

from . import expr as ex
from .model import LocalState, ModelError, ProcessNetwork


class BalanceError(ValueError):
    pass


def natural_key(name: str):
    """Sort key treating digit runs numerically: p2 < p10."""
    return tuple(int(t) if t.isdigit() else t for t in re.split(r"(\d+)", name))


@dataclass(frozen=True, order=True)
class Similarity:
    """A triple (m, beta, n); ``beta`` is a sorted tuple of (edge of m, edge of n)."""
    m: str
    beta: tuple
    n: str

    @property
    def mapping(self) -> dict:
        return dict(self.beta)

    def inverse(self) -> "Similarity":
        return Similarity(self.n, tuple(sorted((f, e) for e, f in self.beta)), self.m)

    def compose(self, other: "Similarity") -> "Similarity":
        """``other`` after ``self``: (m, b, q) ; (q, g, n) -> (m, g.b, n)."""
        if self.n != other.m:
            raise BalanceError("similarities are not composable")
        g = other.mapping
        return Similarity(self.m, tuple(sorted((e, g[f]) for e, f in self.beta)), other.n)

    def to_json(self):
        return {"m": self.m, "n": self.n, "beta": {e: f for e, f in self.beta}}


def identity(net: ProcessNetwork, n) -> Similarity:
    return Similarity(n, tuple(sorted((e, e) for e in net.port_edges(n))), n)


def _sort_key(sim: Similarity):
    return (natural_key(sim.m), natural_key(sim.n), tuple(natural_key(f) for _, f in sim.beta))


def port_permutation(net_m: ProcessNetwork, m, beta: dict, net_n: ProcessNetwork, n):
    """For each port of ``n`` (in order) the index of the ``m`` port it receives."""
    inv = {f: e for e, f in beta.items()}
    m_ports = {e: i for i, e in enumerate(net_m.port_edges(m))}
    return tuple(m_ports[inv[f]] for f in net_n.port_edges(n))


def state_map(net_m: ProcessNetwork, m, beta: dict, net_n: ProcessNetwork, n):
    """The local-state permutation induced by ``beta``: LocalState of m -> of n."""
    k = net_m.template(m).n_internal
    perm = tuple(k + i for i in port_permutation(net_m, m, beta, net_n, n))

    def apply(s: LocalState) -> LocalState:
        v = s.values
        return LocalState(n, v[:k] + tuple(v[i] for i in perm))
    return apply


def beta_state(net: ProcessNetwork, sim: Similarity, s: LocalState) -> LocalState:
    return state_map(net, sim.m, sim.mapping, net, sim.n)(s)


def _internal_shape(t):
    return tuple((v.name, v.domain.values) for v in t.internals)


@lru_cache(maxsize=4096)
def _isomorphic(tm, tn, perm) -> bool:
    """[I_n == perm(I_m)] and [T_n == perm(T_m)] by exhaustive enumeration."""
    k = tm.n_internal

    def mapv(v):
        return v[:k] + tuple(v[k + i] for i in perm)

    for v in tm.all_valuations():
        w = mapv(v)
        if tm.init_fn(v) != tn.init_fn(w):
            return False
        succ_m = {mapv(x) for _, x in tm.step(v)}
        succ_n = {x for _, x in tn.step(w)}
        if succ_m != succ_n:
            return False
    return True


def _direction(net, n, e):
    return (e in net.in_edges(n), e in net.out_edges(n))


def is_similarity(net_m: ProcessNetwork, m, beta: dict, net_n: ProcessNetwork = None, n=None) -> bool:
    net_n = net_n or net_m
    tm, tn = net_m.template(m), net_n.template(n)
    if _internal_shape(tm) != _internal_shape(tn):
        return False
    em, en = set(net_m.port_edges(m)), set(net_n.port_edges(n))
    if set(beta) != em or set(beta.values()) != en or len(set(beta.values())) != len(beta):
        return False
    for e, f in beta.items():
        if _direction(net_m, m, e) != _direction(net_n, n, f):
            return False
        if net_m.edge_domain[e].values != net_n.edge_domain[f].values:
            return False
    return _isomorphic(tm, tn, port_permutation(net_m, m, beta, net_n, n))


def enumerate_similarities(net: ProcessNetwork, m, n, degree_cap: int = 6) -> frozenset:
    tm, tn = net.template(m), net.template(n)
    em, en = net.port_edges(m), net.port_edges(n)
    if len(em) != len(en) or _internal_shape(tm) != _internal_shape(tn):
        return frozenset()
    if len(em) > degree_cap:
        raise BalanceError(f"degree {len(em)} of {m} exceeds the cap {degree_cap}")

    def classes(node, edges):
        out = {}
        for e in edges:
            key = (_direction(net, node, e), net.edge_domain[e].values)
            out.setdefault(key, []).append(e)
        return out

    cm, cn = classes(m, em), classes(n, en)
    if {k: len(v) for k, v in cm.items()} != {k: len(v) for k, v in cn.items()}:
        return frozenset()
    keys = sorted(cm, key=repr)
    out = set()
    for choice in product(*(permutations(cn[k]) for k in keys)):
        beta = {}
        for k, image in zip(keys, choice):
            beta.update(zip(cm[k], image))
        if _isomorphic(tm, tn, port_permutation(net, m, beta, net, n)):
            out.add(Similarity(m, tuple(sorted(beta.items())), n))
    return frozenset(out)


def _pointers(net: ProcessNetwork):
    return {n: [k for k in net.nodes if net.points_to(k, n)] for n in net.nodes}


def _shared_with(net, m, k):
    return net.port_edges(m) if k == m else net.shared_edges(m, k)


class _Index:
    def __init__(self, triples):
        self.by_pair = {}
        for t in triples:
            self.by_pair.setdefault((t.m, t.n), set()).add(t)

    def remove(self, t):
        self.by_pair[(t.m, t.n)].discard(t)

    def get(self, k, l):
        return self.by_pair.get((k, l), ())


def _pointing_failure(net, t: Similarity, idx: _Index, pointers):
    """Return a pointing node k of t.m with no matching (k, gamma, l), else None."""
    beta = t.mapping
    for k in pointers[t.m]:
        shared = _shared_with(net, t.m, k)
        found = False
        for l in pointers[t.n]:
            for g in idx.get(k, l):
                gm = g.mapping
                if all(gm.get(e) == beta[e] for e in shared):
                    found = True
                    break
            if found:
                break
        if not found:
            return k
    return None


def largest_balance(net: ProcessNetwork, degree_cap: int = 6, shuffle_seed: Optional[int] = None) -> frozenset:
    """Greatest fixpoint: delete violating similarities until stable."""
    triples = set()
    for m in net.nodes:
        for n in net.nodes:
            triples |= enumerate_similarities(net, m, n, degree_cap)
    idx = _Index(triples)
    pointers = _pointers(net)
    rng = random.Random(shuffle_seed) if shuffle_seed is not None else None
    changed = True
    while changed:
        changed = False
        order = sorted(triples, key=_sort_key)
        if rng:
            rng.shuffle(order)
        for t in order:
            if t not in triples:
                continue
            if t.inverse() not in triples or _pointing_failure(net, t, idx, pointers) is not None:
                triples.discard(t)
                idx.remove(t)
                changed = True
    return frozenset(triples)


@dataclass
class BalanceReport:
    valid: bool
    triple: Optional[Similarity] = None
    reason: str = ""
    pointer: Optional[str] = None

    def __bool__(self):
        return self.valid


def is_balance_relation(net: ProcessNetwork, B) -> BalanceReport:
    B = frozenset(B)
    for t in sorted(B, key=_sort_key):
        if t.m not in net.node_index or t.n not in net.node_index:
            return BalanceReport(False, t, "unknown node")
        if not is_similarity(net, t.m, t.mapping, net, t.n):
            return BalanceReport(False, t, "not a similarity")
        if t.inverse() not in B:
            return BalanceReport(False, t, "inverse missing")
    idx = _Index(B)
    pointers = _pointers(net)
    for t in sorted(B, key=_sort_key):
        k = _pointing_failure(net, t, idx, pointers)
        if k is not None:
            return BalanceReport(False, t, f"no node pointing to {t.n} matches {k}", k)
    return BalanceReport(True)


@dataclass(frozen=True)
class RepresentativeScheme:
    classes: tuple  # tuple of node tuples, canonical order
    rep: dict = field(hash=False)  # node -> representative
    gamma: dict = field(hash=False)  # node -> Similarity (rep, gamma, node)

    @property
    def representatives(self):
        return tuple(c[0] for c in self.classes)


def representatives(net: ProcessNetwork, B) -> RepresentativeScheme:
    B = frozenset(B)
    parent = {n: n for n in net.nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t in B:
        a, b = find(t.m), find(t.n)
        if a != b:
            parent[a] = b
    groups = {}
    for n in net.nodes:
        groups.setdefault(find(n), []).append(n)
    classes = sorted((tuple(sorted(g, key=natural_key)) for g in groups.values()), key=lambda c: natural_key(c[0]))
    rep, gamma = {}, {}
    by_pair = {}
    for t in B:
        by_pair.setdefault((t.m, t.n), []).append(t)
    for c in classes:
        r = c[0]
        for n in c:
            rep[n] = r
            if n == r:
                ident = identity(net, r)
                if len(c) > 1 and ident not in B:
                    raise BalanceError(f"relation lacks the identity on {r}")
                gamma[n] = ident
                continue
            cands = by_pair.get((r, n))
            if not cands:
                raise BalanceError(f"no triple relates representative {r} to {n}; relation is not transitive")
            gamma[n] = min(cands, key=_sort_key)
    return RepresentativeScheme(tuple(classes), rep, gamma)


# -- communication relation and automorphisms ---------------------------------

@dataclass(frozen=True)
class CommunicationRelation:
    nodes: tuple
    edges: frozenset  # frozenset of frozenset({m, n})

    def adjacent(self, m, n):
        return frozenset((m, n)) in self.edges

    def degree(self, n):
        return sum(1 for e in self.edges if n in e)


def communication_relation(net: ProcessNetwork) -> CommunicationRelation:
    edges = set()
    for n in net.nodes:
        for m in net.neighbors(n):
            edges.add(frozenset((m, n)))
    return CommunicationRelation(tuple(net.nodes), frozenset(edges))


def find_automorphisms(cr: CommunicationRelation, cap: int = 10) -> list:
    """All automorphisms of ``cr`` as node -> node dicts (backtracking search)."""
    nodes = list(cr.nodes)
    if len(nodes) > cap:
        raise BalanceError(f"{len(nodes)} nodes exceed the automorphism search cap {cap}")
    deg = {n: cr.degree(n) for n in nodes}
    adj = {n: {m for m in nodes if cr.adjacent(n, m)} for n in nodes}
    out = []
    image = {}
    used = set()

    def rec(i):
        if i == len(nodes):
            out.append(dict(image))
            return
        n = nodes[i]
        for c in nodes:
            if c in used or deg[c] != deg[n]:
                continue
            if any((m in adj[n]) != (image[m] in adj[c]) for m in nodes[:i]):
                continue
            image[n] = c
            used.add(c)
            rec(i + 1)
            used.discard(c)
            del image[n]

    rec(0)
    return out


def balance_from_automorphism(net: ProcessNetwork, pi: dict) -> frozenset:
    """Triples (m, beta_pi, pi(m)) induced by an automorphism of the communication relation."""
    cr = communication_relation(net)
    if sorted(pi) != sorted(net.nodes) or sorted(pi.values()) != sorted(net.nodes):
        raise BalanceError("permutation must be a bijection on the network nodes")
    for e in cr.edges:
        a, b = tuple(e) if len(e) == 2 else (next(iter(e)),) * 2
        if not cr.adjacent(pi[a], pi[b]):
            raise BalanceError(f"{dict(sorted(pi.items()))} is not an automorphism of the communication relation")
    out = set()
    for m in net.nodes:
        n = pi[m]
        beta = {}
        for e in net.port_edges(m):
            ends = {pi[x] for x in net.edge_nodes(e)}
            cands = [f for f in net.port_edges(n) if set(net.edge_nodes(f)) == ends]
            if len(cands) > 1:
                p = net.port_of(m, e)
                cands = [f for f in cands if net.port_of(n, f) == p]
            if len(cands) != 1:
                raise BalanceError(f"edge lift of {e} from {m} to {n} is ambiguous or missing")
            beta[e] = cands[0]
        if len(set(beta.values())) != len(beta):
            raise BalanceError(f"edge lift from {m} to {n} is not a bijection")
        if not is_similarity(net, m, beta, net, n):
            raise BalanceError(f"{m} and {n} are not similar under the lifted edge map")
        out.add(Similarity(m, tuple(sorted(beta.items())), n))
    closure = out | {t.inverse() for t in out}
    report = is_balance_relation(net, closure)
    if not report:
        raise BalanceError(f"induced relation is not a balance relation: {report.reason} at {report.triple}")
    return frozenset(out)


def _conjuncts(e):
    return list(e.args) if isinstance(e, ex.And) else [e]


def is_normal(net: ProcessNetwork) -> bool:
    """Guards are conjunctions of per-neighbour tests, actions are swaps or constants."""
    for n in net.nodes:
        t = net.template(n)
        port_nbrs = {}
        for p, e in zip(t.port_names, net.port_edges(n)):
            port_nbrs[p] = {k for k in net.edge_nodes(e) if k != n}
        for c in t.commands:
            for part in _conjuncts(c.guard):
                nbrs = set()
                for name in ex.names(part):
                    nbrs |= port_nbrs.get(name, set())
                if len(nbrs) > 1:
                    return False
            copies = {u.target: u.source.name for u in c.updates if isinstance(u.source, ex.VarRef)}
            if sorted(copies) != sorted(copies.values()):
                return False
    return True


def check_respects_network(net: ProcessNetwork, B) -> Optional[Similarity]:
    """First triple of ``B`` under which the assigned processes are not isomorphic."""
    for t in sorted(B, key=_sort_key):
        if not is_similarity(net, t.m, t.mapping, net, t.n):
            return t
    return None


__all__ = [
    "BalanceError", "Similarity", "BalanceReport", "RepresentativeScheme", "CommunicationRelation",
    "enumerate_similarities", "largest_balance", "is_balance_relation", "representatives",
    "communication_relation", "find_automorphisms", "balance_from_automorphism", "is_normal",
    "natural_key", "identity", "state_map", "beta_state", "is_similarity", "ModelError",
]
