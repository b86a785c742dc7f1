"""Strong and stuttering (bi)simulation checks, and the local/global relations built on them."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from .balance import BalanceError, Similarity, is_similarity, natural_key, state_map
from .model import ModelError, ProcessNetwork, interference_successors, is_joint, reachable, step_successors
from .mucalc import TAU
from .spaces import SELF, LabeledTS, build_global_space, build_local_space, ensure_total


class RelationError(ValueError):
    pass


@dataclass
class CheckVerdict:
    holds: bool
    pair: Optional[tuple] = None  # failing (stateA, stateB) ids
    move: Optional[tuple] = None  # (src, label, dst) in the system whose move is unmatched
    side: str = "A"  # which system made the unmatched move
    reason: str = ""
    relation_size: int = 0
    text: dict = field(default_factory=dict)  # readable counterexample

    def __bool__(self):
        return self.holds

    def to_json(self):
        return {"holds": self.holds, "reason": self.reason, "relation_size": self.relation_size,
                "counterexample": self.text or None}


def _describe(lts: LabeledTS, i, describe=None):
    p = lts.payloads[i]
    return describe(p) if describe else repr(p)


def _fail(A, B, pair, move, side, reason, describe_a=None, describe_b=None, size=0):
    da = (lambda i: _describe(A, i, describe_a))
    db = (lambda i: _describe(B, i, describe_b))
    text = {}
    if pair is not None:
        text["pair"] = [da(pair[0]), db(pair[1])]
    if move is not None:
        d = da if side == "A" else db
        text["move"] = [d(move[0]), move[1], d(move[2])]
    return CheckVerdict(False, pair, move, side, reason, size, text)


# -- refinement core -----------------------------------------------------------

def _tau_closure(sys: LabeledTS, start, allowed: Callable[[int], bool]):
    """States reachable from ``start`` by tau moves through ``allowed`` states (start included)."""
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for a, y in sys.succ[x]:
            if a == TAU and y not in seen and allowed(y):
                seen.add(y)
                queue.append(y)
    return seen


def _matches_strong(A, B, R, s, t, lmap):
    for a, s2 in A.succ[s]:
        b = lmap.get(a, a) if a != TAU else TAU
        if not any(c == b and (s2, t2) in R for c, t2 in B.succ[t]):
            return (s, a, s2)
    return None


def _matches_stutter(A, B, R, Rs, s, t, lmap):
    """First move of ``s`` that ``t`` cannot match up to stuttering, else None."""
    related = Rs.get(s, set())
    closure = None
    for a, s2 in A.succ[s]:
        if a == TAU:
            if (s2, t) in R:
                continue
            want = TAU
        else:
            want = lmap.get(a, a)
        if closure is None:
            closure = _tau_closure(B, t, lambda y: y in related)
        if not any(c == want and (s2, t2) in R for x in closure for c, t2 in B.succ[x]):
            return (s, a, s2)
    return None


def _refine(A, B, R, lmap, stutter, both):
    """Greatest sub-relation of ``R`` satisfying the transfer conditions.

    Returns (relation, first deletion as (pair, move, side)).
    """
    R = set(R)
    inv = {b: a for a, b in lmap.items()}
    first = None
    changed = True
    while changed:
        changed = False
        Rs, Rt = {}, {}
        for s, t in R:
            Rs.setdefault(s, set()).add(t)
            Rt.setdefault(t, set()).add(s)
        Rinv = {(t, s) for s, t in R} if both else None
        for s, t in sorted(R):
            if stutter:
                bad = _matches_stutter(A, B, R, Rs, s, t, lmap)
            else:
                bad = _matches_strong(A, B, R, s, t, lmap)
            side = "A"
            if bad is None and both:
                if stutter:
                    bad = _matches_stutter(B, A, Rinv, Rt, t, s, inv)
                else:
                    bad = _matches_strong(B, A, Rinv, t, s, inv)
                side = "B"
            if bad is not None:
                R.discard((s, t))
                if both:
                    Rinv.discard((t, s))
                Rs[s].discard(t)
                Rt[t].discard(s)
                if first is None:
                    first = ((s, t), bad, side)
                changed = True
    return R, first


def _same_props(A, B):
    return lambda s, t: A.labeling[s] == B.labeling[t]


def _full_candidate(A, B):
    same = _same_props(A, B)
    return {(s, t) for s in range(A.size) for t in range(B.size) if same(s, t)}


def _initial_cover(A, B, R, both):
    """An initial state of A (or of B when ``both``) with no related initial partner."""
    for s in sorted(A.initial):
        if not any((s, t) in R for t in B.initial):
            return ("A", s)
    if both:
        for t in sorted(B.initial):
            if not any((s, t) in R for s in A.initial):
                return ("B", t)
    return None


def _check(A, B, label_map, seed, stutter, both, describe_a=None, describe_b=None, exact=False):
    lmap = dict(label_map or {})
    cand = set(seed) if seed is not None else _full_candidate(A, B)
    R, first = _refine(A, B, cand, lmap, stutter, both)
    if exact and first is not None:
        pair, move, side = first
        return _fail(A, B, pair, move, side, "relation is not closed under the transfer conditions",
                     describe_a, describe_b, len(R))
    miss = _initial_cover(A, B, R, both)
    if miss is not None:
        side, x = miss
        if first is not None:
            pair, move, s = first
            return _fail(A, B, pair, move, s, f"initial state of {side} is not related", describe_a,
                         describe_b, len(R))
        pair = (x, None) if side == "A" else (None, x)
        v = CheckVerdict(False, pair, None, side, f"initial state of {side} has no related initial state", len(R))
        v.text = {"state": _describe(A if side == "A" else B, x, describe_a if side == "A" else describe_b)}
        return v
    return CheckVerdict(True, relation_size=len(R))


def greatest_simulation(A, B, label_map=None, seed=None, stutter=False, both=False):
    cand = set(seed) if seed is not None else _full_candidate(A, B)
    return frozenset(_refine(A, B, cand, dict(label_map or {}), stutter, both)[0])


def check_strong_simulation(A: LabeledTS, B: LabeledTS, label_map=None, seed=None) -> CheckVerdict:
    return _check(A, B, label_map, seed, stutter=False, both=False)


def check_strong_bisimulation(A: LabeledTS, B: LabeledTS, label_map=None, seed=None) -> CheckVerdict:
    return _check(A, B, label_map, seed, stutter=False, both=True)


def check_stuttering_simulation(A: LabeledTS, B: LabeledTS, label_map=None, seed=None) -> CheckVerdict:
    return _check(A, B, label_map, seed, stutter=True, both=False)


def check_stuttering_bisimulation(A: LabeledTS, B: LabeledTS, label_map=None, seed=None) -> CheckVerdict:
    return _check(A, B, label_map, seed, stutter=True, both=True)


# -- balanced local spaces ------------------------------------------------------

def beta_label_map(net_m: ProcessNetwork, m, beta: dict, net_n: ProcessNetwork, n) -> dict:
    """self -> self, port p of m -> the port of n bound to beta(edge of p)."""
    out = {SELF: SELF}
    for p in net_m.template(m).port_names:
        out[p] = net_n.port_of(n, beta[net_m.edge_of(m, p)])
    return out


def check_bisimulation_up_to_beta(H_m: LabeledTS, H_n: LabeledTS, beta, net_m: ProcessNetwork,
                                  net_n: Optional[ProcessNetwork] = None) -> CheckVerdict:
    """Is {(s, beta(s))} a bisimulation between the two local spaces?"""
    net_n = net_n or net_m
    m, n = H_m.node, H_n.node
    mapping = beta.mapping if isinstance(beta, Similarity) else dict(beta)
    if not is_similarity(net_m, m, mapping, net_n, n):
        raise BalanceError(f"the edge map from {m} to {n} is not a similarity")
    f = state_map(net_m, m, mapping, net_n, n)
    lmap = beta_label_map(net_m, m, mapping, net_n, n)
    desc_m, desc_n = net_m.local_text, net_n.local_text
    image = {}
    for i, s in enumerate(H_m.payloads):
        j = H_n.index.get(f(s))
        if j is None:
            v = CheckVerdict(False, (i, None), None, "A", "state has no counterpart under beta")
            v.text = {"state": desc_m(s), "image": desc_n(f(s))}
            return v
        image[i] = j
    if len(set(image.values())) != H_n.size:
        missing = sorted(set(range(H_n.size)) - set(image.values()))[0]
        v = CheckVerdict(False, (None, missing), None, "B", "state has no preimage under beta")
        v.text = {"state": desc_n(H_n.payloads[missing])}
        return v
    if {image[i] for i in H_m.initial} != set(H_n.initial):
        return CheckVerdict(False, None, None, "A", "beta does not map initial states onto initial states",
                            text={"initial_m": sorted(desc_m(H_m.payloads[i]) for i in H_m.initial),
                                  "initial_n": sorted(desc_n(H_n.payloads[j]) for j in H_n.initial)})
    inv = {b: a for a, b in lmap.items()}
    for i in range(H_m.size):
        j = image[i]
        if H_m.labeling[i] != H_n.labeling[j]:
            return _fail(H_m, H_n, (i, j), None, "A", "propositions differ", desc_m, desc_n)
        ours = {(lmap.get(a, a), image[k]) for a, k in H_m.succ[i]}
        theirs = set(H_n.succ[j])
        for a, k in H_m.succ[i]:
            if (lmap.get(a, a), image[k]) not in theirs:
                return _fail(H_m, H_n, (i, j), (i, a, k), "A", "move has no beta-image", desc_m, desc_n)
        for b, k in H_n.succ[j]:
            if (b, k) not in ours:
                return _fail(H_m, H_n, (i, j), (j, inv.get(b, b), k), "B", "move has no beta-preimage",
                             desc_m, desc_n)
    return CheckVerdict(True, relation_size=H_m.size)


# -- local versus global ----------------------------------------------------------

def _theta_of(theta, n):
    return theta.theta(n) if hasattr(theta, "theta") else theta[n]


def _local_global_relation(net, theta, m, G, H):
    """(g, g[m]) for reachable g satisfying every theta projection."""
    R = set()
    for i, g in enumerate(G.payloads):
        if all(net.project(g, k) in _theta_of(theta, k) for k in net.nodes):
            j = H.index.get(net.project(g, m))
            if j is not None:
                R.add((i, j))
    return R


def _global_text(net):
    def d(g):
        return net.global_text(g)
    return d


def check_local_simulates_global(net: ProcessNetwork, theta, m, cap: int = 10**6, quiet: bool = False,
                   G: Optional[LabeledTS] = None, H: Optional[LabeledTS] = None) -> CheckVerdict:
    """Does the local space of ``m`` simulate the global space up to stuttering?"""
    G = G or build_global_space(net, m, cap, quiet=quiet)
    H = H or build_local_space(net, theta, m, quiet=quiet)
    R = _local_global_relation(net, theta, m, G, H)
    for i in range(G.size):
        if not any((i, j) in R for j in range(H.size)):
            v = CheckVerdict(False, (i, None), None, "A", "reachable global state outside the invariant")
            v.text = {"state": net.global_text(G.payloads[i])}
            return v
    return _check(G, H, None, R, stutter=True, both=False, describe_a=_global_text(net),
                  describe_b=net.local_text, exact=True)


def _edge_label(net, n, s2, shared):
    return ",".join(f"{e}={net.edge_domain[e].values[net.edge_value(s2, e)]}" for e in shared)


def outward_space(net: ProcessNetwork, theta, n, m, interference: bool = False) -> LabeledTS:
    """H_n seen from ``m``: a move is visible iff it changes an edge shared with ``m``.

    Only n's own steps are kept; labels are the new shared-edge values. With
    ``interference`` moves caused by neighbours other than ``m`` are kept too
    (a weaker check that does not support the local/global bisimulation).
    """
    shared = sorted(net.shared_edges(n, m), key=natural_key)
    states = sorted(_theta_of(theta, n))
    index = {s: i for i, s in enumerate(states)}
    pn = net.edge_positions(n)

    def key(s):
        return tuple(s.values[pn[e]] for e in shared)

    trans = set()

    def add(i, s, s2):
        if s2 not in index:
            raise ModelError(f"theta_{n} is not closed: {net.local_text(s2)}")
        label = TAU if key(s2) == key(s) else _edge_label(net, n, s2, shared)
        trans.add((i, label, index[s2]))

    for i, s in enumerate(states):
        for _, s2 in step_successors(net, n, s):
            add(i, s, s2)
        if not interference:
            continue
        for k in sorted(net.neighbors(n), key=natural_key):
            if k == m:
                continue
            for u in _theta_of(theta, k):
                if is_joint(net, s, u):
                    for _, (s2, _) in interference_successors(net, n, s, k, u):
                        add(i, s, s2)
    labeling = tuple(frozenset(f"{e}={v}" for e, v in zip(shared, key(s))) for s in states)
    alphabet = tuple(sorted({a for _, a, _ in trans if a != TAU}))
    lts = LabeledTS(tuple(states), frozenset(), frozenset(trans), alphabet, labeling,
                    frozenset().union(*labeling) if labeling else frozenset(), node=n)
    return ensure_total(lts)


def check_outward_facing(net: ProcessNetwork, theta, n, m, interference: bool = False) -> CheckVerdict:
    """Is B_{m,n} (same values on the edges shared with m) a stuttering bisimulation on H_n?"""
    if m not in net.neighbors(n):
        raise RelationError(f"{m} and {n} are not neighbours")
    S = outward_space(net, theta, n, m, interference)
    Bmn = {(i, j) for i in range(S.size) for j in range(S.size) if S.labeling[i] == S.labeling[j]}
    return _check(S, S, None, Bmn, stutter=True, both=True, describe_a=net.local_text,
                  describe_b=net.local_text, exact=True)


def outward_pairs(net: ProcessNetwork, theta, interference: bool = False) -> dict:
    """Verdict for every ordered neighbour pair (n facing m)."""
    out = {}
    for n in sorted(net.nodes, key=natural_key):
        for m in sorted(net.neighbors(n), key=natural_key):
            out[(n, m)] = check_outward_facing(net, theta, n, m, interference)
    return out


def check_local_global_bisimilar(net: ProcessNetwork, theta, m, cap: int = 10**6, require_outward: bool = True,
                   G: Optional[LabeledTS] = None, H: Optional[LabeledTS] = None, quiet: bool = True) -> CheckVerdict:
    """Are the local and global spaces of ``m`` stuttering bisimilar?

    Interference that leaves m's state unchanged counts as stuttering on both sides.
    """
    if require_outward:
        for n in sorted(net.neighbors(m), key=natural_key):
            v = check_outward_facing(net, theta, n, m)
            if not v:
                raise RelationError(f"{n} is not outward-facing towards {m}; refusing to assume it")
    G = G or build_global_space(net, m, cap, quiet=quiet)
    H = H or build_local_space(net, theta, m, quiet=quiet)
    R = _local_global_relation(net, theta, m, G, H)
    return _check(G, H, None, R, stutter=True, both=True, describe_a=_global_text(net),
                  describe_b=net.local_text, exact=True)


# names used by the published API
check_theorem5 = check_local_simulates_global
check_theorem6 = check_local_global_bisimilar


__all__ = [
    "RelationError", "CheckVerdict", "greatest_simulation", "check_strong_simulation",
    "check_strong_bisimulation", "check_stuttering_simulation", "check_stuttering_bisimulation",
    "beta_label_map", "check_bisimulation_up_to_beta", "check_local_simulates_global", "outward_space",
    "check_outward_facing", "outward_pairs", "check_local_global_bisimilar", "check_theorem5", "check_theorem6",
]
