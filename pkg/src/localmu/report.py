"""Verdict transfer, the check pipeline behind the cli, and the counting comparison."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

from . import mucalc as mc
from .balance import largest_balance, natural_key, representatives
from .compositional import strongest_compositional_invariant
from .dsl import ModelDocument, parse_formula
from .model import ProcessNetwork, reachable
from .relations import check_outward_facing
from .spaces import build_global_space, build_local_space

HOLDS_GLOBALLY = "holds globally under unconditional fairness (universal formula, local space simulates global)"
EQUALS_LOCAL = "global verdict equals local verdict under fairness (outward-facing interaction)"
LOCAL_ONLY = "local verdict only; no transfer result applies"


@dataclass(frozen=True)
class Claim:
    kind: str  # holds-globally | equals-local | local-only
    global_verdict: Optional[bool]
    text: str


def transfer_verdict(local: bool, universal: bool, outward_all: bool) -> Claim:
    if universal and local:
        return Claim("holds-globally", True, HOLDS_GLOBALLY)
    if outward_all:
        return Claim("equals-local", local, EQUALS_LOCAL)
    return Claim("local-only", None, LOCAL_ONLY)


@dataclass
class NodeResult:
    node: str
    local: bool
    claim: Claim
    outward: dict  # neighbour -> bool
    local_states: int
    oracle: Optional[dict] = None
    seconds: float = 0.0

    def to_json(self):
        return {
            "node": self.node,
            "local": self.local,
            "claim": {"kind": self.claim.kind, "global": self.claim.global_verdict, "text": self.claim.text},
            "outward_facing": dict(sorted(self.outward.items())),
            "outward_facing_all": all(self.outward.values()),
            "local_states": self.local_states,
            "oracle": self.oracle,
            "seconds": round(self.seconds, 4),
        }


@dataclass
class VerdictReport:
    network: str
    formula: str
    universal: bool
    classes: list
    results: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        for r in self.results:
            if not r.local:
                return False
            if r.oracle is not None and not r.oracle["holds"]:
                return False
        return True

    def to_json(self):
        return {
            "network": self.network,
            "formula": self.formula,
            "universal": self.universal,
            "classes": [list(c) for c in self.classes],
            "results": [r.to_json() for r in self.results],
            "passed": self.passed,
        }


def resolve_formula(doc: ModelDocument, net: ProcessNetwork, text: str, node):
    """A named formula of the node's template, or formula text parsed against it."""
    t = net.template(node)
    fd = doc.formulas.get(text)
    if fd is not None and fd.template == t.name:
        return fd.formula
    if fd is not None:
        raise mc.FormulaError(f"formula {text!r} belongs to template {fd.template}, not {t.name}")
    return parse_formula(text, t)


def _counterexample(net, G, f):
    """Shortest trace to a state violating the body of an AG formula, else the failing initial states."""
    from collections import deque
    sat = mc.evaluate(f, G)
    body = f.arg if isinstance(f, mc.Modal) and f.op == "AG" else None
    if body is not None:
        good = mc.evaluate(body, G)
        start = sorted(G.initial - sat)
        parent = {s: None for s in start}
        queue = deque(start)
        while queue:
            x = queue.popleft()
            if x not in good:
                path = []
                while x is not None:
                    path.append(net.global_text(G.payloads[x]))
                    x = parent[x]
                return list(reversed(path))
            for _, y in G.succ[x]:
                if y not in parent:
                    parent[y] = x
                    queue.append(y)
    return [net.global_text(G.payloads[i]) for i in sorted(G.initial - sat)[:1]]


def check(doc: ModelDocument, formula_text: str, network: Optional[str] = None, node: Optional[str] = None,
          oracle_cap: Optional[int] = None) -> VerdictReport:
    net = doc.network(network)
    B = largest_balance(net)
    scheme = representatives(net, B)
    inv = strongest_compositional_invariant(net, scheme)
    nodes = [node] if node else list(scheme.representatives)
    if node and node not in net.node_index:
        raise KeyError(f"unknown node {node!r}")
    named = doc.formulas.get(formula_text)
    if named is not None and not node:
        # a named formula only speaks about nodes of its own template
        nodes = [n for n in nodes if net.template(n).name == named.template]
        if not nodes:
            raise mc.FormulaError(f"no node of template {named.template} in network {net.name}")
    first = resolve_formula(doc, net, formula_text, nodes[0])
    report = VerdictReport(net.name, mc.to_text(first), mc.is_universal(first), list(scheme.classes))
    reach = None
    for n in sorted(nodes, key=natural_key):
        t0 = time.perf_counter()
        f = resolve_formula(doc, net, formula_text, n)
        H = build_local_space(net, inv, n)
        local = mc.holds(f, H)
        outward = {k: bool(check_outward_facing(net, inv, k, n)) for k in sorted(net.neighbors(n), key=natural_key)}
        claim = transfer_verdict(local, mc.is_universal(f), all(outward.values()))
        oracle = None
        if oracle_cap is not None:
            reach = reach or reachable(net, oracle_cap)
            G = build_global_space(net, n, oracle_cap, reach=reach)
            ok = mc.holds(f, G)
            oracle = {"holds": ok, "global_states": G.size}
            if not ok:
                oracle["trace"] = _counterexample(net, G, f)
        report.results.append(NodeResult(n, local, claim, outward, H.size, oracle, time.perf_counter() - t0))
    return report


# -- counting ---------------------------------------------------------------------

@dataclass(frozen=True)
class CountingReport:
    m: int  # local states per process
    n: int  # processes
    b: int  # neighbours
    counter_size: int
    two_to_m: int
    local_size: int

    @property
    def counter_exceeds_2m(self) -> bool:
        return self.counter_size > self.two_to_m

    @property
    def n_exceeds_2m(self) -> bool:
        return self.n > 2 * self.m

    def to_json(self):
        return {"m": self.m, "n": self.n, "b": self.b, "counter_size": self.counter_size,
                "two_to_m": self.two_to_m, "local_size": self.local_size,
                "counter_exceeds_2m": self.counter_exceeds_2m, "n_exceeds_2m": self.n_exceeds_2m}


def counting_report(m: int, n: int, b: int) -> CountingReport:
    """Counter-abstraction size (m+n-1)!/(n!(m-1)!) against 2^m and the local size m^b."""
    if m < 1 or n < 1 or b < 0:
        raise ValueError("need m >= 1, n >= 1, b >= 0")
    size = math.factorial(m + n - 1) // (math.factorial(n) * math.factorial(m - 1))
    return CountingReport(m, n, b, size, 2 ** m, m ** b)
