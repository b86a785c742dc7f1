"""Process networks and their interleaving semantics.

Values are stored as domain indices. A :class:`LocalState` of node ``n`` is a
flat tuple: the template's internal variables in declaration order followed by
the values of the edges bound to its ports, in port declaration order.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import NamedTuple, Optional

from . import expr as ex


class ModelError(ValueError):
    """A structurally invalid template or network."""

    def __init__(self, message, span=None):
        super().__init__(message)
        self.span = span


class CapExceeded(RuntimeError):
    """Raised when a state enumeration exceeds its configured cap."""


PORT_MODES = ("read", "write", "readwrite")


@dataclass(frozen=True)
class Domain:
    name: str
    values: tuple

    def __post_init__(self):
        if not self.values:
            raise ModelError(f"domain {self.name!r} is empty")
        if len(set(self.values)) != len(self.values):
            raise ModelError(f"domain {self.name!r} has repeated values")


@dataclass(frozen=True)
class VariableDecl:
    name: str
    domain: Domain
    kind: str = "internal"  # "internal" | "port"
    mode: Optional[str] = None

    def __post_init__(self):
        if self.kind == "internal" and self.mode is not None:
            raise ModelError(f"internal variable {self.name!r} cannot have a mode")
        if self.kind == "port" and self.mode not in PORT_MODES:
            raise ModelError(f"port {self.name!r} needs a mode in {PORT_MODES}")

    @property
    def readable(self):
        return self.kind == "internal" or self.mode in ("read", "readwrite")

    @property
    def writable(self):
        return self.kind == "internal" or self.mode in ("write", "readwrite")


@dataclass(frozen=True)
class Update:
    """``target := source``; source is a VarRef (copy) or ConstRef."""
    target: str
    source: object


@dataclass(frozen=True)
class GuardedCommand:
    name: str
    guard: object
    updates: tuple = ()
    span: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ProcessTemplate:
    name: str
    variables: tuple
    init: object = ex.TRUE
    commands: tuple = ()
    props: tuple = ()  # ((name, expr), ...)
    span: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        self._validate()

    @cached_property
    def internals(self):
        return tuple(v for v in self.variables if v.kind == "internal")

    @cached_property
    def ports(self):
        return tuple(v for v in self.variables if v.kind == "port")

    @cached_property
    def port_names(self):
        return tuple(p.name for p in self.ports)

    @cached_property
    def slots(self):
        return {v.name: i for i, v in enumerate(self.internals + self.ports)}

    @cached_property
    def var(self):
        return {v.name: v for v in self.variables}

    @cached_property
    def domains(self):
        return {v.name: v.domain.values for v in self.variables}

    @cached_property
    def n_internal(self):
        return len(self.internals)

    @cached_property
    def prop_map(self):
        return dict(self.props)

    def _validate(self):
        seen = set()
        for v in self.variables:
            if v.name in seen:
                raise ModelError(f"template {self.name}: duplicate variable {v.name!r}", self.span)
            seen.add(v.name)
        unknown = ex.names(self.init) - seen
        if unknown:
            raise ModelError(f"template {self.name}: init references unknown {sorted(unknown)}", self.span)
        cmd_names = set()
        for c in self.commands:
            if c.name in cmd_names:
                raise ModelError(f"template {self.name}: duplicate command {c.name!r}", c.span)
            cmd_names.add(c.name)
            for n in ex.names(c.guard):
                if n not in self.var:
                    raise ModelError(f"command {c.name}: unknown variable {n!r}", c.span)
                if not self.var[n].readable:
                    raise ModelError(
                        f"mode violation: command {c.name} guard reads write-only port {n!r}", c.span)
            targets = [u.target for u in c.updates]
            if len(set(targets)) != len(targets):
                raise ModelError(f"command {c.name}: a variable is assigned twice", c.span)
            for u in c.updates:
                if u.target not in self.var:
                    raise ModelError(f"command {c.name}: unknown target {u.target!r}", c.span)
                tv = self.var[u.target]
                if not tv.writable:
                    raise ModelError(
                        f"mode violation: command {c.name} assigns read-only port {u.target!r}", c.span)
                if isinstance(u.source, ex.VarRef):
                    sv = self.var.get(u.source.name)
                    if sv is None:
                        raise ModelError(f"command {c.name}: unknown variable {u.source.name!r}", c.span)
                    if not sv.readable:
                        raise ModelError(
                            f"mode violation: command {c.name} copies write-only port {sv.name!r}", c.span)
                    if sv.domain.values != tv.domain.values:
                        raise ModelError(f"command {c.name}: domain mismatch in {u.target} := {sv.name}", c.span)
                elif u.source.name not in tv.domain.values:
                    raise ModelError(
                        f"command {c.name}: {u.source.name!r} is not a value of {u.target!r}", c.span)

    # -- compiled semantics -------------------------------------------------

    @cached_property
    def init_fn(self):
        return ex.compile_expr(self.init, self.slots, self.domains)

    @cached_property
    def compiled_commands(self):
        out = []
        for c in self.commands:
            guard = ex.compile_expr(c.guard, self.slots, self.domains)
            plan = []
            for u in c.updates:
                t = self.slots[u.target]
                if isinstance(u.source, ex.VarRef):
                    plan.append((t, True, self.slots[u.source.name]))
                else:
                    plan.append((t, False, self.var[u.target].domain.values.index(u.source.name)))
            out.append((c.name, guard, tuple(plan)))
        return tuple(out)

    @cached_property
    def compiled_props(self):
        return {name: ex.compile_expr(e, self.slots, self.domains) for name, e in self.props}

    def compile(self, e):
        return ex.compile_expr(e, self.slots, self.domains)

    def step(self, values):
        """Successors of a flat valuation: list of (command name, values)."""
        out = []
        for name, guard, plan in self.compiled_commands:
            if guard(values):
                new = list(values)
                for t, is_var, src in plan:
                    new[t] = values[src] if is_var else src
                out.append((name, tuple(new)))
        return out

    def all_valuations(self):
        return product(*(range(len(v.domain.values)) for v in self.internals + self.ports))


@dataclass(frozen=True)
class NodeAssignment:
    template: ProcessTemplate
    ports: tuple  # ((port, edge), ...) in template port order


class LocalState(NamedTuple):
    node: str
    values: tuple


class GlobalState(NamedTuple):
    internals: tuple  # one tuple per node, network node order
    edges: tuple  # network edge order


@dataclass(frozen=True)
class NetworkGraph:
    nodes: tuple
    edges: tuple
    in_conn: frozenset
    out_conn: frozenset

    def connected(self, n):
        return {e for (m, e) in self.in_conn | self.out_conn if m == n}

    def neighbors(self, n):
        es = self.connected(n)
        return {m for (m, e) in self.in_conn | self.out_conn if e in es and m != n}

    def points_to(self, m, n):
        outs = {e for (k, e) in self.out_conn if k == m}
        return any((n, e) in self.in_conn for e in outs)


@dataclass(frozen=True)
class ProcessNetwork:
    name: str
    nodes: tuple
    edges: tuple  # ((edge, Domain), ...)
    assignment: tuple  # ((node, NodeAssignment), ...)
    initially: object = None
    span: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        self._validate()

    def _validate(self):
        if len(set(self.nodes)) != len(self.nodes):
            raise ModelError(f"network {self.name}: duplicate node", self.span)
        edge_names = [e for e, _ in self.edges]
        if len(set(edge_names)) != len(edge_names):
            raise ModelError(f"network {self.name}: duplicate edge", self.span)
        if set(dict(self.assignment)) != set(self.nodes):
            raise ModelError(f"network {self.name}: every node needs exactly one template", self.span)
        dom = dict(self.edges)
        used = set()
        for n, a in self.assignment:
            bound = dict(a.ports)
            missing = [p for p in a.template.port_names if p not in bound]
            if missing:
                raise ModelError(f"network {self.name}: node {n} leaves ports {missing} unconnected", self.span)
            if set(bound) - set(a.template.port_names):
                raise ModelError(f"network {self.name}: node {n} binds unknown ports "
                                 f"{sorted(set(bound) - set(a.template.port_names))}", self.span)
            edges = [e for _, e in a.ports]
            if len(set(edges)) != len(edges):
                raise ModelError(f"network {self.name}: node {n} binds one edge to two ports", self.span)
            for p, e in a.ports:
                if e not in dom:
                    raise ModelError(f"network {self.name}: unknown edge {e!r}", self.span)
                if dom[e].values != a.template.var[p].domain.values:
                    raise ModelError(f"network {self.name}: edge {e} and port {n}.{p} disagree on domain",
                                     self.span)
                used.add(e)
        unused = [e for e in edge_names if e not in used]
        if unused:
            raise ModelError(f"network {self.name}: edges {unused} connect no node", self.span)
        if self.initially is not None:
            unknown = ex.names(self.initially) - set(edge_names)
            if unknown:
                raise ModelError(f"network {self.name}: initially may only mention edges, got {sorted(unknown)}",
                                 self.span)

    # -- structure ----------------------------------------------------------

    @cached_property
    def node_index(self):
        return {n: i for i, n in enumerate(self.nodes)}

    @cached_property
    def edge_index(self):
        return {e: i for i, (e, _) in enumerate(self.edges)}

    @cached_property
    def edge_domain(self):
        return dict(self.edges)

    @cached_property
    def _assign(self):
        return dict(self.assignment)

    def template(self, n) -> ProcessTemplate:
        try:
            return self._assign[n].template
        except KeyError:
            raise KeyError(f"unknown node {n!r}") from None

    def port_edges(self, n):
        """Edges of ``n`` in its template's port order."""
        return tuple(e for _, e in self._assign[n].ports)

    def port_of(self, n, e):
        for p, f in self._assign[n].ports:
            if f == e:
                return p
        raise KeyError(f"edge {e!r} not connected to {n!r}")

    def edge_of(self, n, port):
        return dict(self._assign[n].ports)[port]

    @cached_property
    def graph(self) -> NetworkGraph:
        ins, outs = set(), set()
        for n, a in self.assignment:
            for p, e in a.ports:
                mode = a.template.var[p].mode
                if mode in ("read", "readwrite"):
                    ins.add((n, e))
                if mode in ("write", "readwrite"):
                    outs.add((n, e))
        return NetworkGraph(self.nodes, tuple(e for e, _ in self.edges), frozenset(ins), frozenset(outs))

    def in_edges(self, n):
        return frozenset(e for (m, e) in self.graph.in_conn if m == n)

    def out_edges(self, n):
        return frozenset(e for (m, e) in self.graph.out_conn if m == n)

    @cached_property
    def _edge_nodes(self):
        out = {e: [] for e, _ in self.edges}
        for n in self.nodes:
            for e in self.port_edges(n):
                out[e].append(n)
        return out

    def edge_nodes(self, e):
        return tuple(self._edge_nodes[e])

    @cached_property
    def _neighbors(self):
        out = {}
        for n in self.nodes:
            ms = set()
            for e in self.port_edges(n):
                ms.update(self._edge_nodes[e])
            ms.discard(n)
            out[n] = tuple(m for m in self.nodes if m in ms)
        return out

    def neighbors(self, n):
        return self._neighbors[n]

    def shared_edges(self, m, n):
        em = set(self.port_edges(m))
        return tuple(e for e in self.port_edges(n) if e in em)

    def points_to(self, m, n):
        return self.graph.points_to(m, n)

    # -- state helpers ------------------------------------------------------

    def edge_positions(self, n):
        """Positions of ``n``'s port edges inside its LocalState values."""
        k = self.template(n).n_internal
        return {e: k + i for i, e in enumerate(self.port_edges(n))}

    def edge_value(self, s: LocalState, e):
        return s.values[self.edge_positions(s.node)[e]]

    def describe(self, s: LocalState) -> dict:
        """Readable valuation: internal variables and ports by name."""
        t = self.template(s.node)
        return {v.name: v.domain.values[x] for v, x in zip(t.internals + t.ports, s.values)}

    def local_text(self, s: LocalState) -> str:
        d = self.describe(s)
        return f"{s.node}(" + ", ".join(f"{k}={v}" for k, v in d.items()) + ")"

    def project(self, g: GlobalState, n) -> LocalState:
        i = self.node_index[n]
        idx = self.edge_index
        return LocalState(n, g.internals[i] + tuple(g.edges[idx[e]] for e in self.port_edges(n)))

    def global_text(self, g: GlobalState) -> dict:
        out = {}
        for n in self.nodes:
            t = self.template(n)
            out[n] = {v.name: v.domain.values[x] for v, x in zip(t.internals, g.internals[self.node_index[n]])}
        out["edges"] = {e: d.values[x] for (e, d), x in zip(self.edges, g.edges)}
        return out

    @cached_property
    def initially_partial(self):
        if self.initially is None:
            return None
        slots = self.edge_index
        doms = {e: d.values for e, d in self.edges}
        return ex.compile_partial(self.initially, slots, doms)


def enumerate_local_states(net: ProcessNetwork, n) -> frozenset:
    t = net.template(n)
    return frozenset(LocalState(n, v) for v in t.all_valuations())


def initial_local_states(net: ProcessNetwork, n) -> frozenset:
    t = net.template(n)
    f = t.init_fn
    return frozenset(LocalState(n, v) for v in t.all_valuations() if f(v))


def step_successors(net: ProcessNetwork, n, s: LocalState) -> frozenset:
    t = net.template(n)
    return frozenset((c, LocalState(n, v)) for c, v in t.step(s.values))


def is_joint(net, s: LocalState, u: LocalState) -> bool:
    ps, pu = net.edge_positions(s.node), net.edge_positions(u.node)
    return all(s.values[ps[e]] == u.values[pu[e]] for e in net.shared_edges(s.node, u.node))


def interference_successors(net: ProcessNetwork, n, s: LocalState, m, u: LocalState) -> frozenset:
    """Effect on ``s`` of every step of neighbour ``m`` from joint state (s, u)."""
    if m not in net.neighbors(n):
        raise ModelError(f"{m} is not a neighbour of {n}")
    if not is_joint(net, s, u):
        raise ModelError(f"({net.local_text(s)}, {net.local_text(u)}) disagree on a shared edge")
    ps, pu = net.edge_positions(n), net.edge_positions(m)
    shared = [(ps[e], pu[e]) for e in net.shared_edges(n, m)]
    out = set()
    for c, u2 in step_successors(net, m, u):
        new = list(s.values)
        for i, j in shared:
            new[i] = u2.values[j]
        out.add((c, (LocalState(n, tuple(new)), u2)))
    return frozenset(out)


def apply_local(net: ProcessNetwork, g: GlobalState, s: LocalState) -> GlobalState:
    """Overwrite node ``s.node``'s variables in ``g`` with ``s``."""
    n = s.node
    i = net.node_index[n]
    k = net.template(n).n_internal
    internals = g.internals[:i] + (s.values[:k],) + g.internals[i + 1:]
    edges = list(g.edges)
    for e, v in zip(net.port_edges(n), s.values[k:]):
        edges[net.edge_index[e]] = v
    return GlobalState(internals, tuple(edges))


class _Enough(Exception):
    pass


def join_states(net: ProcessNetwork, candidates, constraint=None, cap=None, limit=None):
    """All global states whose node projections come from ``candidates``.

    ``candidates`` maps each node to an iterable of its LocalStates. Nodes are
    joined in network order; partial valuations are pruned by edge agreement
    and by the three-valued ``constraint`` over edges.
    """
    order = list(net.nodes)
    cands = {n: sorted(candidates[n]) for n in order}
    positions = {n: [(net.edge_index[e], p) for e, p in net.edge_positions(n).items()] for n in order}
    ks = {n: net.template(n).n_internal for n in order}
    edges = [None] * len(net.edges)
    internals = [None] * len(order)
    out = []

    def rec(i):
        if i == len(order):
            if constraint is None or constraint(edges) is True:
                out.append(GlobalState(tuple(internals), tuple(edges)))
                if limit is not None and len(out) >= limit:
                    raise _Enough
                if cap is not None and len(out) > cap:
                    raise CapExceeded(f"more than {cap} global states")
            return
        n = order[i]
        for s in cands[n]:
            assigned = []
            ok = True
            for gi, p in positions[n]:
                cur = edges[gi]
                if cur is None:
                    edges[gi] = s.values[p]
                    assigned.append(gi)
                elif cur != s.values[p]:
                    ok = False
                    break
            if ok and (constraint is None or constraint(edges) is not False):
                internals[i] = s.values[:ks[n]]
                rec(i + 1)
            for gi in assigned:
                edges[gi] = None

    try:
        rec(0)
    except _Enough:
        pass
    return out


def global_initial(net: ProcessNetwork, cap=None) -> frozenset:
    cands = {n: initial_local_states(net, n) for n in net.nodes}
    return frozenset(join_states(net, cands, net.initially_partial, cap))


def global_successors(net: ProcessNetwork, g: GlobalState) -> frozenset:
    out = set()
    for n in net.nodes:
        s = net.project(g, n)
        for _, s2 in step_successors(net, n, s):
            out.add((n, apply_local(net, g, s2)))
    return frozenset(out)


class Reachable(NamedTuple):
    states: list  # BFS order
    index: dict
    initial: frozenset
    edges: list  # (src idx, actor, dst idx)
    parent: dict  # idx -> (parent idx, actor) for trace reconstruction


def reachable(net: ProcessNetwork, cap: int = 10**6) -> Reachable:
    init = global_initial(net, cap)
    states = sorted(init)
    index = {g: i for i, g in enumerate(states)}
    parent = {}
    edges = []
    queue = deque(range(len(states)))
    while queue:
        i = queue.popleft()
        g = states[i]
        for n, g2 in sorted(global_successors(net, g)):
            j = index.get(g2)
            if j is None:
                j = len(states)
                if j >= cap:
                    raise CapExceeded(f"more than {cap} reachable global states")
                index[g2] = j
                states.append(g2)
                parent[j] = (i, n)
                queue.append(j)
            edges.append((i, n, j))
    return Reachable(states, index, init, edges, parent)


def trace_to(r: Reachable, j: int):
    """Alternating [state, actor, state, ...] path from an initial state to ``j``."""
    path = [j]
    while j in r.parent:
        j, n = r.parent[j]
        path[:0] = [j, n]
    return path
