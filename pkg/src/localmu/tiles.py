"""Tile sets: depth-1 neighbourhood patterns that generate network families."""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from . import expr as ex
from .balance import Similarity
from .model import ModelError, NodeAssignment, ProcessNetwork


@dataclass(frozen=True)
class Tile:
    type: str  # template name
    dirs: tuple  # ((direction, neighbour type, neighbour direction), ...)

    def pattern(self):
        return {d: (t, d2) for d, t, d2 in self.dirs}


@dataclass(frozen=True)
class TileSet:
    name: str
    tiles: tuple
    span: object = field(default=None, compare=False, repr=False)

    def tile(self, type_name) -> Tile:
        for t in self.tiles:
            if t.type == type_name:
                return t
        raise KeyError(f"tile set {self.name} has no tile {type_name!r}")

    @property
    def types(self):
        return tuple(t.type for t in self.tiles)


@dataclass(frozen=True)
class FamilyInstance:
    net: ProcessNetwork
    tileset: TileSet
    typing: dict = field(compare=False)  # node -> tile type

    def direction(self, n, e):
        """Directions are port names."""
        return self.net.port_of(n, e)


@dataclass
class InstanceReport:
    valid: bool
    node: Optional[str] = None
    direction: Optional[str] = None
    reason: str = ""

    def __bool__(self):
        return self.valid


def check_tileset(ts: TileSet, templates: dict) -> None:
    """Raise ModelError unless the tiles are mutually consistent and match the templates."""
    seen = set()
    for tile in ts.tiles:
        if tile.type in seen:
            raise ModelError(f"tile set {ts.name}: duplicate tile {tile.type}")
        seen.add(tile.type)
        if tile.type not in templates:
            raise ModelError(f"tile set {ts.name}: {tile.type} is not a template")
        dirs = [d for d, _, _ in tile.dirs]
        if len(set(dirs)) != len(dirs):
            raise ModelError(f"tile set {ts.name}: duplicate direction in tile {tile.type}")
        ports = set(templates[tile.type].port_names)
        if set(dirs) != ports:
            raise ModelError(f"tile set {ts.name}: directions of {tile.type} must be exactly its ports {sorted(ports)}")
    for tile in ts.tiles:
        t = templates[tile.type]
        for d, other, d2 in tile.dirs:
            if other not in seen:
                raise ModelError(f"tile set {ts.name}: {tile.type}.{d} points to unknown type {other}")
            back = ts.tile(other).pattern().get(d2)
            if back != (tile.type, d):
                raise ModelError(f"tile set {ts.name}: {tile.type}.{d} -> {other}.{d2} is not matched by "
                                 f"{other}.{d2} -> {tile.type}.{d}")
            if t.var[d].domain.values != templates[other].var[d2].domain.values:
                raise ModelError(f"tile set {ts.name}: {tile.type}.{d} and {other}.{d2} disagree on domain")


def validate_instance(ts: TileSet, net: ProcessNetwork, typing: Optional[dict] = None) -> InstanceReport:
    typing = typing or {n: net.template(n).name for n in net.nodes}
    for n in net.nodes:
        ty = typing.get(n)
        if ty not in ts.types:
            return InstanceReport(False, n, None, f"type {ty!r} is not in tile set {ts.name}")
        if net.template(n).name != ty:
            return InstanceReport(False, n, None, f"runs {net.template(n).name}, not an instance of {ty}")
        for d, other, d2 in ts.tile(ty).dirs:
            e = net.edge_of(n, d)
            ends = [k for k in net.edge_nodes(e) if k != n]
            if len(ends) != 1:
                return InstanceReport(False, n, d, f"edge {e} must join exactly one other node")
            k = ends[0]
            if typing.get(k) != other:
                return InstanceReport(False, n, d, f"neighbour {k} has type {typing.get(k)!r}, expected {other}")
            if net.port_of(k, e) != d2:
                return InstanceReport(False, n, d, f"neighbour {k} binds {e} in direction "
                                                   f"{net.port_of(k, e)!r}, expected {d2}")
    return InstanceReport(True)


def induced_balance(ts: TileSet, net: ProcessNetwork, typing: Optional[dict] = None) -> frozenset:
    """Relate same-type nodes by the direction-preserving edge map."""
    typing = typing or {n: net.template(n).name for n in net.nodes}
    report = validate_instance(ts, net, typing)
    if not report:
        raise ModelError(f"not an instance of {ts.name}: node {report.node}, direction "
                         f"{report.direction}: {report.reason}")
    out = set()
    for m in net.nodes:
        for n in net.nodes:
            if typing[m] != typing[n]:
                continue
            beta = tuple(sorted((net.edge_of(m, d), net.edge_of(n, d)) for d in net.template(m).port_names))
            out.add(Similarity(m, beta, n))
    return frozenset(out)


# -- generators ---------------------------------------------------------------

FAMILIES = {
    "ring": ("ring3.lmu", "Ring"),
    "red_black_ring": ("red_black_ring.lmu", "RB"),
    "torus": ("torus_tile.lmu", "Torus"),
}


def bundled_model(name: str):
    from .dsl import parse_model
    text = resources.files("localmu.models").joinpath(name).read_text()
    return parse_model(text, name)


def _build(name, ts, templates, nodes, edges, binds, initially):
    tok = templates[nodes[0][1]].var[binds[nodes[0][0]][0][0]].domain
    assignment = tuple((n, NodeAssignment(templates[ty], tuple(binds[n]))) for n, ty in nodes)
    net = ProcessNetwork(name, tuple(n for n, _ in nodes), tuple((e, tok) for e in edges), assignment, initially)
    inst = FamilyInstance(net, ts, {n: ty for n, ty in nodes})
    report = validate_instance(ts, net, inst.typing)
    if not report:
        raise ModelError(f"generator produced an invalid instance: {report}")
    return inst


def _tokens(edges, k, value="tok"):
    return ex.Exactly(k, tuple(ex.Cmp("==", ex.VarRef(e), ex.ConstRef(value)) for e in edges))


def generate(family: str, *params: int, tokens: int = 1, doc=None) -> FamilyInstance:
    """Instances of the built-in families: ring(N), red_black_ring(2k), torus(W, H)."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {sorted(FAMILIES)}")
    model, ts_name = FAMILIES[family]
    doc = doc or bundled_model(model)
    ts = doc.tilesets[ts_name]
    templates = doc.templates
    if family == "ring":
        (n,) = params
        if n < 2:
            raise ValueError("ring needs N >= 2")
        if not 1 <= tokens <= n:
            raise ValueError("token count must lie in 1..N")
        ty = ts.types[0]
        a, b = _ring_dirs(ts, ty)
        nodes = [(f"p{i}", ty) for i in range(n)]
        edges = [f"e{i}" for i in range(n)]
        binds = {f"p{i}": _order(templates[ty], {a: f"e{i}", b: f"e{(i + 1) % n}"}) for i in range(n)}
        return _build(f"ring{n}", ts, templates, nodes, edges, binds, _tokens(edges, tokens))
    if family == "red_black_ring":
        (n,) = params
        if n < 2 or n % 2:
            raise ValueError("red_black_ring needs an even N >= 2")
        red, black = ts.types
        nodes = [(f"p{i}", red if i % 2 == 0 else black) for i in range(n)]
        edges = [f"e{i}" for i in range(n)]
        binds = {}
        for i, (node, ty) in enumerate(nodes):
            a, b = _ring_dirs(ts, ty)
            binds[node] = _order(templates[ty], {a: f"e{i}", b: f"e{(i + 1) % n}"})
        return _build(f"rb_ring{n}", ts, templates, nodes, edges, binds, _tokens(edges, tokens))
    w, h = params
    if w < 3 or h < 3:
        raise ValueError("torus needs W, H >= 3")
    ty = ts.types[0]
    nodes, binds = [], {}
    edges = [f"h{r}_{c}" for r in range(h) for c in range(w)] + [f"v{r}_{c}" for r in range(h) for c in range(w)]
    for r in range(h):
        for c in range(w):
            node = f"n{r}_{c}"
            nodes.append((node, ty))
            binds[node] = _order(templates[ty], {
                "east": f"h{r}_{c}", "west": f"h{r}_{(c - 1) % w}",
                "south": f"v{r}_{c}", "north": f"v{(r - 1) % h}_{c}",
            })
    return _build(f"torus{w}x{h}", ts, templates, nodes, edges, binds, _tokens(edges, tokens))


def _ring_dirs(ts, ty):
    """A ring tile's directions in declaration order: (incoming, outgoing)."""
    tile = ts.tile(ty)
    if len(tile.dirs) != 2:
        raise ModelError(f"tile {ty} is not a ring tile")
    return tile.dirs[0][0], tile.dirs[1][0]


def _order(template, mapping):
    return [(p, mapping[p]) for p in template.port_names]
