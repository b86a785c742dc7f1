import networkx as nx
import pytest
from networkx.algorithms.isomorphism import GraphMatcher

from localmu import balance as B
from localmu.tiles import generate

from conftest import BUNDLED, setup


def _cr_graph(cr):
    g = nx.Graph()
    g.add_nodes_from(cr.nodes)
    g.add_edges_from(cr.edges)
    return g


@pytest.mark.parametrize("fam, params", [("ring", (3,)), ("ring", (4,)), ("ring", (6,)),
                                         ("red_black_ring", (4,)), ("torus", (3, 3))])
def test_automorphisms_match_networkx(fam, params):
    net = generate(fam, *params).net
    cr = B.communication_relation(net)
    ours = B.find_automorphisms(cr, cap=10**4)
    theirs = list(GraphMatcher(_cr_graph(cr), _cr_graph(cr)).isomorphisms_iter())
    key = lambda d: tuple(sorted(d.items()))  # noqa: E731
    assert sorted(map(key, ours)) == sorted(map(key, theirs))


@pytest.mark.parametrize("name", BUNDLED)
def test_largest_balance_is_a_groupoid(name):
    _, net, lb, _, _ = setup(name)
    assert B.is_balance_relation(net, lb)
    for n in net.nodes:
        assert B.identity(net, n) in lb
    for t in lb:
        assert t.inverse() in lb
    by_src = {}
    for t in lb:
        by_src.setdefault(t.m, []).append(t)
    for t in lb:
        for u in by_src.get(t.n, []):
            assert t.compose(u) in lb or u.compose(t) in lb


@pytest.mark.parametrize("name", ["ring3.lmu", "red_black_ring.lmu", "dining_phil.lmu"])
def test_largest_balance_is_maximal(name):
    _, net, lb, _, _ = setup(name)
    for m in net.nodes:
        for n in net.nodes:
            for t in B.enumerate_similarities(net, m, n) - lb:
                assert not B.is_balance_relation(net, lb | {t, t.inverse()})


def test_largest_balance_independent_of_order():
    net = generate("torus", 3, 3).net
    assert B.largest_balance(net) == B.largest_balance(net, shuffle_seed=7)


def test_rotation_balance_is_valid_and_contained():
    net = generate("ring", 4).net
    pi = {f"p{i}": f"p{(i + 1) % 4}" for i in range(4)}
    rot = B.balance_from_automorphism(net, pi)
    assert len(rot) == 4
    assert rot <= B.largest_balance(net)


def test_representatives_are_least_and_gamma_maps_rep():
    _, net, lb, scheme, _ = setup("red_black_ring.lmu")
    for cls in scheme.classes:
        r = min(cls, key=B.natural_key)
        for n in cls:
            assert scheme.rep[n] == r
            assert scheme.gamma[n].m == r and scheme.gamma[n].n == n
            assert scheme.gamma[n] in lb


def test_non_transitive_relation_rejected():
    net = generate("ring", 3).net
    t01 = next(t for t in B.largest_balance(net) if (t.m, t.n) == ("p0", "p1"))
    partial = {B.identity(net, n) for n in net.nodes} | {t01, t01.inverse()}
    t12 = next(t for t in B.largest_balance(net) if (t.m, t.n) == ("p1", "p2"))
    with pytest.raises(B.BalanceError):
        B.representatives(net, partial | {t12, t12.inverse()})


def test_pointing_condition_detects_bad_triple():
    net = generate("red_black_ring", 4).net
    bogus = {B.identity(net, n) for n in net.nodes}
    # a red and a black node never have isomorphic templates
    assert B.enumerate_similarities(net, "p0", "p1") == frozenset()
    assert B.is_balance_relation(net, bogus)


def test_natural_key_orders_numbers():
    assert sorted(["p10", "p2", "p1"], key=B.natural_key) == ["p1", "p2", "p10"]


def test_ring_is_normal():
    assert B.is_normal(generate("ring", 5).net)


def test_missing_inverse_reported():
    _, net, lb, _, _ = setup("ring3.lmu")
    t = next(t for t in sorted(lb, key=repr) if t.m != t.n)
    rep = B.is_balance_relation(net, lb - {t.inverse()})
    assert not rep and rep.triple is not None and rep.reason
