import pytest

from localmu import compositional as C
from localmu.model import step_successors

from conftest import BUNDLED, doc_of, setup


@pytest.mark.parametrize("name", BUNDLED)
def test_invariant_is_compositional_and_covers_reachable(name):
    _, net, _, _, inv = setup(name)
    assert C.check_compositional(net, inv)
    proj = C.reachable_projections(net)
    th = inv.materialize()
    for n in net.nodes:
        assert proj[n] <= th[n]


@pytest.mark.parametrize("name", ["ring3.lmu", "red_black_ring.lmu", "non_outward.lmu"])
def test_invariant_is_least(name):
    # dropping any state breaks one of the closure rules
    _, net, _, _, inv = setup(name)
    th = inv.materialize()
    for n in sorted(net.nodes)[:2]:
        for s in sorted(th[n])[:6]:
            smaller = dict(th)
            smaller[n] = th[n] - {s}
            assert not C.check_compositional(net, smaller)


def test_step_violation_reported():
    _, net, _, _, inv = setup("ring3.lmu")
    th = inv.materialize()
    s = next(s for s in sorted(th["p0"]) if step_successors(net, "p0", s))
    _, s2 = sorted(step_successors(net, "p0", s))[0]
    th["p0"] = th["p0"] - {s2} if s2 not in C.initial_projections(net)["p0"] else th["p0"]
    rep = C.check_compositional(net, th)
    assert not rep and rep.rule in {"Step", "Non-Interference", "Init"}


def test_oracle_failure_kinds():
    _, net, _, _, inv = setup("ring3.lmu")
    th = inv.materialize()
    reach = C.reachable_projections(net)
    # p1 shrunk to its reachable projection: others still admit a two-token state that p1 breaks
    th["p1"] = reach["p1"]
    rep = C.global_invariant_oracle(net, th)
    assert not rep and rep.kind == "inductive"
    assert net.project(rep.successor, rep.node) not in th[rep.node]
    th["p1"] = frozenset(sorted(reach["p1"])[1:])
    rep = C.global_invariant_oracle(net, th)
    assert not rep and rep.kind == "reachable" and rep.trace


def test_respects_invariant():
    _, net, lb, _, inv = setup("torus_tile.lmu")
    assert C.respects_invariant(net, inv, lb)


def test_scheme_checked_against_initial_states():
    doc = doc_of("ring_2tok_4.lmu")
    net = doc.network()
    assert C.strongest_compositional_invariant(net).materialize()["p0"]
