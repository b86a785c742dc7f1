import pytest

from localmu.balance import BalanceError

from localmu import relations as R
from localmu.spaces import TAU, LabeledTS, build_local_space

from conftest import setup


def lts(n, trans, props=None, init=(0,)):
    return LabeledTS.from_edges(n, set(init), trans, props or {}, alphabet=("a", "b"))


def test_strong_vs_stuttering():
    one = lts(2, {(0, "a", 1), (1, TAU, 1)})
    two = lts(3, {(0, TAU, 1), (1, "a", 2), (2, TAU, 2)})
    assert not R.check_strong_bisimulation(one, two)
    assert R.check_stuttering_bisimulation(one, two)


def test_simulation_is_one_way():
    small = lts(2, {(0, "a", 1), (1, TAU, 1)})
    big = lts(3, {(0, "a", 1), (0, "b", 2), (1, TAU, 1), (2, TAU, 2)})
    assert R.check_strong_simulation(small, big)
    assert not R.check_strong_simulation(big, small)
    v = R.check_strong_simulation(big, small)
    assert v.move is not None and v.move[1] == "b"


def test_propositions_must_agree():
    a = lts(1, {(0, TAU, 0)}, {"p": {0}})
    b = lts(1, {(0, TAU, 0)}, {"p": set()})
    assert not R.check_stuttering_bisimulation(a, b)


def test_tau_path_must_stay_related():
    # a tau step into a state with different propositions is visible
    a = lts(3, {(0, TAU, 1), (1, "a", 2), (2, TAU, 2)}, {"p": {0}})
    b = lts(2, {(0, "a", 1), (1, TAU, 1)}, {"p": {0}})
    assert not R.check_stuttering_bisimulation(a, b)


def test_label_map_renames():
    a = lts(2, {(0, "a", 1), (1, TAU, 1)})
    b = lts(2, {(0, "b", 1), (1, TAU, 1)})
    assert not R.check_strong_bisimulation(a, b)
    assert R.check_strong_bisimulation(a, b, label_map={"a": "b"})


def test_beta_bisimulation_detects_renamed_edges():
    _, net, lb, _, inv = setup("ring3.lmu")
    t = next(t for t in sorted(lb, key=repr) if t.m != t.n)
    H = {n: build_local_space(net, inv, n) for n in net.nodes}
    assert R.check_bisimulation_up_to_beta(H[t.m], H[t.n], t.mapping, net)
    # xin and xout swapped is not a similarity
    m_edges = sorted(t.mapping)
    swapped = {m_edges[0]: t.mapping[m_edges[1]], m_edges[1]: t.mapping[m_edges[0]]}
    with pytest.raises(BalanceError):
        R.check_bisimulation_up_to_beta(H[t.m], H[t.n], swapped, net)


def test_local_space_simulates_global():
    _, net, _, _, inv = setup("red_black_ring.lmu")
    assert R.check_local_simulates_global(net, inv, "p0")
    assert R.check_local_simulates_global(net, inv, "p1")


def test_outward_facing_counterexample_is_readable():
    _, net, _, _, inv = setup("non_outward.lmu")
    bad = [v for v in R.outward_pairs(net, inv).values() if not v]
    assert bad and bad[0].text and bad[0].to_json()["counterexample"]


def test_handshake_is_outward_facing_and_bisimilar():
    _, net, _, scheme, inv = setup("handshake.lmu")
    assert all(R.outward_pairs(net, inv).values())
    for r in scheme.representatives:
        assert R.check_local_global_bisimilar(net, inv, r)
        # without quiet labelling a neighbour's no-op move shows up as a visible action
        assert not R.check_local_global_bisimilar(net, inv, r, quiet=False)


def test_guarded_check_refuses_without_precondition():
    _, net, _, _, inv = setup("ring3.lmu")
    with pytest.raises(R.RelationError):
        R.check_local_global_bisimilar(net, inv, "p0")


def test_non_neighbours_rejected():
    _, net, _, _, inv = setup("ring5.lmu")
    with pytest.raises(R.RelationError):
        R.check_outward_facing(net, inv, "p0", "p2")
