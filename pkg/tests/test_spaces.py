import pytest

from localmu.spaces import SELF, TAU, build_global_space, build_local_space, ensure_total, label_port, \
    LabeledTS, projection_map

from conftest import setup


def test_three_ring_global_space_has_no_tau():
    _, net, _, _, _ = setup("ring3.lmu")
    G = build_global_space(net, "p0")
    assert TAU not in G.label_counts()


def test_five_ring_tau_only_from_distant_nodes():
    _, net, _, _, _ = setup("ring5.lmu")
    G = build_global_space(net, "p0", total=False)
    from localmu.model import reachable
    r = reachable(net)
    tau_actors = {a for i, a, j in r.edges if a not in ("p0",) + tuple(net.neighbors("p0"))}
    assert tau_actors == {"p2", "p3"}
    assert G.label_counts()[TAU] > 0


def test_local_space_labels():
    _, net, _, _, inv = setup("ring3.lmu")
    H = build_local_space(net, inv, "p0")
    labels = set(H.label_counts())
    assert SELF in labels
    assert labels - {SELF, TAU} <= {label_port(net, "p0", m) for m in net.neighbors("p0")}
    assert {H.payloads[i] for i in range(H.size)} == inv.theta("p0")


def test_projection_map_lands_in_local_space():
    _, net, _, _, inv = setup("red_black_ring.lmu")
    G = build_global_space(net, "p0")
    H = build_local_space(net, inv, "p0")
    proj = projection_map(net, G, "p0")
    assert all(p in H.index for p in proj)


def test_totalization_adds_tau_self_loops():
    lts = LabeledTS.from_edges(3, {0}, {(0, "a", 1)}, {}, alphabet=("a",))
    tot = ensure_total(lts)
    assert set(tot.totalized) == {1, 2}
    assert {(1, TAU, 1), (2, TAU, 2)} <= tot.transitions
    assert ensure_total(tot) is tot


def test_quiet_interference_labelled_tau():
    _, net, _, _, inv = setup("ring3.lmu")
    loud = build_local_space(net, inv, "p0")
    quiet = build_local_space(net, inv, "p0", quiet=True)
    assert loud.size == quiet.size
    assert sum(quiet.label_counts().values()) <= sum(loud.label_counts().values())


def test_dump_lists_states():
    _, net, _, _, inv = setup("ring3.lmu")
    H = build_local_space(net, inv, "p0")
    text = H.dump(net.local_text)
    assert text.count("\n#") >= H.size - 1
