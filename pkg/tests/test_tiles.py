import pytest

from localmu import ModelError
from localmu import balance as B
from localmu.tiles import FAMILIES, check_tileset, generate, induced_balance, validate_instance

from conftest import doc_of


@pytest.mark.parametrize("fam, params", [("ring", (5,)), ("red_black_ring", (6,)), ("torus", (3, 4))])
def test_generated_instances_validate(fam, params):
    fi = generate(fam, *params)
    assert validate_instance(fi.tileset, fi.net, fi.typing)


def test_torus_shape():
    fi = generate("torus", 3, 4)
    assert len(fi.net.nodes) == 12 and len(fi.net.edges) == 24
    assert all(len(fi.net.neighbors(n)) == 4 for n in fi.net.nodes)


def test_token_count_constraint():
    from localmu.model import global_initial
    net = generate("ring", 4, tokens=2).net
    assert len(global_initial(net)) == 6  # choose 2 of 4 edges


def test_induced_balance_class_per_tile_type():
    fi = generate("red_black_ring", 8)
    classes = B.representatives(fi.net, induced_balance(fi.tileset, fi.net, fi.typing)).classes
    assert sorted(len(c) for c in classes) == [4, 4]


def test_mistyped_instance_rejected():
    fi = generate("red_black_ring", 4)
    typing = dict(fi.typing)
    typing["p0"], typing["p1"] = typing["p1"], typing["p0"]
    rep = validate_instance(fi.tileset, fi.net, typing)
    assert not rep and rep.node is not None and rep.reason


def test_bad_tileset_rejected():
    doc = doc_of("ring3.lmu")
    ts = doc.tilesets["Ring"]
    with pytest.raises(ModelError):
        check_tileset(ts, {})


def test_unknown_family():
    assert set(FAMILIES) == {"ring", "red_black_ring", "torus"}
    with pytest.raises((KeyError, ValueError)):
        generate("hypercube", 3)
