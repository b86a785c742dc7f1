import pytest
from hypothesis import given, settings, strategies as st

from localmu import ParseError, parse_formula, parse_model, pretty_print
from localmu import mucalc as mc
from localmu.tiles import bundled_model

from conftest import BUNDLED, doc_of

SMALL = """
domain Bit { off, on }
template Cell {
  internal st { a, b }
  port x : Bit readwrite
  init st == a
  trans go: st == a && x == off -> st := b, x := on
  prop done := st == b
  formula ok := AG (done -> x == on)
}
network two {
  node c0 c1 : Cell
  edge w : Bit
  connect c0 { x = w }
  connect c1 { x = w }
}
"""


def test_parses_small_model():
    doc = parse_model(SMALL)
    net = doc.network()
    assert net.nodes == ("c0", "c1")
    assert set(doc.formulas) == {"ok"}
    assert tuple(net.neighbors("c0")) == ("c1",)


@pytest.mark.parametrize("name", BUNDLED)
def test_pretty_print_round_trip(name):
    doc = doc_of(name)
    again = parse_model(pretty_print(doc))
    assert again.networks.keys() == doc.networks.keys()
    assert {k: f.formula for k, f in again.formulas.items()} == {k: f.formula for k, f in doc.formulas.items()}
    for k, net in doc.networks.items():
        assert again.networks[k].nodes == net.nodes
        assert again.networks[k].edges == net.edges
    assert pretty_print(again) == pretty_print(doc)


@pytest.mark.parametrize("text, kind, line", [
    ("domain Bit { off, on ", "syntax", 1),
    ("domain Bit { off, on }\ntemplate T {\n  internal s { a }\n  init s == zz\n}", None, 4),
    ("domain Bit { off $ on }", "lexical", 1),
])
def test_diagnostics_carry_spans(text, kind, line):
    with pytest.raises(ParseError) as err:
        parse_model(text, "m.lmu")
    d = err.value.diagnostics[0]
    assert d.span is not None and d.span.file == "m.lmu" and d.span.line == line
    if kind:
        assert d.kind == kind


def test_unknown_port_in_connect():
    bad = SMALL.replace("connect c1 { x = w }", "connect c1 { y = w }")
    with pytest.raises(ParseError):
        parse_model(bad)


def _formulas():
    atom = st.sampled_from(["inE", "hungry", "true", "false", "state == T", "xin == tok"])
    labels = st.sampled_from(["self", "xin", "xout"])

    def grow(sub):
        return st.one_of(
            st.builds(lambda a: f"!({a})", sub),
            st.builds(lambda a, b: f"({a}) && ({b})", sub, sub),
            st.builds(lambda a, b: f"({a}) || ({b})", sub, sub),
            st.builds(lambda a, lab, b: f"E[({a}) U[{lab}] ({b})]", sub, labels, sub),
            st.builds(lambda op, a: f"{op} ({a})", st.sampled_from(mc.MODAL_OPS), sub),
        )
    return st.recursive(atom, grow, max_leaves=6)


@settings(max_examples=150, deadline=None)
@given(_formulas())
def test_formula_text_round_trip(text):
    t = bundled_model("ring3.lmu").templates["Phil"]
    f = parse_formula(text, t)
    assert parse_formula(mc.to_text(f), t) == f
