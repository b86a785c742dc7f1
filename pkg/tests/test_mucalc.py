import pytest

from localmu import mucalc as mc
from localmu.dsl import parse_formula
from localmu.spaces import TAU, LabeledTS
from localmu.tiles import bundled_model

P, Q = mc.Prop("p"), mc.Prop("q")


@pytest.fixture
def chain():
    # 0 -tau-> 1 -a-> 2 -b-> 3 (deadlock made total by a tau loop)
    return LabeledTS.from_edges(4, {0}, {(0, TAU, 1), (1, "a", 2), (2, "b", 3), (3, TAU, 3)},
                                {"p": {0, 1}, "q": {2}}, alphabet=("a", "b"))


def test_eu_follows_tau_then_label(chain):
    assert mc.evaluate(mc.EU(P, "a", Q), chain) == {0, 1}
    assert mc.evaluate(mc.EU(P, "b", Q), chain) == set()


def test_eu_requires_phi_along_the_way(chain):
    lts = LabeledTS.from_edges(4, {0}, chain.transitions, {"p": {1}, "q": {2}}, alphabet=("a", "b"))
    assert mc.evaluate(mc.EU(P, "a", Q), lts) == {1}


def test_derived_modalities(chain):
    assert mc.evaluate(mc.Modal("EF", None, Q), chain) == {0, 1, 2}
    assert mc.evaluate(mc.Modal("AG", None, mc.Not(Q)), chain) == {3}
    assert mc.evaluate(mc.Modal("AF", ("b",), mc.Const(True)), chain) == {0, 1, 2, 3}
    assert mc.evaluate(mc.Modal("EG", None, P), chain) == set()


def test_fixpoints(chain):
    # mu Z. q or E[true U_a Z] or E[true U_b Z] is EF q
    ef = mc.Mu("Z", mc.Or(Q, mc.disj([mc.EU(mc.TRUE, a, mc.Var("Z")) for a in "ab"])))
    assert mc.evaluate(ef, chain) == mc.evaluate(mc.Modal("EF", None, Q), chain)


def test_expand_derived_is_core_only():
    f = parse_formula("AG (inE -> EF[self] hungry) && A[inE W[xin] hungry]", bundled_model("ring3.lmu").templates["Phil"])
    core = mc.expand_derived(f, ("self", "xin", "xout"))
    kinds = {type(g) for g in mc.subformulas(core)}
    assert kinds <= {mc.Const, mc.Prop, mc.Var, mc.Not, mc.And, mc.EU, mc.Mu}


def test_nnf_and_universality():
    assert mc.is_universal(mc.Modal("AG", None, P))
    assert not mc.is_universal(mc.Modal("EF", None, P))
    assert mc.is_universal(mc.Not(mc.EU(P, "a", Q)))
    nnf = mc.to_nnf(mc.Not(mc.Modal("AG", None, P)), ("a",))
    assert all(isinstance(g.arg, (mc.Prop, mc.Const, mc.Var)) for g in mc.subformulas(nnf) if isinstance(g, mc.Not))


def test_non_monotone_binder_rejected():
    with pytest.raises(mc.FormulaError):
        mc.check_monotone(mc.Mu("Z", mc.Not(mc.Var("Z"))))


def test_holds_needs_closed_formula(chain):
    with pytest.raises(mc.EvaluationError):
        mc.holds(mc.Var("Z"), chain)
    with pytest.raises(mc.EvaluationError):
        mc.evaluate(mc.EU(P, "zz", Q), chain)


def test_holds_checks_initial_states(chain):
    assert mc.holds(mc.EU(P, "a", Q), chain)
    assert not mc.holds(Q, chain)
