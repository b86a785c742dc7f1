import math

import pytest

from localmu.report import EQUALS_LOCAL, HOLDS_GLOBALLY, LOCAL_ONLY, check, counting_report, transfer_verdict

from conftest import doc_of


@pytest.mark.parametrize("local, universal, outward, kind, verdict", [
    (True, True, False, "holds-globally", True),
    (False, True, True, "equals-local", False),
    (True, False, True, "equals-local", True),
    (False, True, False, "local-only", None),
    (True, False, False, "local-only", None),
])
def test_transfer_table(local, universal, outward, kind, verdict):
    c = transfer_verdict(local, universal, outward)
    assert c.kind == kind and c.global_verdict is verdict
    assert c.text in {HOLDS_GLOBALLY, EQUALS_LOCAL, LOCAL_ONLY}


def test_broken_model_gives_trace():
    rep = check(doc_of("broken.lmu"), "mutex", oracle_cap=10**5)
    assert not rep.passed
    bad = [r for r in rep.results if r.oracle and not r.oracle["holds"]]
    assert bad and len(bad[0].oracle["trace"]) >= 1


def test_inline_formula_and_single_node():
    rep = check(doc_of("ring3.lmu"), "AG (state == E -> xin == tok)", node="p2")
    assert [r.node for r in rep.results] == ["p2"] and rep.passed


def test_report_json_shape():
    js = check(doc_of("red_black_ring.lmu"), "mutex").to_json()
    assert js["classes"] and js["results"][0]["claim"]["kind"] == "holds-globally"


def test_counting_small_values():
    r = counting_report(3, 6, 2)
    assert r.counter_size == math.comb(8, 6) == 28
    assert r.two_to_m == 8 and r.local_size == 9


def test_counting_rejects_nonsense():
    with pytest.raises(ValueError):
        counting_report(0, 3, 1)
