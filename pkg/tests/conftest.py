import random
from functools import lru_cache
from itertools import product
from pathlib import Path

import pytest

from localmu import balance as B
from localmu import compositional as C
from localmu.dsl import parse_model
from localmu.spaces import LabeledTS
from localmu.tiles import bundled_model

DATA = Path(__file__).parent / "data"
BUNDLED = ["ring3.lmu", "ring5.lmu", "ring_2tok_4.lmu", "red_black_ring.lmu", "torus_tile.lmu",
           "dining_phil.lmu", "non_outward.lmu"]

ACCEPTANCE = {}


def record(criterion, ok, detail=""):
    ACCEPTANCE[criterion] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@lru_cache(maxsize=None)
def doc_of(name):
    if (DATA / name).exists():
        return parse_model((DATA / name).read_text(), name)
    return bundled_model(name)


@lru_cache(maxsize=None)
def setup(name):
    """(doc, net, largest balance, scheme, invariant) for a bundled or test model."""
    doc = doc_of(name)
    net = doc.network()
    lb = B.largest_balance(net)
    scheme = B.representatives(net, lb)
    inv = C.strongest_compositional_invariant(net, scheme)
    return doc, net, lb, scheme, inv


@pytest.fixture(params=BUNDLED)
def bundled(request):
    return setup(request.param)


def random_lts(rng, n, labels=("a", "b"), density=0.3, props=("p", "q")):
    trans = set()
    for s, t in product(range(n), repeat=2):
        for a in labels + ("tau",):
            if rng.random() < density / len(labels):
                trans.add((s, a, t))
    pmap = {p: {s for s in range(n) if rng.random() < 0.5} for p in props}
    init = {s for s in range(n) if rng.random() < 0.4} or {0}
    return LabeledTS.from_edges(n, init, trans, pmap, alphabet=labels)


def eu_paths(lts, p, a, q):
    """Brute force: states with a path of tau steps inside p followed by an a step into q."""
    out = set()
    succ = {s: [] for s in range(lts.size)}
    for s, lab, t in lts.transitions:
        succ[s].append((lab, t))

    def search(s, seen):
        if s not in p:
            return False
        for lab, t in succ[s]:
            if lab == a and t in q:
                return True
        for lab, t in succ[s]:
            if lab == "tau" and t not in seen and search(t, seen | {t}):
                return True
        return False

    for s in range(lts.size):
        if search(s, {s}):
            out.add(s)
    return out


@pytest.fixture
def rng():
    return random.Random(20261016)
