import random

import pytest

from qrc1.calculus import check_derivation
from qrc1.decider import (
    DERIVABLE,
    DeciderConfig,
    UNDECIDED,
    UNDERIVABLE,
    decide,
    derived_ceiling,
    ground_free_variables,
    mdepth_precheck,
    verdict_to_dict,
)
from qrc1.generate import DEFAULT_SIG, random_sequent
from qrc1.syntax import Sequent, Signature, free_vars, mdepth, parse_sequent

SIG = DEFAULT_SIG


def seq(text: str) -> Sequent:
    return parse_sequent(text, SIG)


DERIVABLE_CASES = [
    "T |- T",
    "S(c0) |- T",
    "S(c0) & S(c1) |- S(c1) & S(c0)",
    "<><>S(c0) |- <>S(c0)",
    "<>(A x . S(x)) |- A x . <>S(x)",
    "A x . S(x) |- S(c1)",
    "A x . A y . R(x,y) |- A y . A x . R(x,y)",
    "<>(S(c0) & S(c1)) |- <>S(c0) & <>S(c1)",
    "A y . R(x,y) |- R(x,x)",
    "<><><>T |- <>T",
]

UNDERIVABLE_CASES = [
    "T |- <>T",
    "T |- S(c0)",
    "<>S(c0) |- S(c0)",
    "<>S(c0) |- <><>S(c0)",
    "S(c0) |- A x . S(x)",
    "A x . <>S(x) |- <>(A x . S(x))",
    "S(x) |- <>S(x)",
    "S(x) |- S(c0)",
    "<>S(c0) & <>S(c1) |- <>(S(c0) & S(c1))",
]


@pytest.mark.parametrize("text", DERIVABLE_CASES)
def test_decide_derivable_with_checked_certificate(text):
    s = seq(text)
    v = decide(s, SIG)
    assert v.status == DERIVABLE
    assert v.derivation.conclusion == s
    check_derivation(v.derivation, SIG.with_constants(
        f"@{x}" for x in sorted(free_vars(s.lhs) | free_vars(s.rhs))))


@pytest.mark.parametrize("text", UNDERIVABLE_CASES)
def test_decide_underivable_with_validated_countermodel(text):
    s = seq(text)
    v = decide(s, SIG)
    assert v.status == UNDERIVABLE
    assert v.countermodel.sequent == s
    v.countermodel.validate()


def test_decide_is_cached():
    config = DeciderConfig()
    a = decide(seq("T |- T"), SIG, config)
    b = decide(seq("T |- T"), SIG, config)
    assert a is b


def test_modal_depth_precheck():
    assert mdepth_precheck(seq("T |- <>T"))
    assert not mdepth_precheck(seq("<>T |- <>T"))
    v = decide(seq("T |- <><>T"), SIG)
    assert v.status == UNDERIVABLE
    assert v.stats["precheck_short_circuit"]


def test_grounding_free_variables():
    s = seq("R(x,y) |- S(x)")
    grounded, gsig, pairs = ground_free_variables(s, SIG)
    assert pairs == [("x", "@x"), ("y", "@y")]
    assert not (free_vars(grounded.lhs) | free_vars(grounded.rhs))
    assert set(gsig.constants) >= {"@x", "@y", "c0", "c1"}


def test_derived_ceiling_grows_with_modal_depth():
    w1, d1 = derived_ceiling(seq("<>S(c0) |- S(c0)"), SIG)
    w2, d2 = derived_ceiling(seq("<><>S(c0) |- S(c0)"), SIG)
    assert w2 >= w1 >= 1
    assert d1 >= 1 and d2 >= d1


def test_undecided_when_bounds_are_too_small():
    s = parse_sequent("A x . <>S(x) |- <>(A x . S(x))",
                      Signature(relations=(("S", 1),)))
    config = DeciderConfig(max_rounds=1, max_worlds=1, max_domain=1, prove_cap=3)
    v = decide(s, Signature(relations=(("S", 1),)), config)
    assert v.status == UNDECIDED
    assert v.derivation is None and v.countermodel is None


def test_verdict_document_shape():
    v = decide(seq("T |- <>T"), SIG)
    doc = verdict_to_dict(v, SIG)
    assert doc["status"] == UNDERIVABLE
    assert doc["certificate"]["kind"] == "countermodel"
    v2 = decide(seq("T |- T"), SIG)
    doc2 = verdict_to_dict(v2, SIG)
    assert doc2["certificate"]["kind"] == "derivation"


def test_decide_random_sequents_always_certified():
    rng = random.Random(11)
    for _ in range(40):
        s = random_sequent(rng, SIG, max_mdepth=1, max_udepth=1, size=3)
        v = decide(s, SIG)
        assert v.status in (DERIVABLE, UNDERIVABLE), s
        if v.status == DERIVABLE:
            assert mdepth(s.lhs) >= mdepth(s.rhs)
        else:
            v.countermodel.validate()


def test_conservativity_under_fresh_constants():
    extended = SIG.with_constants(["d0", "d1", "d2"])
    for text in DERIVABLE_CASES[:4] + UNDERIVABLE_CASES[:4]:
        s = seq(text)
        assert decide(s, SIG).status == decide(s, extended).status, text
