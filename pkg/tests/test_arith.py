import pytest

from qrc1.arith import (
    AndA,
    BoxOf,
    ConOf,
    EqQuote,
    Exists,
    ForallA,
    Implies,
    OrA,
    Quote,
    RealizationError,
    Realization,
    Tau,
    TemplateAtom,
    TheoremVar,
    arith_sequent,
    arith_to_dict,
    default_realization,
    param_index,
    parse_realization,
    realize,
    render,
    sigma1_warnings,
)
from qrc1.syntax import ParseError, Signature, parse_formula, parse_sequent

SIG = Signature(constants=("c0", "c1"), relations=(("S", 1), ("R", 2)))
R = default_realization(SIG)


def f(text: str):
    return parse_formula(text, SIG)


# ---------------------------------------------------------------------------
# golden translations


def test_top_translates_to_tau():
    assert render(realize(f("T"), R, sig=SIG)) == "τ(u)"


def test_diamond_top_golden():
    assert render(realize(f("<>T"), R, sig=SIG)) == "τ(u) ∨ (u = ⌜Con_{τ(u)}⌝)"


def test_universal_becomes_existential():
    out = realize(f("A x . S(x)"), R, sig=SIG)
    assert isinstance(out, Exists) and out.var == "z0"
    assert render(out) == "∃z0 (S(z0, u) ∨ τ(u))"


def test_conjunction_becomes_disjunction():
    out = realize(f("S(c0) & T"), R, sig=SIG)
    assert isinstance(out, OrA)
    assert out == OrA(realize(f("S(c0)"), R, sig=SIG), Tau())


def test_atom_clause_appends_tau_disjunct():
    out = realize(f("S(c0)"), R, sig=SIG)
    assert out == OrA(TemplateAtom("S", ("y0", "u")), Tau())


def test_diamond_clause_nests_consistency_codes():
    out = realize(f("<><>T"), R, sig=SIG)
    assert out == OrA(Tau(), EqQuote(Quote(ConOf(OrA(Tau(), EqQuote(Quote(ConOf(Tau()))))))))


# ---------------------------------------------------------------------------
# statement direction and parameter bookkeeping


def test_statement_reverses_the_implication():
    s = parse_sequent("<><>T |- <>T", SIG)
    out = arith_sequent(s, R, SIG)
    assert isinstance(out, ForallA) and out.var == "θ"
    body = out.body
    assert isinstance(body, Implies)
    # the antecedent is provability from the RIGHT-hand side's translation
    assert body.left == BoxOf(realize(s.rhs, R, sig=SIG), TheoremVar())
    assert body.right == BoxOf(realize(s.lhs, R, sig=SIG), TheoremVar())


def test_statement_quantifies_occurring_parameters():
    s = parse_sequent("A x . S(x) |- S(c0)", SIG)
    out = render(arith_sequent(s, R, SIG))
    assert out.startswith("∀θ ∀y0 ∀z0 (")
    assert "y1" not in out  # c1 does not occur


def test_constants_take_signature_indices():
    idx = param_index([f("S(c1)")], SIG)
    assert idx.y_of == {"c1": "y1"}
    idx2 = param_index([f("R(c1, c0)")], SIG)
    assert idx2.y_of == {"c0": "y0", "c1": "y1"}


def test_variables_take_first_occurrence_indices():
    idx = param_index([f("R(y, x) & A w . S(w)")], SIG)
    assert idx.z_of == {"y": "z0", "x": "z1", "w": "z2"}


def test_shared_parameter_space_across_both_sides():
    s = parse_sequent("S(x) |- R(x, c1)", SIG)
    out = arith_sequent(s, R, SIG)
    doc = arith_to_dict(out)
    assert doc["node"] == "forall" and doc["var"] == "θ"


# ---------------------------------------------------------------------------
# structural properties


def test_translation_always_carries_a_tau_disjunct():
    for text in ["T", "S(c0)", "S(c0) & <>T", "<>S(c1)", "A x . S(x)"]:
        out = realize(f(text), R, sig=SIG)
        while isinstance(out, Exists):
            out = out.body
        assert _has_tau_disjunct(out), text


def _has_tau_disjunct(g) -> bool:
    if isinstance(g, Tau):
        return True
    if isinstance(g, OrA):
        return _has_tau_disjunct(g.left) or _has_tau_disjunct(g.right)
    return False


def test_missing_template_is_an_error():
    bad = Realization({})
    with pytest.raises(RealizationError):
        realize(f("S(c0)"), bad, sig=SIG)


def test_arity_mismatch_is_an_error():
    bad = Realization({"S": (("a", "b"), Tau())})
    with pytest.raises(RealizationError):
        realize(f("S(c0)"), bad, sig=SIG)


# ---------------------------------------------------------------------------
# realization files


def test_parse_realization_file():
    text = """
    # sample templates
    S(a)    := E v . a + v = u
    R(a, b) := a + b <= u
    """
    r, warnings = parse_realization(text)
    assert warnings == []
    out = realize(f("S(c0)"), r, sig=SIG)
    assert render(out) == "(∃v y0 + v = u) ∨ τ(u)"


def test_parse_realization_rejects_bad_heads():
    with pytest.raises(ParseError):
        parse_realization("S := u = u")
    with pytest.raises(ParseError):
        parse_realization("S(u) := u = u")
    with pytest.raises(ParseError):
        parse_realization("S(a) := u = u\nS(a) := u = u")


def test_sigma1_lint_flags_unbounded_universals():
    r, warnings = parse_realization("S(a) := E v . a = v")
    assert warnings == []
    assert sigma1_warnings(Exists("v", Tau())) == []
    assert sigma1_warnings(ForallA("v", Tau()))
    assert sigma1_warnings(AndA(Exists("v", Tau()), Tau()))  # ∃ outside the prefix


def test_bounded_universal_is_sigma1_clean():
    r, warnings = parse_realization("S(a) := E v . A w <= v . w + a <= u")
    assert warnings == []
    out = realize(f("S(c0)"), r, sig=SIG)
    assert "∀w ≤ v" in render(out)
