import pytest
from hypothesis import given, settings, strategies as st

from lpro.randgen import GenConfig, Generator
from lpro.syntax import (
    And, App, ArityError, Atom, Const, Exists, Forall, FreeVar, Gender, Not, ParseError, Pro,
    ScopeError, Signature, Var, parse, parse_discourse, parse_signature, render,
    render_signature, strip_pro, substitute,
)

HE, SHE, IT = Gender.HE, Gender.SHE, Gender.IT


def test_parse_pronoun_in_scope_of_existential():
    phi = parse("exists x:he (man(x) & pro z:he whistles(z))")
    x, z = Var("x", HE), Var("z", HE)
    assert phi == Exists("x", HE, And(Atom("man", (x,)), Pro("z", HE, Atom("whistles", (z,)))))


def test_two_premise_discourse_parses_even_if_ill_formed():
    d = parse_discourse("exists x:he man(x) ; pro y:she snores(y)")
    assert len(d.premises) == 2 and d.conclusion is None
    assert isinstance(d.premises[1], Pro) and d.premises[1].gender == SHE


def test_unclosed_paren_reports_end_of_input():
    with pytest.raises(ParseError) as e:
        parse("forall x:he (")
    assert e.value.pos == len("forall x:he (")
    assert "end of input" in str(e.value)


@pytest.mark.parametrize("text, exc", [
    ("p(x)", ScopeError),
    ("p(a:he) & p(a:he, a:he)", ArityError),
    ("exists x:she p(x:he)", ParseError),
    ("forall x:him p(x)", ParseError),
    ("p(a)", ParseError),  # constants need a gender without a signature
    ("p() q()", ParseError),
])
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        parse(text)


def test_signature_checks_constants_and_arity():
    sig = parse_signature("pred man/1\nconst b:he\nfun father/1:he\n")
    assert render(parse("man(father(b))", sig)) == "man(father(b))"
    with pytest.raises(ArityError):
        parse("man(b, b)", sig)
    with pytest.raises(ParseError):
        parse("woman(b)", sig)
    assert parse_signature(render_signature(sig)) == sig


def test_signature_names_must_be_unique():
    with pytest.raises(ParseError):
        parse_signature("pred b/1\nconst b:he\n")


@pytest.mark.parametrize("phi, text", [
    (Atom("man", (Const("b", HE),)), "man(b)"),
    (Pro("z", IT, Atom("red", (Var("z", IT),))), "pro z:it red(z)"),
    (Atom("loves", (FreeVar(7, SHE),)), "loves(X7:she)"),
    (Atom("p", (App("sk3", HE, (FreeVar(1, IT),), skolem=True),)), "p(sk3:he(X1:it))"),
    (Atom("p", (App("sk1", HE, skolem=True, pro=True),)), "p(sk1:he^pro)"),
])
def test_render(phi, text):
    assert render(phi) == text


def test_precedence_and_associativity():
    assert render(parse("p() -> q() -> r()")) == "p() -> q() -> r()"
    assert parse("p() -> q() -> r()") == parse("p() -> (q() -> r())")
    assert parse("p() & q() & r()") == parse("(p() & q()) & r()")
    assert parse("~p() & q() | r() -> s()") == parse("(((~p()) & q()) | r()) -> s()")
    assert render(parse("(p() | q()) & r()")) == "(p() | q()) & r()"


def test_quantifier_binds_tighter_than_conjunction():
    phi = parse("exists x:he man(x) & pro z:he sleeps(z)")
    assert isinstance(phi, And) and isinstance(phi.left, Exists)


def test_binders_renamed_apart_across_discourse():
    d = parse_discourse("exists x:he p(x)\n|=\nexists x:he p(x)")
    assert d.premises[0].var != d.conclusion.var


def test_discourse_conclusion_on_own_line_and_comments():
    d = parse_discourse("# comment\np(a:he)\nq(a:he)  # trailing\n|=\nr(a:he)\n")
    assert len(d.premises) == 2 and render(d.conclusion) == "r(a)"


def test_more_than_one_conclusion_is_rejected():
    with pytest.raises(ParseError):
        parse_discourse("p(a:he)\n|=\nq(a:he)\nr(a:he)")


def test_pro_mark_is_invisible_to_equality():
    t = Const("b", HE)
    assert t == Const("b", HE, pro=True)
    assert strip_pro(App("f", HE, (Const("b", HE, pro=True),), pro=True)).pro is False


def test_substitute_respects_shadowing():
    phi = And(Atom("p", (Var("x", HE),)), Forall("x", HE, Atom("q", (Var("x", HE),))))
    out = substitute(phi, "x", Const("b", HE))
    assert out == And(Atom("p", (Const("b", HE),)), Forall("x", HE, Atom("q", (Var("x", HE),))))


def test_uppercase_predicates_allowed():
    assert render(parse("forall x:he exists y:she pro z:he R(z, y)")) == "forall x:he exists y:she pro z:he R(z, y)"


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_round_trip_random_formulas(seed):
    cfg = GenConfig()
    phi = Generator(seed, cfg).formula()
    assert parse(render(phi), cfg.signature()) == phi


def test_signature_merge_conflict():
    with pytest.raises(ValueError):
        Signature({"p": 1}).merged(Signature({"p": 2}))
