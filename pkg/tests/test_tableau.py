import pytest

from conftest import load
from lpro.context import Defined, contribution
from lpro.semantics import IllFormedDiscourse
from lpro.syntax import (
    App, Atom, Const, Discourse, Exists, Forall, FreeVar, Gender, Imp, Not, Pro, Var,
    children, parse, parse_discourse,
)
from lpro.tableau import (
    CONCLUSION, PREMISE, Branch, Closed, Entry, Exhausted, LimitReached, Limits, Node, NodeLabel,
    Tableau, admissible, idempotent, prove, render_trace, try_close, unify,
    walk,
)

HE, SHE, IT = Gender.HE, Gender.SHE, Gender.IT


def sk(name, g=HE, *args, pro=False):
    return App(name, g, tuple(args), skolem=True, pro=pro)


# -- unification ---------------------------------------------------------------


def test_unify_variable_with_skolem():
    v = FreeVar(1, HE)
    assert unify(v, sk("f")) == {v: sk("f")}


def test_pro_marks_are_transparent():
    for t in (sk("f"), Const("b", HE), FreeVar(3, IT), sk("g", HE, FreeVar(1, HE))):
        from dataclasses import replace
        assert unify(replace(t, pro=True), t) == {}


def test_occurs_check():
    x = FreeVar(1, HE)
    assert unify(x, App("f", HE, (x,))) is None


def test_clashes():
    assert unify(sk("f"), sk("g")) is None
    assert unify(Const("b", HE), sk("b")) is None
    assert unify(App("f", HE, (Const("b", HE),)), App("f", HE, (Const("c", HE),))) is None


def test_bindings_drop_pro_marks_but_walk_keeps_occurrence_mark():
    x = FreeVar(1, HE)
    s = unify(x, sk("f", pro=True))
    assert s[x].pro is False
    assert walk(FreeVar(1, HE, pro=True), s).pro is True


def test_idempotent_view():
    x, y = FreeVar(1, HE), FreeVar(2, HE)
    s = unify(App("g", HE, (x, y)), App("g", HE, (y, sk("f"))))
    m = idempotent(s)
    assert m[x] == sk("f") and m[y] == sk("f")
    domain = set(m)
    for t in m.values():
        assert not any(isinstance(u, FreeVar) and u in domain for u in _subterms(t))


def _subterms(t):
    yield t
    for a in getattr(t, "args", ()):
        yield from _subterms(a)


# -- closure and goodness ------------------------------------------------------


def _lit(serial, atom, origin, sign):
    return Node(serial, atom, NodeLabel((), (), origin, sign), None, "test")


def test_same_origin_pair_with_pro_term_is_rejected():
    f, g = sk("f"), sk("g")
    pos = _lit(1, Atom("sees", (sk("f", pro=True), g)), PREMISE, True)
    neg = _lit(2, Atom("sees", (f, g)), PREMISE, False)
    assert not admissible(pos, neg)
    assert try_close(Branch((pos, neg))) == []
    assert len(try_close(Branch((pos, neg)), goodness=False)) == 1


def test_cross_origin_pair_with_pro_term_closes():
    v = FreeVar(1, HE)
    pos = _lit(1, Atom("whistles", (sk("f", pro=True),)), PREMISE, True)
    neg = _lit(2, Atom("whistles", (v,)), CONCLUSION, False)
    [(p, n, mgu)] = try_close(Branch((pos, neg)))
    assert (p, n) == (pos, neg) and mgu == {v: sk("f")}


def test_plain_same_origin_contradiction_closes():
    pos = _lit(1, Atom("p", ()), PREMISE, True)
    neg = _lit(2, Atom("p", ()), PREMISE, False)
    assert try_close(Branch((pos, neg))) == [(pos, neg, {})]


def test_deep_pro_marks_count():
    pos = _lit(1, Atom("p", (App("f", HE, (sk("g", pro=True),)),)), PREMISE, True)
    neg = _lit(2, Atom("p", (App("f", HE, (sk("g"),)),)), PREMISE, False)
    assert not admissible(pos, neg)


# -- rules -------------------------------------------------------------------------


def _tableau(text="p() |= p()"):
    return Tableau(parse_discourse(text))


def test_initial_tableau_has_premise_and_conclusion_roots():
    tab = Tableau(load("worked.dis"))
    roots = tab.initial_tableau().nodes
    assert [(n.origin, n.sign) for n in roots] == [(PREMISE, True), (CONCLUSION, False)]
    assert all(n.label.input == () for n in roots)


def test_empty_premises_give_a_single_root():
    tab = Tableau(Discourse((), parse("p()")))
    assert [n.origin for n in tab.initial_tableau().nodes] == [CONCLUSION]


def test_ill_formed_discourse_is_refused():
    with pytest.raises(IllFormedDiscourse):
        Tableau(parse_discourse("exists x:he man(x) ; pro y:she snores(y) |= p()"))


def test_positive_existential_skolemizes_into_the_output():
    tab = _tableau()
    n = tab.node(parse("exists x:he man(x)"), (), PREMISE, True, "root")
    [([[child]], _rec)], again, cost = tab.expand(n)
    (e,) = n.label.output
    assert isinstance(e.term, App) and e.term.skolem and e.binder == "x"
    assert child.formula == Atom("man", (e.term,)) and child.label.input == (e,)
    assert not again and cost == 0


def test_negative_universal_skolem_depends_on_context_free_variables():
    tab = _tableau()
    x1 = FreeVar(1, SHE)
    tab._var = 1
    n = tab.node(parse("forall y:he loves(y, y)"), (Entry(x1, "w"),), CONCLUSION, False, "root")
    [([[child]], _rec)], _, _ = tab.expand(n)
    t = child.formula.args[0]
    assert t.skolem and t.gender == HE and t.args == (x1,)


def test_positive_universal_is_gamma():
    tab = _tableau()
    n = tab.node(parse("forall y:he p(y)"), (), PREMISE, True, "root")
    [([[c1]], _)], again, cost = tab.expand(n, 0)
    [([[c2]], _)], _, cost2 = tab.expand(n, 1)
    assert again and cost == 0 and cost2 == 1
    assert c1.formula.args[0] != c2.formula.args[0]
    assert isinstance(c1.label.input[-1].term, FreeVar)


@pytest.mark.parametrize("text, sign, shape", [
    ("p() & q()", True, [2]),
    ("p() & q()", False, [1, 1]),
    ("p() | q()", True, [1, 1]),
    ("p() | q()", False, [2]),
    ("p() -> q()", True, [1, 1]),
    ("p() -> q()", False, [2]),
    ("~p()", True, [1]),
])
def test_branching_follows_truth_conditions(text, sign, shape):
    tab = _tableau()
    n = tab.node(parse(text), (), PREMISE, sign, "root")
    [(branches, _)], _, _ = tab.expand(n)
    assert [len(b) for b in branches] == shape


def test_implication_polarities_and_threading():
    tab = _tableau()
    n = tab.node(parse("exists x:it car(x) -> pro z:it old(z)"), (), PREMISE, True, "root")
    [([[a], [b]], _)], again, _ = tab.expand(n)
    assert a.sign is False and b.sign is True
    assert b.label.input == a.label.output and len(a.label.output) == 1
    assert again  # the antecedent reserved a free variable


def test_negation_flips_polarity():
    tab = _tableau()
    n = tab.node(parse("~p()"), (), PREMISE, True, "root")
    [([[c]], _)], _, _ = tab.expand(n)
    assert c.sign is False and c.label.output == ()


def test_pronoun_alternatives_most_recent_first():
    tab = Tableau(load("worked.dis"))
    man, boy = Entry(sk("sk1"), "x"), Entry(sk("sk2"), "y")
    n = tab.node(parse("pro z:he whistles(z)"), (man, boy), PREMISE, True, "root")
    alts, again, cost = tab.expand(n)
    assert [rec.binder for _, rec in alts] == ["y", "x"]
    for [[child]], rec in alts:
        assert child.formula.args[0].pro and child.record is rec
    assert cost == 1 and not again


def test_pronoun_alternatives_skip_other_genders():
    tab = _tableau()
    n = tab.node(parse("pro z:she p(z)"), (Entry(sk("a", HE), "x"), Entry(sk("b", SHE), "y")),
                 PREMISE, True, "root")
    alts, _, _ = tab.expand(n)
    assert [rec.binder for _, rec in alts] == ["y"]


# -- search ------------------------------------------------------------------------


def test_worked_example_closes_after_retracting_the_boy():
    r = prove(load("worked.dis"))
    assert isinstance(r, Closed)
    tries = [line for line in r.log if line.startswith("try")]
    assert "introduced by y" in tries[0] and "introduced by x" in tries[-1]
    (rec,) = {(x.pronoun, x.binder) for x in r.records}
    assert rec == ("z", "x")


def test_scope_swap_never_closes():
    d = parse_discourse("forall x:he exists y:she pro z:he R(z, y) |= exists y:she forall x:he pro z:he R(z, y)")
    r = prove(d, Limits(budget_cap=32))
    assert isinstance(r, LimitReached) and r.budget == 32


def test_identity_closes_without_resolutions():
    r = prove(parse_discourse("p() |= p()"))
    assert isinstance(r, Closed) and r.records == ()


def test_saturated_open_tableau_is_exhausted():
    r = prove(parse_discourse("p() |= q()"))
    assert isinstance(r, Exhausted)


def test_step_limit():
    r = prove(load("friend_rush.dis"), Limits(max_steps=500))
    assert isinstance(r, LimitReached) and r.steps > 500


@pytest.mark.parametrize("limits", [Limits(budget_cap=0), Limits(max_steps=0), Limits(budget_start=-1)])
def test_non_positive_limits_are_rejected(limits):
    with pytest.raises(ValueError):
        prove(parse_discourse("p() |= p()"), limits)


def test_budget_schedule_doubles_to_cap():
    assert Limits(budget_cap=20).schedule() == [2, 4, 8, 16, 20]
    assert Limits(budget_cap=1, budget_start=1).schedule() == [1]


def test_goodness_blocks_the_friend_discourse():
    d = load("friend_rush.dis")
    assert not isinstance(prove(d, Limits(max_steps=20_000)), Closed)
    loose = prove(d, Limits(goodness=False))
    assert isinstance(loose, Closed)
    assert {(r.pronoun, r.binder) for r in loose.records} == {("z", "x"), ("w", "y")}


def test_seeded_context_is_an_antecedent():
    d = parse_discourse("pro z:he whistles(z) |= exists u:he whistles(u)")
    r = prove(d, i0=(Var("b", HE),))
    assert isinstance(r, Closed) and r.records[0].binder == "b"


def test_rigid_constants_block_bogus_closure():
    assert not isinstance(prove(parse_discourse("p(a:he) |= p(b:he)")), Closed)


def test_trace_format():
    text = render_trace(prove(load("worked.dis")))
    lines = text.splitlines()
    assert lines[0].startswith("[p,+] (i=[]; o=[sk1:he, sk2:he]) ")
    assert "[p,+] (i=[sk1:he]; o=[]) man(sk1:he)  <= rule +:and" in text
    assert "  CLOSE: whistles(sk1^pro) / whistles(sk1) mgu {}" in lines


def test_deterministic():
    a = render_trace(prove(load("woman_cat.dis")))
    assert a == render_trace(prove(load("woman_cat.dis")))


# -- trace audits (also run over the random corpus in the acceptance tests) --------


def skeleton(phi):
    if isinstance(phi, Atom):
        return ("atom", phi.pred, len(phi.args))
    if isinstance(phi, (Exists, Forall, Pro)):
        return (type(phi).__name__, phi.gender, skeleton(phi.body))
    return (type(phi).__name__,) + tuple(skeleton(c) for c in children(phi))


def audit(result: Closed) -> None:
    nodes = {n.serial: n for n in result.nodes}
    for n in nodes.values():
        # outputs agree with the contribution of the node's formula
        ctx = tuple(Var(f"_{k}", e.term.gender) for k, e in enumerate(n.label.input))
        r = contribution(n.formula, ctx)
        assert isinstance(r, Defined)
        assert [v.name for v in r.delta] == [e.binder for e in n.label.output]
        if n.parent is None:
            continue
        p = nodes[n.parent]
        # structure preservation: the child is an instance of an immediate subformula
        assert skeleton(n.formula) in [skeleton(c) for c in children(p.formula)]
        assert n.origin == p.origin
        assert n.label.input[:len(p.label.input)] == p.label.input
        assert n.sign == p.sign or isinstance(p.formula, (Not, Imp))
        if n.record is not None:
            assert n.record.gender == p.formula.gender
            assert any(e.term == n.record.term and e.binder == n.record.binder for e in p.label.input)
    for c in result.closures:
        assert admissible(c.positive, c.negative)
        a = [walk(t, result.mgu) for t in c.positive.formula.args]
        b = [walk(t, result.mgu) for t in c.negative.formula.args]
        assert a == b


@pytest.mark.parametrize("name", ["worked.dis", "woman_cat.dis", "woman_playground.dis"])
def test_trace_invariants(name):
    audit(prove(load(name)))


def test_trace_invariants_with_branching():
    d = parse_discourse("exists x:he (p(x) | q(x)) ; forall y:he (p(y) -> r(y)) ; forall y:he (q(y) -> r(y))"
                        " |= exists z:he r(z)")
    r = prove(d)
    assert isinstance(r, Closed)
    audit(r)
