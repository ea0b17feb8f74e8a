"""From a closed tableau back to classical first-order logic.

``extract`` reads off which quantifier each pronoun was resolved to,
``disambiguate`` substitutes those variables for the pronouns and
``rebracket`` widens quantifier scopes until every substituted occurrence
is syntactically bound.  ``crosscheck`` re-proves the result, which now
contains no pronouns.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from lpro.context import pronoun_sites, resolve_pronouns
from lpro.semantics import Assignment, Model, SignatureMismatch
from lpro.syntax import (
    And, App, Atom, Const, Discourse, Exists, Forall, Formula, Gender, Imp, Not,
    Or, Pro, Term, Var, conjoin, subformulas,
)
from lpro.tableau import CONCLUSION, PREMISE, Closed, Limits, ProofResult, prove


@dataclass(frozen=True)
class Disambiguation:
    theta: dict[str, str] = field(default_factory=dict)  # premise pronouns
    theta_prime: dict[str, str] = field(default_factory=dict)  # conclusion pronouns

    def lines(self, genders: dict[str, Gender] | None = None) -> list[str]:
        g = genders or {}
        out = []
        for side, m in (("premise", self.theta), ("conclusion", self.theta_prime)):
            for x, y in sorted(m.items()):
                gx = f":{g[x]}" if x in g else ""
                out.append(f"{x}{gx} -> {y}{gx} ({side})")
        return out


class InconsistentTrace(Exception):
    pass


class InaccessibleTarget(ValueError):
    pass


def extract(proof: Closed) -> Disambiguation:
    """Pronoun variable to the quantifier variable that introduced its antecedent."""
    theta: dict[str, str] = {}
    prime: dict[str, str] = {}
    for rec in proof.records:
        side = theta if rec.origin == PREMISE else prime
        if rec.origin not in (PREMISE, CONCLUSION) or not rec.binder:
            raise InconsistentTrace(f"antecedent of {rec.pronoun} has no binder")
        if side.get(rec.pronoun, rec.binder) != rec.binder:
            raise InconsistentTrace(f"pronoun {rec.pronoun} resolved to two quantifiers")
        side[rec.pronoun] = rec.binder
    return Disambiguation(theta, prime)


# ------------------------------------------------------------ re-bracketing


def rebracket(phi: Formula) -> Formula:
    """Translate a pronoun-free dynamic formula into an equivalent classical one.

    Conjunctions and conditionals whose left side is a conjunction are
    re-associated first; a left existential then takes the whole
    conjunction (as an existential) or conditional (as a universal) into
    its scope.  Each re-association moves one connective rightwards and
    each extraction removes a quantifier from a left operand, so the pair
    (number of binders under left operands, left-operand size) decreases
    and the recursion terminates.
    """
    if isinstance(phi, Atom):
        return phi
    if isinstance(phi, Pro):
        raise ValueError(f"pronoun {phi.var} left in formula; disambiguate first")
    if isinstance(phi, Not):
        return Not(rebracket(phi.body))
    if isinstance(phi, Or):
        return Or(rebracket(phi.left), rebracket(phi.right))
    if isinstance(phi, (Exists, Forall)):
        return type(phi)(phi.var, phi.gender, rebracket(phi.body))
    left, right = phi.left, phi.right
    if isinstance(phi, And):
        if isinstance(left, And):
            return rebracket(And(left.left, And(left.right, right)))
        if isinstance(left, Exists):
            return Exists(left.var, left.gender, rebracket(And(left.body, right)))
        return And(rebracket(left), rebracket(right))
    if isinstance(phi, Imp):
        if isinstance(left, And):
            return rebracket(Imp(left.left, Imp(left.right, right)))
        if isinstance(left, Exists):
            return Forall(left.var, left.gender, rebracket(Imp(left.body, right)))
        return Imp(rebracket(left), rebracket(right))
    raise TypeError(f"not a formula: {phi!r}")


def unbound_occurrences(phi: Formula, bound: frozenset[str] = frozenset()) -> set[str]:
    """Variables occurring outside the syntactic scope of a binder for them."""
    if isinstance(phi, Atom):
        out: set[str] = set()
        for t in phi.args:
            out |= _term_vars(t) - bound
        return out
    if isinstance(phi, Not):
        return unbound_occurrences(phi.body, bound)
    if isinstance(phi, (And, Or, Imp)):
        return unbound_occurrences(phi.left, bound) | unbound_occurrences(phi.right, bound)
    return unbound_occurrences(phi.body, bound | {phi.var})


def _term_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, App):
        return set().union(*map(_term_vars, t.args)) if t.args else set()
    return set()


def is_classical(phi: Formula, free: Sequence[str] = ()) -> bool:
    return not any(isinstance(s, Pro) for s in subformulas(phi)) and unbound_occurrences(phi) <= set(free)


def atom_multiset(phi: Formula) -> Counter:
    return Counter(s for s in subformulas(phi) if isinstance(s, Atom))


def quantifier_multiset(phi: Formula) -> Counter:
    # by bound variable only: a conditional's antecedent existential comes out universal
    return Counter((s.var, s.gender) for s in subformulas(phi) if isinstance(s, (Exists, Forall)))


# ------------------------------------------------------------ disambiguation


@dataclass(frozen=True)
class Classical:
    premise: Formula | None  # the premises as one re-bracketed conjunction
    conclusion: Formula


def _check_targets(phi: Formula, mapping: dict[str, str], i0: Sequence[Term]) -> dict[str, str]:
    full = dict(mapping)
    for site in pronoun_sites(phi, i0):
        names = [t.name for t in site.antecedents if isinstance(t, Var)]
        if site.var not in full:
            if not names:
                raise InaccessibleTarget(f"pronoun {site.var} has no antecedent")
            full[site.var] = names[-1]  # closure never needed it: most recent antecedent
        elif full[site.var] not in names:
            raise InaccessibleTarget(f"{full[site.var]} is not accessible to pronoun {site.var}")
    return full


def disambiguate(discourse: Discourse, d: Disambiguation, i0: Sequence[Var] = ()) -> Classical:
    """Replace pronouns by their antecedent variables, then re-bracket.

    Pronouns absent from ``d`` (the proof closed without instantiating
    them) take their most recent accessible antecedent.
    """
    body = conjoin(discourse.premises)
    if discourse.conclusion is None:
        raise ValueError("discourse has no conclusion")
    premise = None
    if body is not None:
        premise = rebracket(resolve_pronouns(body, _check_targets(body, d.theta, i0)))
    conc = discourse.conclusion
    conclusion = rebracket(resolve_pronouns(conc, _check_targets(conc, d.theta_prime, i0)))
    return Classical(premise, conclusion)


# --------------------------------------------------------- classical oracle


def _value(M: Model, h: Assignment, t: Term) -> int:
    if isinstance(t, Var):
        return h[t.name]
    if isinstance(t, Const):
        if t.name not in M.consts:
            raise SignatureMismatch(f"model does not interpret constant {t.name}")
        return M.consts[t.name]
    if isinstance(t, App):
        table = M.funs.get(t.fn)
        if table is None:
            raise SignatureMismatch(f"model does not interpret function {t.fn}")
        return table[tuple(_value(M, h, a) for a in t.args)]
    raise TypeError(f"cannot evaluate {t!r}")


def eval_classical(M: Model, h: Assignment, phi: Formula) -> bool:
    """Tarskian truth of a pronoun-free formula."""
    if isinstance(phi, Atom):
        ext = M.preds.get(phi.pred)
        if ext is None:
            raise SignatureMismatch(f"model does not interpret predicate {phi.pred}")
        return tuple(_value(M, h, t) for t in phi.args) in ext
    if isinstance(phi, Not):
        return not eval_classical(M, h, phi.body)
    if isinstance(phi, And):
        return eval_classical(M, h, phi.left) and eval_classical(M, h, phi.right)
    if isinstance(phi, Or):
        return eval_classical(M, h, phi.left) or eval_classical(M, h, phi.right)
    if isinstance(phi, Imp):
        return not eval_classical(M, h, phi.left) or eval_classical(M, h, phi.right)
    if isinstance(phi, Exists):
        return any(eval_classical(M, {**h, phi.var: d}, phi.body) for d in range(M.size))
    if isinstance(phi, Forall):
        return all(eval_classical(M, {**h, phi.var: d}, phi.body) for d in range(M.size))
    raise ValueError(f"not a classical formula: {phi!r}")


# ----------------------------------------------------------------- crosscheck


@dataclass(frozen=True)
class CrosscheckReport:
    disambiguation: Disambiguation
    classical: Classical
    result: ProofResult

    @property
    def closes(self) -> bool:
        return isinstance(self.result, Closed)


def crosscheck(discourse: Discourse, proof: Closed, i0: Sequence[Var] = (),
               limits: Limits = Limits(budget_cap=64, max_steps=1_000_000)) -> CrosscheckReport:
    """Re-prove the disambiguated, re-bracketed discourse; it contains no pronouns."""
    d = extract(proof)
    cl = disambiguate(discourse, d, i0)
    premises = () if cl.premise is None else (cl.premise,)
    result = prove(Discourse(premises, cl.conclusion, discourse.signature), limits, i0)
    return CrosscheckReport(d, cl, result)
