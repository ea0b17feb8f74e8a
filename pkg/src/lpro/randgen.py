"""Seeded random formulas and discourses for the property and differential tests."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from lpro.context import Undefined, contribution, discourse_contexts
from lpro.syntax import (
    And, Atom, Const, Discourse, Exists, Forall, Formula, Gender, Imp, Not, Or,
    Pro, Signature, Term, Var, conjoin,
)


@dataclass(frozen=True)
class GenConfig:
    preds: tuple[tuple[str, int], ...] = (("P", 1), ("Q", 1), ("R", 2))
    consts: tuple[tuple[str, Gender], ...] = (("a", Gender.HE),)
    genders: tuple[Gender, ...] = (Gender.HE, Gender.IT)
    max_quantifiers: int = 2
    max_pronouns: int = 2
    max_depth: int = 3
    premises: tuple[int, int] = (1, 2)  # inclusive range
    # let later formulas use earlier existential variables directly instead
    # of through pronouns; such formulas are not parser-producible
    dynamic: bool = False

    def signature(self) -> Signature:
        return Signature(dict(self.preds), dict(self.consts))


@dataclass
class _Budget:
    quantifiers: int
    pronouns: int


@dataclass
class Generator:
    seed: int = 0
    config: GenConfig = field(default_factory=GenConfig)

    def __post_init__(self) -> None:
        self.rng = random.Random(self.seed)
        self._names = 0

    def _name(self) -> str:
        self._names += 1
        return f"v{self._names}"

    def _term(self, scope: list[Var]) -> Term:
        if scope and self.rng.random() < 0.9:
            return self.rng.choice(scope)
        name, g = self.rng.choice(self.config.consts)
        return Const(name, g)

    def atom(self, scope: list[Var]) -> Atom:
        pred, n = self.rng.choice(self.config.preds)
        return Atom(pred, tuple(self._term(scope) for _ in range(n)))

    def formula(self, scope: list[Var] | None = None, pronouns: bool = True,
                budget: _Budget | None = None, depth: int | None = None) -> Formula:
        """A random formula whose variables come from ``scope`` or its own binders.

        Pronoun binders introduce fresh variables too; whether they can be
        resolved is left to the caller.
        """
        cfg = self.config
        b = budget or _Budget(cfg.max_quantifiers, cfg.max_pronouns if pronouns else 0)
        d = cfg.max_depth if depth is None else depth
        scope = list(scope or ())
        kinds = ["atom"] * (2 if d > 0 else 1)
        if d > 0:
            kinds += ["not", "and", "and", "or", "imp"]
            if b.quantifiers:
                kinds += ["exists", "exists", "forall"]
            if b.pronouns:
                kinds += ["pro", "pro"]
        if not scope and d > 0 and (b.quantifiers or b.pronouns):
            kinds = [k for k in kinds if k in ("exists", "forall", "pro")]
        kind = self.rng.choice(kinds)
        if kind == "atom":
            return self.atom(scope)
        if kind == "not":
            return Not(self.formula(scope, pronouns, b, d - 1))
        if kind in ("and", "or", "imp"):
            left = self.formula(scope, pronouns, b, d - 1)
            # the right side may use what the left introduces
            right_scope = scope + (_introduced(left) if kind != "or" and cfg.dynamic else [])
            right = self.formula(right_scope, pronouns, b, d - 1)
            return {"and": And, "or": Or, "imp": Imp}[kind](left, right)
        g = self.rng.choice(cfg.genders)
        v = Var(self._name(), g)
        if kind == "pro":
            b.pronouns -= 1
            return Pro(v.name, g, self.formula(scope + [v], pronouns, b, d - 1))
        b.quantifiers -= 1
        q = Exists if kind == "exists" else Forall
        return q(v.name, g, self.formula(scope + [v], pronouns, b, d - 1))

    def body(self, x: Var, scope: list[Var]) -> Formula:
        """A formula in which ``x`` occurs free (for pronoun-equivalence checks)."""
        while True:
            phi = self.formula(scope + [x], pronouns=False, depth=2)
            if any(t == x for a in _atoms(phi) for t in a.args):
                return phi

    def closed_formula(self, pronouns: bool = True, context: list[Var] | None = None) -> Formula:
        """A formula whose pronouns resolve in ``context``; bound variables only."""
        while True:
            phi = self.formula(list(context or ()), pronouns)
            if not isinstance(contribution(phi, tuple(context or ())), Undefined):
                return phi

    def discourse(self) -> Discourse:
        lo, hi = self.config.premises
        while True:
            n = self.rng.randint(lo, hi)
            premises: list[Formula] = []
            for _ in range(n):
                scope = _introduced_all(premises) if self.config.dynamic else []
                premises.append(self.formula(scope))
            conclusion = self.formula([])
            d = Discourse(tuple(premises), conclusion, self.config.signature())
            if _well_formed(d):
                return d


def _atoms(phi: Formula):
    if isinstance(phi, Atom):
        yield phi
    elif isinstance(phi, Not):
        yield from _atoms(phi.body)
    elif isinstance(phi, (And, Or, Imp)):
        yield from _atoms(phi.left)
        yield from _atoms(phi.right)
    else:
        yield from _atoms(phi.body)


def _introduced(phi: Formula) -> list[Var]:
    """Existential variables on the conjunctive spine of ``phi``."""
    if isinstance(phi, And):
        return _introduced(phi.left) + _introduced(phi.right)
    if isinstance(phi, Exists):
        return [Var(phi.var, phi.gender)] + _introduced(phi.body)
    if isinstance(phi, Pro):
        return _introduced(phi.body)
    return []


def _introduced_all(premises: list[Formula]) -> list[Var]:
    return [v for phi in premises for v in _introduced(phi)]


def _well_formed(d: Discourse) -> bool:
    if isinstance(discourse_contexts(d.premises), Undefined):
        return False
    if isinstance(contribution(d.conclusion, ()), Undefined):
        return False
    body = conjoin(d.premises)
    return not _dyn_free(body, frozenset())[0] and not _dyn_free(d.conclusion, frozenset())[0]


def _dyn_free(phi: Formula, i: frozenset[str]) -> tuple[set[str], frozenset[str]]:
    """Variables occurring unbound, and the names ``phi`` binds for what follows."""
    if isinstance(phi, Atom):
        names: set[str] = set()
        for t in phi.args:
            if isinstance(t, Var) and t.name not in i:
                names.add(t.name)
        return names, frozenset()
    if isinstance(phi, Not):
        return _dyn_free(phi.body, i)[0], frozenset()
    if isinstance(phi, And):
        fl, ol = _dyn_free(phi.left, i)
        fr, orr = _dyn_free(phi.right, i | ol)
        return fl | fr, ol | orr
    if isinstance(phi, Imp):
        fl, ol = _dyn_free(phi.left, i)
        fr, _ = _dyn_free(phi.right, i | ol)
        return fl | fr, frozenset()
    if isinstance(phi, Or):
        return _dyn_free(phi.left, i)[0] | _dyn_free(phi.right, i)[0], frozenset()
    f, o = _dyn_free(phi.body, i | {phi.var})
    if isinstance(phi, Exists):
        return f, o | {phi.var}
    return f, o if isinstance(phi, Pro) else frozenset()
