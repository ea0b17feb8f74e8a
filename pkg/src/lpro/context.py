"""Contextual contribution: which antecedents a formula makes available.

A context is a tuple of gendered terms, oldest first.  ``contribution`` is
partial: it is undefined as soon as some pronoun finds no antecedent of its
gender in its input context.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from lpro.syntax import (
    And, Atom, Exists, Forall, Formula, Gender, Imp, Not, Or, ParseError, Pro,
    Term, Var, substitute,
)

Context = tuple[Term, ...]


@dataclass(frozen=True)
class Defined:
    delta: Context


@dataclass(frozen=True)
class Undefined:
    """The first pronoun (left to right) that cannot be resolved."""

    var: str
    gender: Gender
    context: Context
    path: tuple[int, ...] = ()
    premise: int | None = None  # set by discourse_contexts

    def describe(self) -> str:
        where = "" if self.premise is None else f" in premise {self.premise + 1}"
        return f"unresolvable pronoun {self.var}:{self.gender}{where} (context {format_context(self.context)})"


ContribResult = Defined | Undefined


def extend(ctx: Sequence[Term], new: Sequence[Term]) -> Context:
    out = list(ctx)
    for t in new:
        if t not in out:
            out.append(t)
    return tuple(out)


def contribution(phi: Formula, i: Sequence[Term] = ()) -> ContribResult:
    return _contrib(phi, tuple(i), ())


def _contrib(phi: Formula, i: Context, path: tuple[int, ...]) -> ContribResult:
    if isinstance(phi, Atom):
        return Defined(())
    if isinstance(phi, Not):
        r = _contrib(phi.body, i, path + (0,))
        return r if isinstance(r, Undefined) else Defined(())
    if isinstance(phi, And):
        a = _contrib(phi.left, i, path + (0,))
        if isinstance(a, Undefined):
            return a
        b = _contrib(phi.right, extend(i, a.delta), path + (1,))
        if isinstance(b, Undefined):
            return b
        return Defined(extend(a.delta, b.delta))
    if isinstance(phi, Imp):
        a = _contrib(phi.left, i, path + (0,))
        if isinstance(a, Undefined):
            return a
        b = _contrib(phi.right, extend(i, a.delta), path + (1,))
        return b if isinstance(b, Undefined) else Defined(())
    if isinstance(phi, Or):
        # no threading between disjuncts
        for k, side in enumerate((phi.left, phi.right)):
            r = _contrib(side, i, path + (k,))
            if isinstance(r, Undefined):
                return r
        return Defined(())
    if isinstance(phi, Exists):
        x = Var(phi.var, phi.gender)
        r = _contrib(phi.body, extend(i, [x]), path + (0,))
        return r if isinstance(r, Undefined) else Defined(extend([x], r.delta))
    if isinstance(phi, Forall):
        r = _contrib(phi.body, extend(i, [Var(phi.var, phi.gender)]), path + (0,))
        return r if isinstance(r, Undefined) else Defined(())
    if isinstance(phi, Pro):
        if not any(t.gender == phi.gender for t in i):
            return Undefined(phi.var, phi.gender, i, path)
        return _contrib(phi.body, i, path + (0,))
    raise TypeError(f"not a formula: {phi!r}")


def discourse_contexts(premises: Sequence[Formula], i0: Sequence[Term] = ()) -> list[Context] | Undefined:
    """Input context of each premise: ``i0`` plus everything earlier premises added."""
    ctx = tuple(i0)
    out = []
    for k, phi in enumerate(premises):
        out.append(ctx)
        r = contribution(phi, ctx)
        if isinstance(r, Undefined):
            return Undefined(r.var, r.gender, r.context, r.path, premise=k)
        ctx = extend(ctx, r.delta)
    return out


def format_context(ctx: Sequence[Term]) -> str:
    from lpro.syntax import render_term

    return "[" + ", ".join(f"{render_term(t, genders=False)}:{t.gender}" for t in ctx) + "]"


def parse_context(text: str) -> Context:
    """Read a seed context such as ``"x:he, y:it"``."""
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        name, _, g = item.partition(":")
        try:
            out.append(Var(name.strip(), Gender(g.strip())))
        except ValueError:
            raise ParseError(f"bad context entry {item!r}; expected name:gender") from None
    return tuple(out)


# ------------------------------------------------------------ pronoun sites


@dataclass(frozen=True)
class PronounSite:
    var: str
    gender: Gender
    context: Context  # input context at the pronoun

    @property
    def antecedents(self) -> tuple[Term, ...]:
        return tuple(t for t in self.context if t.gender == self.gender)


def pronoun_sites(phi: Formula, i: Sequence[Term] = ()) -> Iterator[PronounSite]:
    """Every pronoun binder of ``phi`` with the context it is resolved against."""
    yield from _sites(phi, tuple(i))


def _sites(phi: Formula, i: Context) -> Iterator[PronounSite]:
    if isinstance(phi, Atom):
        return
    if isinstance(phi, Not):
        yield from _sites(phi.body, i)
    elif isinstance(phi, (And, Imp)):
        yield from _sites(phi.left, i)
        a = contribution(phi.left, i)
        if isinstance(a, Defined):
            yield from _sites(phi.right, extend(i, a.delta))
    elif isinstance(phi, Or):
        yield from _sites(phi.left, i)
        yield from _sites(phi.right, i)
    elif isinstance(phi, (Exists, Forall)):
        yield from _sites(phi.body, extend(i, [Var(phi.var, phi.gender)]))
    elif isinstance(phi, Pro):
        yield PronounSite(phi.var, phi.gender, i)
        yield from _sites(phi.body, i)


def resolve_pronouns(phi: Formula, mapping: dict[str, str]) -> Formula:
    """Drop every ``pro x`` binder, replacing ``x`` by the variable ``mapping[x]``.

    The antecedent's gender is the pronoun's gender (resolution requires
    agreement).
    """
    if isinstance(phi, Atom):
        return phi
    if isinstance(phi, Not):
        return Not(resolve_pronouns(phi.body, mapping))
    if isinstance(phi, (And, Or, Imp)):
        return type(phi)(resolve_pronouns(phi.left, mapping), resolve_pronouns(phi.right, mapping))
    body = resolve_pronouns(phi.body, mapping)
    if isinstance(phi, Pro):
        return substitute(body, phi.var, Var(mapping[phi.var], phi.gender))
    return type(phi)(phi.var, phi.gender, body)
