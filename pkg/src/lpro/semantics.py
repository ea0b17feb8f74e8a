"""Finite models, four-valued evaluation and a countermodel-searching oracle.

Evaluation threads assignments through the dynamic connectives: a formula
has a set of *output* assignments (the ways it can be verified), and the
right conjunct of ``a & b`` is evaluated under each output of ``a``.  That
is what lets a pronoun resolved to an existential's variable see the
existential's witness.  A formula is verified iff it has an output;
falsification is computed alongside.  Pronouns verify if some antecedent
verifies the body and falsify if some antecedent falsifies it, so a
formula with pronouns can be both (``{1,0}``) or, when its context offers
no antecedent, neither (``{}``).
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator, NamedTuple, Sequence

from lpro.context import (
    Context, Undefined, contribution, discourse_contexts, extend, pronoun_sites,
    resolve_pronouns,
)
from lpro.syntax import (
    And, App, Atom, Const, Discourse, Exists, FreeVar, Forall, Formula, Imp,
    Not, Or, ParseError, Pro, Signature, Term, Var, atoms, conjoin, subterms,
)


class FourValue(NamedTuple):
    verified: bool
    falsified: bool

    def swap(self) -> "FourValue":
        return FourValue(self.falsified, self.verified)

    def __str__(self) -> str:
        return "{" + ",".join(s for s, on in (("1", self.verified), ("0", self.falsified)) if on) + "}"

    def leq(self, other: "FourValue") -> bool:
        """Information order of the diamond: {} below {1} and {0}, both below {1,0}."""
        return (not self.verified or other.verified) and (not self.falsified or other.falsified)


TRUE = FourValue(True, False)
FALSE = FourValue(False, True)
BOTH = FourValue(True, True)
NEITHER = FourValue(False, False)


class SignatureMismatch(ValueError):
    pass


class ModelBudgetExceeded(ValueError):
    def __init__(self, count: int, budget: int):
        self.count = count
        super().__init__(f"{count} models exceed the budget of {budget}")


class IllFormedDiscourse(ValueError):
    def __init__(self, undefined: Undefined, conclusion: bool = False):
        self.undefined = undefined
        self.conclusion = conclusion
        where = " in the conclusion" if conclusion else ""
        super().__init__(undefined.describe() + where)


@dataclass
class Model:
    size: int
    preds: dict[str, frozenset[tuple[int, ...]]] = field(default_factory=dict)
    consts: dict[str, int] = field(default_factory=dict)
    funs: dict[str, dict[tuple[int, ...], int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError("universe must be non-empty")
        for name, ext in self.preds.items():
            for tup in ext:
                if any(not 0 <= v < self.size for v in tup):
                    raise ValueError(f"{name}{tup} outside universe")
        for name, v in self.consts.items():
            if not 0 <= v < self.size:
                raise ValueError(f"constant {name} = {v} outside universe")
        for name, table in self.funs.items():
            if any(not 0 <= v < self.size for v in table.values()):
                raise ValueError(f"function {name} leaves the universe")
            arities = {len(k) for k in table}
            if len(arities) > 1:
                raise ValueError(f"function {name} used with several arities")
            n = arities.pop() if arities else 0
            want = set(itertools.product(range(self.size), repeat=n))
            if set(table) != want:
                raise ValueError(f"function {name} is not total on the universe")

    @classmethod
    def _trusted(cls, size, preds, consts, funs) -> "Model":
        M = object.__new__(cls)
        M.size, M.preds, M.consts, M.funs = size, preds, consts, funs
        return M

    def check(self, sig: Signature) -> None:
        for p, n in sig.preds.items():
            if p not in self.preds:
                raise SignatureMismatch(f"model does not interpret predicate {p}")
            if any(len(t) != n for t in self.preds[p]):
                raise SignatureMismatch(f"predicate {p} has arity {n}")
        for c in sig.consts:
            if c not in self.consts:
                raise SignatureMismatch(f"model does not interpret constant {c}")
        for f, (n, _) in sig.funs.items():
            table = self.funs.get(f)
            if table is None or len(table) != self.size ** n:
                raise SignatureMismatch(f"function {f} is not total on the universe")


# --------------------------------------------------------------- evaluation

Assignment = dict[str, int]


class _Compiled(NamedTuple):
    # cont(M, h, k): does some output assignment h1 of the formula satisfy k(h1)?
    cont: Callable[[Model, Assignment, Callable[[Assignment], bool]], bool]
    ver: Callable[[Model, Assignment], bool]
    fal: Callable[[Model, Assignment], bool]


def _term_fn(t: Term):
    if isinstance(t, Var):
        name = t.name

        def var(M, h):
            try:
                return h[name]
            except KeyError:
                raise ValueError(f"variable {name} has no value") from None
        return var
    if isinstance(t, Const):
        name = t.name

        def const(M, h):
            try:
                return M.consts[name]
            except KeyError:
                raise SignatureMismatch(f"model does not interpret constant {name}") from None
        return const
    if isinstance(t, App) and not t.skolem:
        fn, args = t.fn, [_term_fn(a) for a in t.args]

        def app(M, h):
            try:
                return M.funs[fn][tuple(a(M, h) for a in args)]
            except KeyError:
                raise SignatureMismatch(f"model does not interpret {fn} on these arguments") from None
        return app
    raise ValueError(f"cannot evaluate prover-internal term {t!r}")


def _holds_fn(phi: Atom):
    pred = phi.pred
    if all(isinstance(t, Var) for t in phi.args):
        names = tuple(t.name for t in phi.args)

        def holds(M, h):
            try:
                return tuple([h[n] for n in names]) in M.preds[pred]
            except KeyError as e:
                if e.args[0] == pred:
                    raise SignatureMismatch(f"model does not interpret predicate {pred}") from None
                raise ValueError(f"variable {e.args[0]} has no value") from None
        return holds
    args = [_term_fn(t) for t in phi.args]

    def holds(M, h):
        try:
            ext = M.preds[pred]
        except KeyError:
            raise SignatureMismatch(f"model does not interpret predicate {pred}") from None
        return tuple([a(M, h) for a in args]) in ext
    return holds


def _static(ver, fal) -> _Compiled:
    """A test: its only possible output is the input assignment."""
    return _Compiled(lambda M, h, k: ver(M, h) and k(h), ver, fal)


@lru_cache(maxsize=4096)
def _compile(phi: Formula, i: Context) -> _Compiled:
    """Closures for the verification and falsification of ``phi`` at ``i``."""
    if isinstance(phi, Atom):
        holds = _holds_fn(phi)
        return _static(holds, lambda M, h: not holds(M, h))

    if isinstance(phi, Not):
        body = _compile(phi.body, i)
        return _static(body.fal, body.ver)

    if isinstance(phi, Or):
        l, r = _compile(phi.left, i), _compile(phi.right, i)
        return _static(lambda M, h: l.ver(M, h) or r.ver(M, h), lambda M, h: l.fal(M, h) and r.fal(M, h))

    if isinstance(phi, (And, Imp)):
        l = _compile(phi.left, i)
        delta = contribution(phi.left, i)
        r = _compile(phi.right, extend(i, delta.delta))

        def every_continuation(M, h, test):
            # l has at least one output and all of them pass ``test``
            return l.ver(M, h) and not l.cont(M, h, lambda h1: not test(M, h1))

        if isinstance(phi, And):
            def and_cont(M, h, k):
                return l.cont(M, h, lambda h1: r.cont(M, h1, k))
            return _Compiled(
                and_cont,
                lambda M, h: l.cont(M, h, lambda h1: r.ver(M, h1)),
                lambda M, h: l.fal(M, h) or every_continuation(M, h, r.fal),
            )
        return _static(
            lambda M, h: l.fal(M, h) or every_continuation(M, h, r.ver),
            lambda M, h: l.cont(M, h, lambda h1: r.fal(M, h1)),
        )

    if isinstance(phi, (Exists, Forall)):
        x = phi.var
        b = _compile(phi.body, extend(i, [Var(x, phi.gender)]))
        if isinstance(phi, Exists):
            def ex_cont(M, h, k):
                return any(b.cont(M, {**h, x: d}, k) for d in range(M.size))
            return _Compiled(
                ex_cont,
                lambda M, h: any(b.ver(M, {**h, x: d}) for d in range(M.size)),
                lambda M, h: all(b.fal(M, {**h, x: d}) for d in range(M.size)),
            )
        return _static(
            lambda M, h: all(b.ver(M, {**h, x: d}) for d in range(M.size)),
            lambda M, h: any(b.fal(M, {**h, x: d}) for d in range(M.size)),
        )

    if isinstance(phi, Pro):
        x = phi.var
        b = _compile(phi.body, i)
        ants = [_term_fn(t) for t in i if t.gender == phi.gender]

        def pro_cont(M, h, k):
            return any(b.cont(M, {**h, x: a(M, h)}, k) for a in ants)
        return _Compiled(
            pro_cont,
            lambda M, h: any(b.ver(M, {**h, x: a(M, h)}) for a in ants),
            lambda M, h: any(b.fal(M, {**h, x: a(M, h)}) for a in ants),
        )
    raise TypeError(f"not a formula: {phi!r}")


def _compiled(phi: Formula, i: Context) -> _Compiled | None:
    if isinstance(contribution(phi, i), Undefined):
        return None
    return _compile(phi, i)


def evaluate(M: Model, h: Assignment, i: Sequence[Term], phi: Formula) -> FourValue:
    """Four-valued value of ``phi`` in ``M`` under ``h`` at context ``i``."""
    c = _compiled(phi, tuple(i))
    if c is None:
        return NEITHER
    return FourValue(c.ver(M, h), c.fal(M, h))


def verified(M: Model, h: Assignment, i: Sequence[Term], phi: Formula) -> bool:
    c = _compiled(phi, tuple(i))
    return c is not None and c.ver(M, h)


def outputs(M: Model, h: Assignment, i: Sequence[Term], phi: Formula) -> list[Assignment]:
    """The assignments under which ``phi`` is verified, witnesses included."""
    c = _compiled(phi, tuple(i))
    found: list[Assignment] = []
    if c is not None:
        c.cont(M, h, lambda h1: found.append(h1) and False)
    return found


# -------------------------------------------------------- model enumeration


def used_signature(formulas: Sequence[Formula], sig: Signature | None = None) -> Signature:
    """The part of ``sig`` actually mentioned by ``formulas`` (arities read off the atoms)."""
    out = Signature()
    for phi in formulas:
        for a in atoms(phi):
            out.preds[a.pred] = len(a.args)
            for t in (s for arg in a.args for s in subterms(arg)):
                if isinstance(t, Const):
                    out.consts[t.name] = t.gender
                elif isinstance(t, App) and not t.skolem:
                    out.funs[t.fn] = (len(t.args), t.gender)
    if sig is not None:
        for p in out.preds:
            if p in sig.preds and sig.preds[p] != out.preds[p]:
                raise SignatureMismatch(f"predicate {p} used with arity {out.preds[p]}")
    return out


def count_models(sig: Signature, size: int) -> int:
    n = 1
    for arity in sig.preds.values():
        n *= 2 ** (size ** arity)
    n *= size ** len(sig.consts)
    for arity, _ in sig.funs.values():
        n *= size ** (size ** arity)
    return n


def enumerate_models(sig: Signature, size: int, budget: int = 2_000_000) -> Iterator[Model]:
    """Every model of ``sig`` over ``{0..size-1}``, each exactly once, in a fixed order."""
    if size < 1:
        raise ValueError("size must be positive")
    total = count_models(sig, size)
    if total > budget:
        raise ModelBudgetExceeded(total, budget)
    preds = sorted(sig.preds.items())
    consts = sorted(sig.consts)
    funs = sorted(sig.funs.items())
    pred_tuples = [list(itertools.product(range(size), repeat=n)) for _, n in preds]
    fun_domains = [list(itertools.product(range(size), repeat=n)) for _, (n, _) in funs]
    pred_choices = [range(2 ** len(tups)) for tups in pred_tuples]
    const_choices = [range(size)] * len(consts)
    fun_choices = [itertools.product(range(size), repeat=len(dom)) for dom in fun_domains]
    fun_choices = [list(c) for c in fun_choices]
    for masks in itertools.product(*pred_choices):
        pext = {
            name: frozenset(t for k, t in enumerate(tups) if mask >> k & 1)
            for (name, _), tups, mask in zip(preds, pred_tuples, masks)
        }
        for cvals in itertools.product(*const_choices):
            for fvals in itertools.product(*fun_choices):
                funs_ = {name: dict(zip(dom, vals)) for (name, _), dom, vals in zip(funs, fun_domains, fvals)}
                yield Model._trusted(size, pext, dict(zip(consts, cvals)), funs_)


# ------------------------------------------------------------------- oracle

Resolution = dict[str, str]


def disambiguations(phi: Formula, i: Sequence[Term] = ()) -> Iterator[Resolution]:
    """Every choice of antecedent variable for each pronoun of ``phi``."""
    sites = list(pronoun_sites(phi, i))
    choices = [[t.name for t in s.antecedents if isinstance(t, Var)] for s in sites]
    for combo in itertools.product(*choices):
        yield {s.var: y for s, y in zip(sites, combo)}


@dataclass(frozen=True)
class NoCountermodelFound:
    """No model up to the searched sizes refutes the entailment.  Not a proof."""

    sizes: tuple[int, ...]
    theta: Resolution
    theta_prime: Resolution


@dataclass(frozen=True)
class Refutation:
    theta: Resolution
    theta_prime: Resolution
    model: Model
    assignment: Assignment


@dataclass(frozen=True)
class Countermodel:
    """Every disambiguation of the discourse is refuted; ``model`` refutes the first."""

    refutations: tuple[Refutation, ...]

    @property
    def model(self) -> Model:
        return self.refutations[0].model


def entail_oracle(
    premises: Sequence[Formula],
    conclusion: Formula,
    max_size: int = 2,
    i0: Sequence[Term] = (),
    budget: int = 2_000_000,
) -> NoCountermodelFound | Countermodel:
    """Search models up to ``max_size`` for a refutation of ambiguous entailment.

    The discourse entails the conclusion if some resolution of the premise
    pronouns and some resolution of the conclusion pronouns make the
    entailment classically valid.  A countermodel must therefore defeat every
    pair of resolutions (possibly each with a different model).  Premises are
    read as one dynamic conjunction, so later premises see the witnesses of
    earlier ones; the conclusion is evaluated at ``i0`` alone.
    """
    i0 = tuple(i0)
    ctxs = discourse_contexts(premises, i0)
    if isinstance(ctxs, Undefined):
        raise IllFormedDiscourse(ctxs)
    r = contribution(conclusion, i0)
    if isinstance(r, Undefined):
        raise IllFormedDiscourse(r, conclusion=True)

    body = conjoin(premises)
    thetas = list(disambiguations(body, i0)) if body is not None else [{}]
    primes = list(disambiguations(conclusion, i0))
    prem_fns = [None if body is None else _compile(resolve_pronouns(body, t), i0).ver for t in thetas]
    conc_fns = [_compile(resolve_pronouns(conclusion, t), i0).ver for t in primes]
    sig = used_signature(list(premises) + [conclusion])
    free_ctx = [t.name for t in i0 if isinstance(t, Var)]

    open_pairs = list(itertools.product(range(len(thetas)), range(len(primes))))
    refuted: dict[tuple[int, int], Refutation] = {}
    for size in range(1, max_size + 1):
        for M in enumerate_models(sig, size, budget):
            for vals in itertools.product(range(size), repeat=len(free_ctx)):
                h = dict(zip(free_ctx, vals))
                pv = [fn is None or fn(M, h) for fn in prem_fns]
                if not any(pv):
                    continue
                cv = [fn(M, h) for fn in conc_fns]
                for pair in open_pairs:
                    if pv[pair[0]] and not cv[pair[1]]:
                        refuted[pair] = Refutation(thetas[pair[0]], primes[pair[1]], M, h)
                open_pairs = [p for p in open_pairs if p not in refuted]
                if not open_pairs:
                    order = sorted(refuted)
                    return Countermodel(tuple(refuted[p] for p in order))
    a, b = open_pairs[0]
    return NoCountermodelFound(tuple(range(1, max_size + 1)), thetas[a], primes[b])


def entail_discourse(d: Discourse, max_size: int = 2, i0: Sequence[Term] = (), budget: int = 2_000_000):
    if d.conclusion is None:
        raise ValueError("discourse has no conclusion")
    return entail_oracle(d.premises, d.conclusion, max_size, i0, budget)


# ------------------------------------------------------------- model files

_SET = re.compile(r"\{(.*)\}")


def parse_model(text: str) -> Model:
    """Read the line format ``universe N`` / ``pred p = {...}`` / ``const c = k`` / ``fun f = {a->b}``."""
    size = None
    preds: dict[str, frozenset] = {}
    consts: dict[str, int] = {}
    funs: dict[str, dict] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            kind, rest = line.split(None, 1)
            if kind == "universe":
                size = int(rest)
                continue
            name, value = (s.strip() for s in rest.split("=", 1))
            if kind == "const":
                consts[name] = int(value)
                continue
            body = _SET.fullmatch(value).group(1).strip()
            if kind == "pred":
                preds[name] = frozenset(_tuples(body))
            elif kind == "fun":
                table = {}
                for item in filter(None, (s.strip() for s in re.split(r",(?![^()]*\))", body))):
                    arg, res = item.split("->")
                    key = _tuple(arg.strip())
                    table[key] = int(res)
                funs[name] = table
            else:
                raise ValueError(kind)
        except (ValueError, AttributeError):
            raise ParseError(f"bad model line {lineno}: {line!r}") from None
    if size is None:
        raise ParseError("model file lacks a 'universe N' line")
    return Model(size, preds, consts, funs)


def _tuple(s: str) -> tuple[int, ...]:
    s = s.strip()
    if s.startswith("("):
        inner = s[1:-1].strip()
        return tuple(int(v) for v in inner.split(",")) if inner else ()
    return (int(s),)


def _tuples(body: str) -> list[tuple[int, ...]]:
    if not body:
        return []
    items = re.findall(r"\([^()]*\)|[^,\s()]+", body)
    return [_tuple(it) for it in items]


def render_model(M: Model) -> str:
    def tup(t):
        return str(t[0]) if len(t) == 1 else "(" + ",".join(map(str, t)) + ")"

    lines = [f"universe {M.size}"]
    for name in sorted(M.preds):
        lines.append(f"pred {name} = {{" + ", ".join(tup(t) for t in sorted(M.preds[name])) + "}")
    for name in sorted(M.consts):
        lines.append(f"const {name} = {M.consts[name]}")
    for name in sorted(M.funs):
        items = ", ".join(f"{tup(k)}->{v}" for k, v in sorted(M.funs[name].items()))
        lines.append(f"fun {name} = {{{items}}}")
    return "\n".join(lines) + "\n"
