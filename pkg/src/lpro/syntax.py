"""Abstract syntax, parser and printer for the pronoun language.

Formulas are first-order formulas whose variables, constants and function
symbols carry a gender, extended with the pronoun binder ``pro x:g body``.
The tableau also needs terms that never come out of the parser: free
variables (``X3:he``) and skolem terms (``sk2:it(X3:he)``).  Every term
occurrence has a ``pro`` flag recording that it instantiates a pronoun; the
flag takes no part in equality or hashing.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Union


class Gender(str, enum.Enum):
    HE = "he"
    SHE = "she"
    IT = "it"

    def __str__(self) -> str:
        return self.value


# --------------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    """A bound (object-language) variable occurrence."""

    name: str
    gender: Gender
    pro: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class FreeVar:
    """Tableau free variable, introduced by a gamma rule."""

    serial: int
    gender: Gender
    pro: bool = field(default=False, compare=False)

    @property
    def name(self) -> str:
        return f"X{self.serial}"


@dataclass(frozen=True)
class Const:
    name: str
    gender: Gender
    pro: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class App:
    """Function application; skolem terms have ``skolem=True``."""

    fn: str
    gender: Gender
    args: tuple["Term", ...] = ()
    skolem: bool = False
    pro: bool = field(default=False, compare=False)


Term = Union[Var, FreeVar, Const, App]


# ------------------------------------------------------------------ formulas


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Imp:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    gender: Gender
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    gender: Gender
    body: "Formula"


@dataclass(frozen=True)
class Pro:
    var: str
    gender: Gender
    body: "Formula"


Formula = Union[Atom, Not, And, Or, Imp, Forall, Exists, Pro]
Binary = (And, Or, Imp)
Binder = (Forall, Exists, Pro)


@dataclass
class Signature:
    preds: dict[str, int] = field(default_factory=dict)
    consts: dict[str, Gender] = field(default_factory=dict)
    funs: dict[str, tuple[int, Gender]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for table in (self.preds, self.consts, self.funs):
            clash = seen & table.keys()
            if clash:
                raise ValueError(f"symbol declared twice: {sorted(clash)[0]}")
            seen |= table.keys()

    def merged(self, other: "Signature") -> "Signature":
        sig = Signature(dict(self.preds), dict(self.consts), dict(self.funs))
        for name, n in other.preds.items():
            if sig.preds.setdefault(name, n) != n:
                raise ValueError(f"predicate {name} used with arities {sig.preds[name]} and {n}")
        sig.consts.update(other.consts)
        sig.funs.update(other.funs)
        Signature(sig.preds, sig.consts, sig.funs)
        return sig


@dataclass(frozen=True)
class Discourse:
    premises: tuple[Formula, ...]
    conclusion: Formula | None
    signature: Signature = field(default_factory=Signature, compare=False)


# ---------------------------------------------------------------- traversal


def children(phi: Formula) -> tuple[Formula, ...]:
    if isinstance(phi, Atom):
        return ()
    if isinstance(phi, Not):
        return (phi.body,)
    if isinstance(phi, Binary):
        return (phi.left, phi.right)
    return (phi.body,)


def subformulas(phi: Formula) -> Iterator[Formula]:
    yield phi
    for c in children(phi):
        yield from subformulas(c)


def atoms(phi: Formula) -> Iterator[Atom]:
    return (f for f in subformulas(phi) if isinstance(f, Atom))


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)


def formula_terms(phi: Formula) -> Iterator[Term]:
    for a in atoms(phi):
        for t in a.args:
            yield from subterms(t)


def has_pro(phi: Formula) -> bool:
    return any(isinstance(f, Pro) for f in subformulas(phi))


def term_has_pro_mark(t: Term) -> bool:
    return any(s.pro for s in subterms(t))


def free_vars_of_term(t: Term) -> set[FreeVar]:
    return {s for s in subterms(t) if isinstance(s, FreeVar)}


def free_vars(phi: Formula) -> set[FreeVar]:
    return {t for t in formula_terms(phi) if isinstance(t, FreeVar)}


def unbound_vars(phi: Formula, bound: frozenset[str] = frozenset()) -> set[str]:
    """Names of Var occurrences not in the syntactic scope of a binder."""
    if isinstance(phi, Atom):
        return {
            t.name for a in phi.args for t in subterms(a)
            if isinstance(t, Var) and t.name not in bound
        }
    if isinstance(phi, Binder):
        return unbound_vars(phi.body, bound | {phi.var})
    out: set[str] = set()
    for c in children(phi):
        out |= unbound_vars(c, bound)
    return out


def binders(phi: Formula) -> list[Formula]:
    return [f for f in subformulas(phi) if isinstance(f, Binder)]


def map_terms(phi: Formula, fn: Callable[[Term], Term]) -> Formula:
    """Rebuild ``phi`` with ``fn`` applied to every top-level atom argument."""
    if isinstance(phi, Atom):
        return Atom(phi.pred, tuple(fn(t) for t in phi.args))
    if isinstance(phi, Not):
        return Not(map_terms(phi.body, fn))
    if isinstance(phi, Binary):
        return type(phi)(map_terms(phi.left, fn), map_terms(phi.right, fn))
    return type(phi)(phi.var, phi.gender, map_terms(phi.body, fn))


def replace_in_term(t: Term, name: str, new: Term) -> Term:
    if isinstance(t, Var) and t.name == name:
        # the occurrence keeps its own mark on top of whatever ``new`` carries
        return replace(new, pro=new.pro or t.pro)
    if isinstance(t, App) and t.args:
        return replace(t, args=tuple(replace_in_term(a, name, new) for a in t.args))
    return t


def substitute(phi: Formula, name: str, new: Term) -> Formula:
    """Replace free occurrences of bound variable ``name`` by ``new``."""
    if isinstance(phi, Atom):
        return Atom(phi.pred, tuple(replace_in_term(t, name, new) for t in phi.args))
    if isinstance(phi, Not):
        return Not(substitute(phi.body, name, new))
    if isinstance(phi, Binary):
        return type(phi)(substitute(phi.left, name, new), substitute(phi.right, name, new))
    if phi.var == name:
        return phi
    return type(phi)(phi.var, phi.gender, substitute(phi.body, name, new))


def strip_pro(t: Term) -> Term:
    if isinstance(t, App):
        return App(t.fn, t.gender, tuple(strip_pro(a) for a in t.args), t.skolem)
    return replace(t, pro=False) if t.pro else t


def conjoin(formulas) -> Formula | None:
    """Left-nested conjunction, or None for an empty sequence."""
    out = None
    for f in formulas:
        out = f if out is None else And(out, f)
    return out


# ----------------------------------------------------------------- printing

_LEVEL = {Imp: 1, Or: 2, And: 3}
_OP = {Imp: "->", Or: "|", And: "&"}
_KEYWORD = {Forall: "forall", Exists: "exists", Pro: "pro"}
_UNARY = 4


def render_term(t: Term, genders: bool = True) -> str:
    if isinstance(t, Var) or isinstance(t, Const):
        s = t.name
    elif isinstance(t, FreeVar):
        s = f"{t.name}:{t.gender}" if genders else t.name
    elif t.skolem:
        s = f"{t.fn}:{t.gender}" if genders else t.fn
        if t.args:
            s += "(" + ", ".join(render_term(a, genders) for a in t.args) + ")"
    else:
        s = t.fn + "(" + ", ".join(render_term(a, genders) for a in t.args) + ")"
    return s + "^pro" if t.pro else s


def render(phi: Formula, genders: bool = True) -> str:
    return _render(phi, 0, genders)


def _render(phi: Formula, need: int, genders: bool) -> str:
    if isinstance(phi, Atom):
        return phi.pred + "(" + ", ".join(render_term(t, genders) for t in phi.args) + ")"
    if isinstance(phi, Not):
        return "~" + _render(phi.body, _UNARY, genders)
    if isinstance(phi, Binder):
        return f"{_KEYWORD[type(phi)]} {phi.var}:{phi.gender} " + _render(phi.body, _UNARY, genders)
    level = _LEVEL[type(phi)]
    if isinstance(phi, Imp):
        lhs, rhs = _render(phi.left, level + 1, genders), _render(phi.right, level, genders)
    else:
        lhs, rhs = _render(phi.left, level, genders), _render(phi.right, level + 1, genders)
    s = f"{lhs} {_OP[type(phi)]} {rhs}"
    return f"({s})" if level < need else s


def render_discourse(d: Discourse) -> str:
    lines = [render(p) for p in d.premises]
    if d.conclusion is not None:
        lines += ["|=", render(d.conclusion)]
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ parsing


class ParseError(ValueError):
    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        super().__init__(message if pos is None else f"{message} (at position {pos})")


class ScopeError(ParseError):
    """Unbound variable or gender disagreement with the binder."""


class ArityError(ParseError):
    pass


_TOKEN = re.compile(r"\s*(?:(->|[()~&|,:;])|([A-Za-z][A-Za-z0-9_]*))")
_KEYWORDS = {"forall", "exists", "pro"}
_GENDERS = {g.value: g for g in Gender}


def tokenize(text: str) -> list[tuple[str, int]]:
    toks, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}", pos)
        toks.append((m.group(1) or m.group(2), m.start(m.lastindex)))
        pos = m.end()
    toks.append(("<eof>", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, sig: Signature | None, names: set[str]):
        self.toks = tokenize(text)
        self.k = 0
        self.sig = sig
        self.infer = sig is None
        self.inferred = Signature()
        self.names = names  # binder names already taken (alpha-renaming)
        self.scope: list[tuple[str, str, Gender]] = []  # (source name, internal, gender)

    @property
    def tok(self) -> str:
        return self.toks[self.k][0]

    @property
    def pos(self) -> int:
        return self.toks[self.k][1]

    def take(self, expected: str | None = None) -> str:
        t = self.tok
        if expected is not None and t != expected:
            what = "end of input" if t == "<eof>" else repr(t)
            raise ParseError(f"expected {expected!r}, found {what}", self.pos)
        if t == "<eof>":
            raise ParseError("unexpected end of input", self.pos)
        self.k += 1
        return t

    def ident(self) -> str:
        t = self.tok
        if t == "<eof>" or not t[0].isalpha() or t in _KEYWORDS:
            what = "end of input" if t == "<eof>" else repr(t)
            raise ParseError(f"expected identifier, found {what}", self.pos)
        self.k += 1
        return t

    def gender(self) -> Gender:
        pos = self.pos
        t = self.take()
        if t not in _GENDERS:
            raise ParseError(f"unknown gender {t!r}", pos)
        return _GENDERS[t]

    # formula := imp
    def formula(self) -> Formula:
        left = self.disj()
        if self.tok == "->":
            self.take()
            return Imp(left, self.formula())
        return left

    def disj(self) -> Formula:
        f = self.conj()
        while self.tok == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.tok == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        t = self.tok
        if t == "~":
            self.take()
            return Not(self.unary())
        if t == "(":
            self.take()
            f = self.formula()
            self.take(")")
            return f
        if t in _KEYWORDS:
            self.take()
            pos = self.pos
            src = self.ident()
            if src in _GENDERS:
                raise ParseError(f"gender keyword {src!r} used as variable", pos)
            self.take(":")
            g = self.gender()
            internal = self.fresh(src)
            self.scope.append((src, internal, g))
            body = self.unary()
            self.scope.pop()
            return {"forall": Forall, "exists": Exists, "pro": Pro}[t](internal, g, body)
        return self.atom()

    def fresh(self, src: str) -> str:
        name, k = src, 1
        while name in self.names:
            k += 1
            name = f"{src}{k}"
        self.names.add(name)
        return name

    def atom(self) -> Atom:
        pos = self.pos
        pred = self.ident()
        if pred in _GENDERS:
            raise ParseError(f"gender keyword {pred!r} used as predicate", pos)
        self.take("(")
        args = self.term_list()
        self.check_pred(pred, len(args), pos)
        return Atom(pred, tuple(args))

    def term_list(self) -> list[Term]:
        args: list[Term] = []
        if self.tok != ")":
            args.append(self.term())
            while self.tok == ",":
                self.take()
                args.append(self.term())
        self.take(")")
        return args

    def term(self) -> Term:
        pos = self.pos
        name = self.ident()
        g = None
        if self.tok == ":":
            self.take()
            g = self.gender()
        if self.tok == "(":
            self.take()
            args = tuple(self.term_list())
            return App(name, self.fun_gender(name, len(args), g, pos), args)
        for src, internal, bg in reversed(self.scope):
            if src == name:
                if g is not None and g != bg:
                    raise ScopeError(f"variable {name} is bound as {bg} but annotated {g}", pos)
                return Var(internal, bg)
        return Const(name, self.const_gender(name, g, pos))

    def check_pred(self, pred: str, n: int, pos: int) -> None:
        table = self.inferred.preds if self.infer else self.sig.preds
        if pred not in table:
            if not self.infer:
                raise ArityError(f"unknown predicate {pred!r}", pos)
            table[pred] = n
        elif table[pred] != n:
            raise ArityError(f"predicate {pred} has arity {table[pred]}, used with {n}", pos)

    def const_gender(self, name: str, g: Gender | None, pos: int) -> Gender:
        if not self.infer and name in self.sig.consts:
            declared = self.sig.consts[name]
            if g is not None and g != declared:
                raise ScopeError(f"constant {name} is {declared} but annotated {g}", pos)
            return declared
        if self.infer and g is not None:
            if self.inferred.consts.setdefault(name, g) != g:
                raise ScopeError(f"constant {name} annotated with two genders", pos)
            return g
        if self.infer and name in self.inferred.consts:
            return self.inferred.consts[name]
        raise ScopeError(f"unbound variable {name}", pos)

    def fun_gender(self, name: str, n: int, g: Gender | None, pos: int) -> Gender:
        if not self.infer:
            if name not in self.sig.funs:
                raise ArityError(f"unknown function {name!r}", pos)
            arity, declared = self.sig.funs[name]
        elif name in self.inferred.funs:
            arity, declared = self.inferred.funs[name]
        elif g is not None:
            self.inferred.funs[name] = (n, g)
            return g
        else:
            raise ScopeError(f"function {name} needs a gender annotation", pos)
        if arity != n:
            raise ArityError(f"function {name} has arity {arity}, used with {n}", pos)
        if g is not None and g != declared:
            raise ScopeError(f"function {name} is {declared} but annotated {g}", pos)
        return declared


def parse(text: str, signature: Signature | None = None, *, taken: set[str] | None = None) -> Formula:
    """Parse one closed formula.

    Without a signature, predicate arities are inferred from use and unbound
    identifiers must carry a gender annotation (``b:he``) to count as
    constants.  ``taken`` collects binder names across several calls so that
    all binders of a discourse get distinct internal names.
    """
    p = _Parser(text, signature, set() if taken is None else taken)
    if p.tok == "<eof>":
        raise ParseError("empty formula", 0)
    f = p.formula()
    if p.tok != "<eof>":
        raise ParseError(f"unexpected {p.tok!r}", p.pos)
    return f


def _discourse_lines(text: str) -> tuple[list[str], list[str] | None]:
    premises: list[str] = []
    conclusion: list[str] | None = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [s.strip() for s in line.split("|=")]
        for k, part in enumerate(parts):
            if k > 0:
                if conclusion is not None:
                    raise ParseError("more than one '|=' separator")
                conclusion = []
            target = premises if conclusion is None else conclusion
            target.extend(s.strip() for s in part.split(";") if s.strip())
    if conclusion is not None and len(conclusion) != 1:
        raise ParseError(f"expected exactly one conclusion formula, found {len(conclusion)}")
    return premises, conclusion


def parse_discourse(text: str, signature: Signature | None = None) -> Discourse:
    """Parse premises and an optional conclusion.

    Premises are separated by newlines or ``;``; the conclusion follows a
    ``|=`` separator.  ``#`` starts a comment.
    """
    premises, conclusion = _discourse_lines(text)
    taken: set[str] = set()
    sig = signature
    if sig is None:
        sig = infer_signature(premises + (conclusion or []))
    parsed = [parse(s, sig, taken=taken) for s in premises]
    concl = parse(conclusion[0], sig, taken=taken) if conclusion else None
    return Discourse(tuple(parsed), concl, sig)


def infer_signature(texts: list[str]) -> Signature:
    sig = Signature()
    for s in texts:
        p = _Parser(s, None, set())
        p.formula()
        sig = sig.merged(p.inferred)
        sig.funs.update(p.inferred.funs)
    return sig


def parse_signature(text: str) -> Signature:
    """Read lines ``pred man/1``, ``const b:he``, ``fun father/1:he``."""
    sig = Signature()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = (re.fullmatch(r"pred\s+([A-Za-z]\w*)\s*/\s*(\d+)", line)
             or re.fullmatch(r"const\s+([A-Za-z]\w*)\s*:\s*(he|she|it)", line)
             or re.fullmatch(r"fun\s+([A-Za-z]\w*)\s*/\s*(\d+)\s*:\s*(he|she|it)", line))
        if not m:
            raise ParseError(f"bad signature line {lineno}: {line!r}")
        kind = line.split()[0]
        name = m.group(1)
        if any(name in t for t in (sig.preds, sig.consts, sig.funs)):
            raise ParseError(f"symbol {name} declared twice (line {lineno})")
        if kind == "pred":
            sig.preds[name] = int(m.group(2))
        elif kind == "const":
            sig.consts[name] = Gender(m.group(2))
        else:
            sig.funs[name] = (int(m.group(2)), Gender(m.group(3)))
    return sig


def render_signature(sig: Signature) -> str:
    lines = [f"pred {p}/{n}" for p, n in sig.preds.items()]
    lines += [f"const {c}:{g}" for c, g in sig.consts.items()]
    lines += [f"fun {f}/{n}:{g}" for f, (n, g) in sig.funs.items()]
    return "\n".join(lines) + "\n"
