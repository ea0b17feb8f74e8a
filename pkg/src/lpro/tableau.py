"""Signed free-variable tableaux that resolve pronouns during proof search.

Every node carries a label ``(input, output, origin, sign)``.  The input
context lists the antecedents a pronoun in the node may pick; the output is
what the node adds for formulas to its right.  Outputs are fixed when a node
is created (a *plan* reserves the skolem terms or free variables that the
node's existentials will be instantiated with), because a node's output can
be consumed on a different branch than the one where the node is expanded.

Search is depth-first with iterative deepening.  A budget bounds the number
of gamma re-instantiations plus pronoun instantiations along a branch.
Choice points are closing pairs and pronoun antecedents; the substitution
and the pronoun commitments are restored on backtracking.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence

from lpro.context import Undefined, contribution, discourse_contexts
from lpro.semantics import IllFormedDiscourse
from lpro.syntax import (
    And, App, Atom, Const, Discourse, Exists, Forall, Formula, FreeVar, Gender,
    Imp, Not, Or, Pro, Term, Var, conjoin, free_vars, free_vars_of_term,
    map_terms, render, render_term, strip_pro, substitute, term_has_pro_mark,
)

PREMISE, CONCLUSION = "p", "c"

Substitution = dict[FreeVar, Term]


# ------------------------------------------------------------- unification


def walk(t: Term, subst: Substitution) -> Term:
    """Apply ``subst`` to ``t`` completely, keeping the occurrence's PRO mark."""
    if isinstance(t, FreeVar):
        bound = subst.get(t)
        if bound is None:
            return t
        out = walk(bound, subst)
        return replace(out, pro=True) if t.pro and not out.pro else out
    if isinstance(t, App) and t.args:
        return replace(t, args=tuple(walk(a, subst) for a in t.args))
    return t


def _deref(t: Term, subst: Substitution) -> Term:
    while isinstance(t, FreeVar) and t in subst:
        t = subst[t]
    return t


def _occurs(v: FreeVar, t: Term, subst: Substitution) -> bool:
    t = _deref(t, subst)
    if isinstance(t, FreeVar):
        return t == v
    return isinstance(t, App) and any(_occurs(v, a, subst) for a in t.args)


def _unify(s: Term, t: Term, subst: Substitution) -> Substitution | None:
    s, t = _deref(s, subst), _deref(t, subst)
    if isinstance(s, FreeVar) or isinstance(t, FreeVar):
        if s == t:
            return subst
        v, other = (s, t) if isinstance(s, FreeVar) else (t, s)
        if _occurs(v, other, subst):
            return None
        return {**subst, v: strip_pro(other)}
    if isinstance(s, App) and isinstance(t, App):
        if (s.fn, s.skolem, len(s.args)) != (t.fn, t.skolem, len(t.args)):
            return None
        return unify_all(s.args, t.args, subst)
    return subst if s == t else None


def unify_all(ss: Sequence[Term], ts: Sequence[Term], subst: Substitution | None = None) -> Substitution | None:
    out = {} if subst is None else subst
    if len(ss) != len(ts):
        return None
    for s, t in zip(ss, ts):
        out = _unify(s, t, out)
        if out is None:
            return None
    return out


def unify(s: Term, t: Term, subst: Substitution | None = None) -> Substitution | None:
    """Most general unifier extending ``subst``, or None on clash or occurs-check failure.

    PRO marks are ignored.  The result is in triangular form; pass it
    through :func:`idempotent` for a fully applied view.
    """
    return _unify(s, t, {} if subst is None else subst)


def idempotent(subst: Substitution) -> Substitution:
    return {v: walk(t, subst) for v, t in subst.items()}


# ------------------------------------------------------------ tableau data


@dataclass(frozen=True)
class Entry:
    """A context member: the term plus the bound variable that introduced it."""

    term: Term
    binder: str


@dataclass(frozen=True)
class PlanAnd:
    left: "Plan"
    right: "Plan"


@dataclass(frozen=True)
class PlanEx:
    entry: Entry
    body: "Plan"


@dataclass(frozen=True)
class PlanPro:
    body: "Plan"


Plan = PlanAnd | PlanEx | PlanPro | None


def plan_output(plan: Plan) -> tuple[Entry, ...]:
    if plan is None:
        return ()
    if isinstance(plan, PlanAnd):
        return plan_output(plan.left) + plan_output(plan.right)
    if isinstance(plan, PlanEx):
        return (plan.entry,) + plan_output(plan.body)
    return plan_output(plan.body)


@dataclass(frozen=True)
class NodeLabel:
    input: tuple[Entry, ...]
    output: tuple[Entry, ...]
    origin: str  # PREMISE or CONCLUSION
    sign: bool  # True for +

    @property
    def tag(self) -> str:
        return f"[{self.origin},{'+' if self.sign else '-'}]"


@dataclass(frozen=True)
class ResolutionRecord:
    pronoun: str
    gender: Gender
    term: Term  # the antecedent as placed in the formula (PRO-marked)
    binder: str  # quantifier variable that introduced the antecedent
    origin: str
    node: int


@dataclass(eq=False)
class Node:
    serial: int
    formula: Formula
    label: NodeLabel
    plan: Plan
    rule: str
    parent: int | None = None
    shared: bool = False  # output is consumed by another node
    record: ResolutionRecord | None = None

    @property
    def sign(self) -> bool:
        return self.label.sign

    @property
    def origin(self) -> str:
        return self.label.origin


@dataclass(frozen=True)
class Branch:
    nodes: tuple[Node, ...]


@dataclass(frozen=True)
class Closure:
    positive: Node
    negative: Node
    bindings: Substitution  # what this closure added to the substitution


@dataclass(frozen=True)
class TraceLine:
    branch: str  # "" for the root, one digit per fork taken
    node: Node | None = None
    closure: Closure | None = None


@dataclass(frozen=True)
class Limits:
    budget_cap: int = 32
    budget_start: int = 2
    max_steps: int = 200_000
    goodness: bool = True

    def schedule(self) -> list[int]:
        if self.budget_cap < 1 or self.budget_start < 1 or self.max_steps < 1:
            raise ValueError("limits must be positive")
        out, b = [], min(self.budget_start, self.budget_cap)
        while b < self.budget_cap:
            out.append(b)
            b *= 2
        return out + [self.budget_cap]


@dataclass
class Closed:
    trace: list[TraceLine]
    records: tuple[ResolutionRecord, ...]
    mgu: Substitution
    budget: int
    log: list[str] = field(default_factory=list)

    @property
    def closures(self) -> list[Closure]:
        return [line.closure for line in self.trace if line.closure is not None]

    @property
    def nodes(self) -> list[Node]:
        return [line.node for line in self.trace if line.node is not None]


@dataclass
class Exhausted:
    """Every branch saturated without closing; only possible without gamma formulas."""

    budget: int
    log: list[str] = field(default_factory=list)


@dataclass
class LimitReached:
    budget: int
    steps: int
    log: list[str] = field(default_factory=list)


ProofResult = Closed | Exhausted | LimitReached


class UnresolvablePronoun(Exception):
    def __init__(self, var: str, gender: Gender):
        self.var, self.gender = var, gender
        super().__init__(f"unresolvable pronoun {var}:{gender}")


class _StepLimit(Exception):
    pass


_MISSING = object()


# ---------------------------------------------------------------- the prover


class Tableau:
    """One proof attempt over a discourse; ``search(budget)`` yields on closure."""

    def __init__(self, discourse: Discourse, i0: Sequence[Var] = (), limits: Limits = Limits()):
        ctxs = discourse_contexts(discourse.premises, i0)
        if isinstance(ctxs, Undefined):
            raise IllFormedDiscourse(ctxs)
        if discourse.conclusion is None:
            raise ValueError("discourse has no conclusion")
        r = contribution(discourse.conclusion, i0)
        if isinstance(r, Undefined):
            raise IllFormedDiscourse(r, conclusion=True)
        self.discourse = discourse
        self.seed = tuple(Entry(Const(v.name, v.gender), v.name) for v in i0)
        self.limits = limits
        self.log: list[str] = []
        self.steps = 0
        self.reset()

    def reset(self) -> None:
        self.subst: Substitution = {}
        self.commit: dict[str, str] = {}
        self.trace: list[TraceLine] = []
        self.limit_hit = False
        self._var = self._sk = self._serial = 0

    # -- fresh symbols -------------------------------------------------------

    def fresh_var(self, g: Gender) -> FreeVar:
        self._var += 1
        return FreeVar(self._var, g)

    def skolem(self, g: Gender, phi: Formula, ctx: Sequence[Entry]) -> App:
        """Skolem term over the free variables of ``phi`` and of the context terms."""
        fv: set[FreeVar] = set()
        for v in free_vars(phi):
            fv |= free_vars_of_term(walk(v, self.subst))
        for e in ctx:
            fv |= free_vars_of_term(walk(e.term, self.subst))
        self._sk += 1
        return App(f"sk{self._sk}", g, tuple(sorted(fv, key=lambda v: v.serial)), skolem=True)

    def plan(self, phi: Formula, ctx: tuple[Entry, ...], sign: bool) -> Plan:
        if isinstance(phi, And):
            left = self.plan(phi.left, ctx, sign)
            right = self.plan(phi.right, ctx + plan_output(left), sign)
            return PlanAnd(left, right) if left or right else None
        if isinstance(phi, Exists):
            t = self.skolem(phi.gender, phi, ctx) if sign else self.fresh_var(phi.gender)
            e = Entry(t, phi.var)
            return PlanEx(e, self.plan(substitute(phi.body, phi.var, t), ctx + (e,), sign))
        if isinstance(phi, Pro):
            body = self.plan(phi.body, ctx, sign)
            return PlanPro(body) if body else None
        return None

    def node(self, phi, ctx, origin, sign, rule, parent=None, plan=_MISSING, shared=False, record=None) -> Node:
        if plan is _MISSING:
            plan = self.plan(phi, ctx, sign)
        out = plan_output(plan)
        self._serial += 1
        return Node(self._serial, phi, NodeLabel(ctx, out, origin, sign), plan, rule,
                    parent, shared and bool(out), record)

    def initial_tableau(self) -> Branch:
        nodes = []
        premises = conjoin(self.discourse.premises)
        if premises is not None:
            nodes.append(self.node(premises, self.seed, PREMISE, True, "premises"))
        nodes.append(self.node(self.discourse.conclusion, self.seed, CONCLUSION, False, "conclusion"))
        return Branch(tuple(nodes))

    # -- rules ---------------------------------------------------------------

    def expand(self, n: Node, uses: int = 0) -> tuple[list[tuple[list[list[Node]], ResolutionRecord | None]], bool, int]:
        """Apply the rule for ``n``.

        Returns ``(alternatives, again, cost)``: each alternative is a list of
        branches (each a list of new nodes) plus the pronoun resolution it
        commits to; ``again`` says whether ``n`` may be expanded again later
        on the same branch; ``cost`` is the budget the expansion consumes.
        """
        phi, lab, sign = n.formula, n.label, n.sign
        i, rho = lab.input, lab.origin
        tag = "+" if sign else "-"

        def mk(psi, ctx, s, rule, **kw):
            return self.node(psi, ctx, rho, s, f"{'+' if sign else '-'}:{rule}", n.serial, **kw)

        if isinstance(phi, Not):
            return [([[mk(phi.body, i, not sign, "not")]], None)], False, 0

        if isinstance(phi, And):
            plan = n.plan if uses == 0 else self.plan(phi, i, sign)
            pl, pr = (plan.left, plan.right) if plan else (None, None)
            a = mk(phi.left, i, sign, "and", plan=pl, shared=True)
            b = mk(phi.right, i + plan_output(pl), sign, "and", plan=pr, shared=n.shared)
            again = not sign and not n.shared and _has_free_var(plan)
            branches = [[a, b]] if sign else [[a], [b]]
            return [(branches, None)], again, min(uses, 1)

        if isinstance(phi, Or):
            a, b = mk(phi.left, i, sign, "or"), mk(phi.right, i, sign, "or")
            return [([[a], [b]] if sign else [[a, b]], None)], False, 0

        if isinstance(phi, Imp):
            pl = self.plan(phi.left, i, not sign)
            a = mk(phi.left, i, not sign, "imp", plan=pl, shared=True)
            b = mk(phi.right, i + plan_output(pl), sign, "imp")
            again = sign and _has_free_var(pl)
            return [([[a], [b]] if sign else [[a, b]], None)], again, min(uses, 1)

        if isinstance(phi, Forall):
            if sign:
                t = self.fresh_var(phi.gender)
                e = Entry(t, phi.var)
                child = mk(substitute(phi.body, phi.var, t), i + (e,), sign, "forall")
                return [([[child]], None)], True, min(uses, 1)
            t = self.skolem(phi.gender, phi, i)
            e = Entry(t, phi.var)
            child = mk(substitute(phi.body, phi.var, t), i + (e,), sign, "forall")
            return [([[child]], None)], False, 0

        if isinstance(phi, Exists):
            gamma = not sign and not n.shared
            if uses == 0:
                e, body_plan = n.plan.entry, n.plan.body
            else:
                e, body_plan = Entry(self.fresh_var(phi.gender), phi.var), _MISSING
            child = mk(substitute(phi.body, phi.var, e.term), i + (e,), sign, "exists",
                       plan=body_plan, shared=n.shared)
            return [([[child]], None)], gamma, min(uses, 1)

        if isinstance(phi, Pro):
            return self._pronoun(n, mk), False, 1

        raise TypeError(f"no rule for {phi!r}")

    def _pronoun(self, n: Node, mk):
        phi = n.formula
        matching = [e for e in n.label.input if e.term.gender == phi.gender]
        if not matching:
            raise UnresolvablePronoun(phi.var, phi.gender)
        committed = self.commit.get(phi.var)
        body_plan = n.plan.body if n.plan else None
        alts, seen = [], set()
        for e in reversed(matching):  # most recent antecedent first
            key = (walk(e.term, self.subst), e.binder)
            if key in seen or (committed is not None and e.binder != committed):
                continue
            seen.add(key)
            rec = ResolutionRecord(phi.var, phi.gender, replace(e.term, pro=True), e.binder, n.origin, 0)
            child = mk(substitute(phi.body, phi.var, rec.term), n.label.input, n.sign, "pro",
                       plan=body_plan, shared=n.shared)
            rec = replace(rec, node=child.serial)
            child.record = rec
            alts.append(([[child]], rec))
        return alts

    # -- search --------------------------------------------------------------

    def search(self, budget: int) -> Iterator[None]:
        """Yield once per way of closing the whole tableau within ``budget``."""
        self.reset()
        root = self.initial_tableau()
        for nd in root.nodes:
            self.trace.append(TraceLine("", nd))
        yield from self._solve(tuple((nd, 0) for nd in root.nodes), (), budget, "")

    def _solve(self, queue, lits, budget, bid) -> Iterator[None]:
        self.steps += 1
        if self.steps > self.limits.max_steps:
            raise _StepLimit
        if not queue:
            return
        (n, uses), rest = queue[0], queue[1:]
        if isinstance(n.formula, Atom):
            yield from self._literal(n, rest, lits, budget, bid)
            return
        alts, again, cost = self.expand(n, uses)
        if cost > budget:
            self.limit_hit = True
            yield from self._solve(rest, lits, budget, bid)
            return
        tail = rest + ((n, uses + 1),) if again else rest
        for branches, rec in alts:
            saved = self.commit
            if rec is not None:
                self.log.append(f"try {rec.pronoun}:{rec.gender} -> {self._show(rec.term, False)} "
                                f"(introduced by {rec.binder}, budget {budget})")
                self.commit = {**saved, rec.pronoun: rec.binder}
            yield from self._branches(branches, tail, lits, budget - cost, bid)
            if rec is not None:
                self.log.append(f"retract {rec.pronoun}:{rec.gender} -> {self._show(rec.term, False)}")
            self.commit = saved

    def _branches(self, branches, tail, lits, budget, bid, k=0) -> Iterator[None]:
        if k == len(branches):
            yield
            return
        child_bid = bid if len(branches) == 1 else bid + str(k + 1)
        mark = len(self.trace)
        for nd in branches[k]:
            self.trace.append(TraceLine(child_bid, nd))
        queue = tuple((nd, 0) for nd in branches[k]) + tail
        for _ in self._solve(queue, lits, budget, child_bid):
            yield from self._branches(branches, tail, lits, budget, bid, k + 1)
        del self.trace[mark:]

    def _literal(self, n: Node, rest, lits, budget, bid) -> Iterator[None]:
        for m in lits:
            pair = (n, m) if n.sign else (m, n)
            new = closing_mgu(*pair, self.subst, self.limits.goodness)
            if new is None:
                continue
            saved = self.subst
            self.subst = new
            added = {v: walk(t, new) for v, t in new.items() if v not in saved}
            self.trace.append(TraceLine(bid, closure=Closure(*pair, added)))
            yield
            self.trace.pop()
            self.subst = saved
        yield from self._solve(rest, lits + (n,), budget, bid)

    # -- presentation --------------------------------------------------------

    def _show(self, t: Term, genders: bool = True) -> str:
        return render_term(walk(t, self.subst), genders)


def admissible(pos: Node, neg: Node) -> bool:
    """Goodness: literals of the same origin may close only if neither carries a PRO term."""
    if pos.origin != neg.origin:
        return True
    return not any(term_has_pro_mark(t) for t in pos.formula.args + neg.formula.args)


def closing_mgu(pos: Node, neg: Node, subst: Substitution | None = None,
                goodness: bool = True) -> Substitution | None:
    a, b = pos.formula, neg.formula
    if not (isinstance(a, Atom) and isinstance(b, Atom)) or not pos.sign or neg.sign:
        return None
    if a.pred != b.pred or len(a.args) != len(b.args):
        return None
    if goodness and not admissible(pos, neg):
        return None
    return unify_all(a.args, b.args, subst)


def try_close(branch: Branch, subst: Substitution | None = None,
              goodness: bool = True) -> list[tuple[Node, Node, Substitution]]:
    """Admissible closing pairs of ``branch`` in branch order, with their unifiers."""
    lits = [n for n in branch.nodes if isinstance(n.formula, Atom)]
    out = []
    for pos in (n for n in lits if n.sign):
        for neg in (n for n in lits if not n.sign):
            m = closing_mgu(pos, neg, subst, goodness)
            if m is not None:
                out.append((pos, neg, m))
    return out


def _has_free_var(plan: Plan) -> bool:
    return any(isinstance(e.term, FreeVar) for e in plan_output(plan)) or _plan_has_free(plan)


def _plan_has_free(plan: Plan) -> bool:
    if plan is None:
        return False
    if isinstance(plan, PlanAnd):
        return _plan_has_free(plan.left) or _plan_has_free(plan.right)
    if isinstance(plan, PlanEx):
        return isinstance(plan.entry.term, FreeVar) or _plan_has_free(plan.body)
    return _plan_has_free(plan.body)


def prove(discourse: Discourse, limits: Limits = Limits(), i0: Sequence[Var] = ()) -> ProofResult:
    """Search for a closed tableau with budgets ``limits.schedule()``."""
    schedule = limits.schedule()
    tab = Tableau(discourse, i0, limits)
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20_000))
    try:
        for budget in schedule:
            tab.log.append(f"budget {budget}")
            try:
                for _ in tab.search(budget):
                    trace = list(tab.trace)
                    records = tuple(line.node.record for line in trace
                                    if line.node is not None and line.node.record is not None)
                    return Closed(trace, records, idempotent(tab.subst), budget, tab.log)
            except _StepLimit:
                return LimitReached(budget, tab.steps, tab.log)
            if not tab.limit_hit:
                return Exhausted(budget, tab.log)
        return LimitReached(schedule[-1], tab.steps, tab.log)
    finally:
        sys.setrecursionlimit(old)


# --------------------------------------------------------------- rendering


def walk_formula(phi: Formula, subst: Substitution) -> Formula:
    return map_terms(phi, lambda t: walk(t, subst))


def _entry_str(e: Entry, subst: Substitution) -> str:
    t = walk(e.term, subst)
    if isinstance(t, (Const, Var)):
        return f"{t.name}:{t.gender}"
    return render_term(strip_pro(t))


def render_node(n: Node, subst: Substitution) -> str:
    lab = n.label
    i = ", ".join(_entry_str(e, subst) for e in lab.input)
    o = ", ".join(_entry_str(e, subst) for e in lab.output)
    return f"{lab.tag} (i=[{i}]; o=[{o}]) {render(walk_formula(n.formula, subst))}  <= rule {n.rule}"


def render_closure(c: Closure, subst: Substitution) -> str:
    pos = render(walk_formula(c.positive.formula, subst), genders=False)
    neg = render(walk_formula(c.negative.formula, subst), genders=False)
    mgu = ", ".join(f"{v.name}/{render_term(walk(t, subst), False)}"
                    for v, t in sorted(c.bindings.items(), key=lambda kv: kv[0].serial))
    return f"CLOSE: {pos} / {neg} mgu {{{mgu}}}"


def render_trace(result: Closed) -> str:
    lines = []
    for line in result.trace:
        pad = "  " * len(line.branch)
        if line.node is not None:
            lines.append(pad + render_node(line.node, result.mgu))
        else:
            lines.append(pad + render_closure(line.closure, result.mgu))
    return "\n".join(lines) + "\n"
