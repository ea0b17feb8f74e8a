"""Command-line front end.

Exit codes: 0 success (ENTAILED for ``check``), 1 not proven or no
countermodel, 2 ill-formed discourse, 3 I/O or syntax error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from lpro.context import Undefined, contribution, format_context, parse_context
from lpro.resolve import crosscheck, disambiguate, extract
from lpro.semantics import (
    Countermodel, IllFormedDiscourse, SignatureMismatch, entail_discourse, evaluate,
    parse_model, render_model,
)
from lpro.syntax import (
    Discourse, ParseError, Var, parse_discourse, parse_signature, render, render_term,
    strip_pro,
)
from lpro.tableau import (
    Closed, Exhausted, Limits, UnresolvablePronoun, prove, render_trace, walk,
)

OK, NOT_PROVEN, ILL_FORMED, INPUT_ERROR = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    command: str
    discourse: Path
    signature: Path | None = None
    model: Path | None = None
    budget: int = 32
    max_universe: int = 2
    context: tuple[Var, ...] = ()
    assign: tuple[tuple[str, int], ...] = ()
    trace: bool = False
    max_steps: int = 200_000

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise ValueError("--budget must be at least 1")
        if self.max_universe < 1:
            raise ValueError("--max-universe must be at least 1")

    @property
    def limits(self) -> Limits:
        return Limits(budget_cap=self.budget, budget_start=min(2, self.budget), max_steps=self.max_steps)


def _load(cfg: RunConfig) -> Discourse:
    sig = parse_signature(cfg.signature.read_text()) if cfg.signature else None
    return parse_discourse(cfg.discourse.read_text(), sig)


def _ill_formed(u: Undefined, conclusion: bool = False) -> str:
    return "ILL-FORMED: " + u.describe() + (" in the conclusion" if conclusion else "")


def _report_closed(r: Closed, out) -> None:
    print(f"ENTAILED (budget {r.budget})", file=out)
    side = {"p": "premise", "c": "conclusion"}
    seen = set()
    for rec in r.records:
        key = (rec.pronoun, rec.origin)
        if key in seen:
            continue
        seen.add(key)
        t = render_term(strip_pro(walk(rec.term, r.mgu)))
        print(f"  {rec.pronoun}:{rec.gender} -> {t} ({side[rec.origin]}; introduced by {rec.binder})", file=out)
    mgu = ", ".join(f"{v.name}/{render_term(t, False)}" for v, t in sorted(r.mgu.items(), key=lambda kv: kv[0].serial))
    print(f"mgu {{{mgu}}}", file=out)


def cmd_check(cfg: RunConfig, out=sys.stdout) -> int:
    d = _load(cfg)
    r = prove(d, cfg.limits, cfg.context)
    if isinstance(r, Closed):
        _report_closed(r, out)
        if cfg.trace:
            out.write(render_trace(r))
        return OK
    if isinstance(r, Exhausted):
        print(f"NOT-PROVEN (tableau saturated open at budget {r.budget})", file=out)
    else:
        print(f"NOT-PROVEN (limits reached: budget {r.budget}, {r.steps} steps)", file=out)
    return NOT_PROVEN


def cmd_trace(cfg: RunConfig, out=sys.stdout) -> int:
    d = _load(cfg)
    r = prove(d, cfg.limits, cfg.context)
    for line in r.log:
        print(f"# {line}", file=out)
    if isinstance(r, Closed):
        out.write(render_trace(r))
        print(f"ENTAILED (budget {r.budget})", file=out)
        return OK
    print(f"NOT-PROVEN ({type(r).__name__} at budget {r.budget})", file=out)
    return NOT_PROVEN


def cmd_countermodel(cfg: RunConfig, out=sys.stdout) -> int:
    d = _load(cfg)
    r = entail_discourse(d, cfg.max_universe, cfg.context)
    if isinstance(r, Countermodel):
        print(f"COUNTERMODEL ({len(r.refutations)} resolution pair(s) refuted)", file=out)
        for ref in r.refutations:
            theta = _mapping(ref.theta) or "none"
            prime = _mapping(ref.theta_prime) or "none"
            print(f"-- premise resolution {theta}; conclusion resolution {prime}", file=out)
            if ref.assignment:
                print("assignment " + ", ".join(f"{k}={v}" for k, v in ref.assignment.items()), file=out)
            out.write(render_model(ref.model))
        return OK
    print(f"NO COUNTERMODEL up to size {cfg.max_universe} "
          f"(surviving resolution: premises {_mapping(r.theta) or 'none'}; "
          f"conclusion {_mapping(r.theta_prime) or 'none'})", file=out)
    return NOT_PROVEN


def _mapping(m: dict[str, str]) -> str:
    return ", ".join(f"{x} -> {y}" for x, y in sorted(m.items()))


def cmd_modelcheck(cfg: RunConfig, out=sys.stdout) -> int:
    """Evaluate each formula of the file separately at the seed context."""
    if cfg.model is None:
        raise ValueError("modelcheck needs --model")
    M = parse_model(cfg.model.read_text())
    d = _load(cfg)
    h = {v.name: 0 for v in cfg.context}
    h.update(dict(cfg.assign))
    for k, v in h.items():
        if not 0 <= v < M.size:
            raise ValueError(f"assignment {k}={v} is outside the universe")
    formulas = list(d.premises) + ([d.conclusion] if d.conclusion is not None else [])
    for phi in formulas:
        print(f"{evaluate(M, h, cfg.context, phi)}\t{render(phi)}", file=out)
    return OK


def cmd_contexts(cfg: RunConfig, out=sys.stdout) -> int:
    d = _load(cfg)
    ctx = list(cfg.context)
    status = OK
    for k, phi in enumerate(d.premises, 1):
        r = contribution(phi, tuple(ctx))
        if isinstance(r, Undefined):
            print(f"premise {k}: input {format_context(ctx)} UNDEFINED: "
                  f"unresolvable pronoun {r.var}:{r.gender}", file=out)
            return ILL_FORMED
        print(f"premise {k}: input {format_context(ctx)} adds {format_context(r.delta)}", file=out)
        ctx += [t for t in r.delta if t not in ctx]
    if d.conclusion is not None:
        r = contribution(d.conclusion, tuple(cfg.context))
        if isinstance(r, Undefined):
            print(f"conclusion: input {format_context(cfg.context)} UNDEFINED: "
                  f"unresolvable pronoun {r.var}:{r.gender}", file=out)
            status = ILL_FORMED
        else:
            print(f"conclusion: input {format_context(cfg.context)} adds {format_context(r.delta)}", file=out)
    return status


def cmd_translate(cfg: RunConfig, out=sys.stdout) -> int:
    d = _load(cfg)
    r = prove(d, cfg.limits, cfg.context)
    if not isinstance(r, Closed):
        print("NOT-PROVEN: no closed tableau to read resolutions from", file=out)
        return NOT_PROVEN
    dis = extract(r)
    genders = {rec.pronoun: rec.gender for rec in r.records}
    for line in dis.lines(genders):
        print(line, file=out)
    cl = disambiguate(d, dis, cfg.context)
    if cl.premise is not None:
        print(f"premises: {render(cl.premise)}", file=out)
    print(f"conclusion: {render(cl.conclusion)}", file=out)
    if cfg.trace:
        rep = crosscheck(d, r, cfg.context)
        print(f"crosscheck: {'closes' if rep.closes else 'does not close'}", file=out)
    return OK


COMMANDS = {
    "check": cmd_check,
    "countermodel": cmd_countermodel,
    "modelcheck": cmd_modelcheck,
    "translate": cmd_translate,
    "contexts": cmd_contexts,
    "trace": cmd_trace,
}


def _assignments(text: str) -> tuple[tuple[str, int], ...]:
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        name, _, value = item.partition("=")
        out.append((name.strip(), int(value)))
    return tuple(out)


HELP = {
    "check": "prove the conclusion from the premises",
    "countermodel": "search small models refuting every resolution",
    "modelcheck": "evaluate each formula against --model",
    "translate": "resolve pronouns and print the classical formulas",
    "contexts": "thread contexts through the premises",
    "trace": "print the search log and the closed tableau",
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lpro", description="Tableau prover for a first-order language with pronouns.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("discourse", type=Path)
        p.add_argument("--signature", type=Path)
        p.add_argument("--model", type=Path)
        p.add_argument("--budget", type=int, default=32)
        p.add_argument("--max-universe", type=int, default=2)
        p.add_argument("--max-steps", type=int, default=200_000)
        p.add_argument("--context", default="", help='seed context, e.g. "x:he,y:it"')
        p.add_argument("--assign", default="", help='values for seed variables, e.g. "x=0,y=1"')
        p.add_argument("--trace", action="store_true")
    return ap


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command, discourse=args.discourse, signature=args.signature,
            model=args.model, budget=args.budget, max_universe=args.max_universe,
            context=parse_context(args.context), assign=_assignments(args.assign),
            trace=args.trace, max_steps=args.max_steps,
        )
        return COMMANDS[cfg.command](cfg, out)
    except IllFormedDiscourse as e:
        print(_ill_formed(e.undefined, e.conclusion), file=out)
        return ILL_FORMED
    except UnresolvablePronoun as e:
        print(f"ILL-FORMED: {e}", file=out)
        return ILL_FORMED
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR
    except (ParseError, SignatureMismatch, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
