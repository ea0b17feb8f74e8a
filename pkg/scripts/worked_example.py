"""Prove the man/boy discourse and print the search log, the trace and the classical version."""
from pathlib import Path

from lpro.resolve import crosscheck
from lpro.syntax import parse_discourse, render
from lpro.tableau import Closed, prove, render_trace

HERE = Path(__file__).resolve().parent.parent / "discourses"


def main() -> None:
    d = parse_discourse((HERE / "worked.dis").read_text())
    r = prove(d)
    for line in r.log:
        print("#", line)
    if not isinstance(r, Closed):
        print("not proven:", type(r).__name__)
        return
    print(render_trace(r))
    rep = crosscheck(d, r)
    print()
    print("premises:  ", render(rep.classical.premise))
    print("conclusion:", render(rep.classical.conclusion))
    print("classical proof:", "closes" if rep.closes else type(rep.result).__name__)


if __name__ == "__main__":
    main()
