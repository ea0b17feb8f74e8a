"""Differential campaign: prover verdicts against the finite-model oracle.

    python3 scripts/differential.py --count 300 --oracle-size 3
"""
import argparse
import collections
import time

from lpro.randgen import Generator
from lpro.resolve import crosscheck
from lpro.semantics import NoCountermodelFound, entail_discourse
from lpro.syntax import render_discourse
from lpro.tableau import Closed, Limits, prove


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=300)
    ap.add_argument("--start", type=int, default=0, help="first seed")
    ap.add_argument("--oracle-size", type=int, default=3)
    ap.add_argument("--max-steps", type=int, default=10_000)
    args = ap.parse_args()

    verdicts = collections.Counter()
    unsound, uncrossed = [], []
    t0 = time.perf_counter()
    for seed in range(args.start, args.start + args.count):
        d = Generator(seed).discourse()
        r = prove(d, Limits(max_steps=args.max_steps))
        verdicts[type(r).__name__] += 1
        if not isinstance(r, Closed):
            continue
        if not isinstance(entail_discourse(d, args.oracle_size), NoCountermodelFound):
            unsound.append(seed)
            print(f"seed {seed}: closed but refuted\n{render_discourse(d)}")
        if not crosscheck(d, r).closes:
            uncrossed.append(seed)
    print(dict(verdicts))
    print(f"unsound: {len(unsound)}  crosscheck failures: {len(uncrossed)}  "
          f"({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
