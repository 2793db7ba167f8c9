#!/usr/bin/env python3
"""Generate a seeded random sequent corpus as a file the CLI can consume.

Example:
    python scripts/gen_corpus.py --count 500 --seed 7 --out corpus.txt
    qrc1 decide corpus.txt --format json-lines
"""

import argparse
import random
import sys
from pathlib import Path

from qrc1.generate import DEFAULT_SIG, random_sequent
from qrc1.syntax import parse_signature, pretty_sequent, signature_str


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-mdepth", type=int, default=2)
    ap.add_argument("--max-udepth", type=int, default=1)
    ap.add_argument("--size", type=int, default=4)
    ap.add_argument("--sig", help="signature header line (default: S/1 R/2 with c0 c1)")
    ap.add_argument("--out", default="-", help="output path, - for stdout")
    args = ap.parse_args()

    sig = parse_signature(args.sig) if args.sig else DEFAULT_SIG
    rng = random.Random(args.seed)
    lines = [signature_str(sig)]
    for _ in range(args.count):
        s = random_sequent(rng, sig, args.max_mdepth, args.max_udepth, args.size)
        lines.append(pretty_sequent(s))
    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
