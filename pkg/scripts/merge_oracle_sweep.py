"""Compare merge_node with the brute-force merger over many random mapping pairs.

Reports agreement, and how often each merge rule fired, per nesting depth.

    python3 scripts/merge_oracle_sweep.py --cases 20000
"""

import argparse
import random
import sys
from collections import Counter
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from oracles import KindConflict, brute_merge, same_ordered  # noqa: E402

from nilm_meta.diagnostics import MetadataError  # noqa: E402
from nilm_meta.inheritance import merge_node  # noqa: E402
from nilm_meta.nodes import Node  # noqa: E402

KEYS = "abcdefg"
SCALARS = [0, 1, 1.0, True, None, "x", "y"]


def value(rng, depth):
    roll = rng.random()
    if depth <= 0 or roll < 0.45:
        return rng.choice(SCALARS)
    if roll < 0.7:
        return [value(rng, depth - 1) for _ in range(rng.randint(0, 5))]
    return mapping(rng, depth - 1)


def mapping(rng, depth):
    return {k: value(rng, depth) for k in rng.sample(KEYS, rng.randint(0, 5))}


def rules(parent, child, out: Counter):
    for k in set(parent) & set(child):
        p, c = parent[k], child[k]
        if isinstance(p, dict) and isinstance(c, dict):
            out["recursive"] += 1
            rules(p, c, out)
        elif isinstance(p, list) and isinstance(c, list):
            out["union"] += 1
        elif type(p) in (dict, list) or type(c) in (dict, list):
            out["conflict"] += 1
        else:
            out["shadow"] += 1
    out["copied"] += len(set(parent) - set(child))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cases", type=int, default=5000)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    agree = 0
    fired = Counter()
    for _ in range(args.cases):
        depth = rng.randint(0, 3)
        parent, child = mapping(rng, depth), mapping(rng, depth)
        blocked = tuple(rng.sample(KEYS, rng.randint(0, 2)))
        rules(parent, child, fired)
        try:
            want = brute_merge(parent, child, blocked)
        except KindConflict:
            want = KindConflict
        try:
            got = merge_node(Node.from_python(parent), Node.from_python(child),
                             blocked).to_python()
        except MetadataError:
            got = KindConflict
        if want is KindConflict:
            agree += got is KindConflict
        else:
            agree += got is not KindConflict and same_ordered(got, want)
    print(f"cases {args.cases}  agree {agree}  ({100 * agree / args.cases:.2f}%)")
    for name, n in sorted(fired.items()):
        print(f"  {name:<10} {n}")
    return 0 if agree == args.cases else 1


if __name__ == "__main__":
    sys.exit(main())
