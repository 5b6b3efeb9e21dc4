#!/usr/bin/env python3
"""Writes data/planted.csv: an additive concept overridden by two exact rules.

  c == q and d == 1        -> y = 1
  a3 >= 8 and a4 >= 8      -> y = 0
  otherwise                -> y = [a1 + a2 >= 10]

All numeric attributes take values 0..9. a5 tracks a1 and e is forced on
whenever c == s, so the data also carries exact attribute-level implications.
"""
import argparse
import csv
import random


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=1500)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", default="data/planted.csv")
    args = ap.parse_args()

    rng = random.Random(args.seed)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["a1", "a2", "a3", "a4", "a5", "c", "d", "e", "y"])
        for _ in range(args.rows):
            a1, a2, a3, a4 = (rng.randint(0, 9) for _ in range(4))
            a5 = min(9, a1 + rng.randint(0, 1))
            c = rng.choice("pqrs")
            d = rng.randint(0, 1)
            e = 1 if c == "s" else rng.randint(0, 1)
            if c == "q" and d == 1:
                y = 1
            elif a3 >= 8 and a4 >= 8:
                y = 0
            else:
                y = int(a1 + a2 >= 10)
            w.writerow([a1, a2, a3, a4, a5, c, d, e, y])


if __name__ == "__main__":
    main()
