#!/usr/bin/env python3
"""Regenerate the bundled synthetic corpora (data/low, data/ref, data/test_*).

The corpus is deterministic in the seed, so re-running reproduces the
committed PNGs byte for byte.
"""
import argparse

from relight.corpus import build_corpus


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data")
    ap.add_argument("--n-low", type=int, default=20)
    ap.add_argument("--n-ref", type=int, default=20)
    ap.add_argument("--n-test", type=int, default=20)
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()
    written = build_corpus(args.out, n_low=args.n_low, n_ref=args.n_ref,
                           n_test=args.n_test, size=args.size, seed=args.seed)
    for group, paths in written.items():
        print(f"{group}: {len(paths)} images")


if __name__ == "__main__":
    main()
