#!/usr/bin/env python3
"""Measure how well the trained enhancer steers brightness on the held-out
pairs: for each (low, reference) pair, compare the L1 histogram distance of
the enhanced illumination against the distance of the untouched input.
"""
import argparse
from pathlib import Path

import numpy as np

from relight.corpus import load_corpus_dir
from relight.image import hard_histogram
from relight.metrics import hist_l1
from relight.pipeline import EnhanceRequest, enhance, load_enhancer


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data", default="data")
    ap.add_argument("--checkpoint-dir", default="checkpoints")
    args = ap.parse_args()

    nets = load_enhancer(args.checkpoint_dir)
    lows = load_corpus_dir(Path(args.data) / "test_low")
    refs = load_corpus_dir(Path(args.data) / "test_ref")

    improved = 0
    deltas = []
    for i, (low, ref) in enumerate(zip(lows, refs)):
        resp = enhance(EnhanceRequest(low=low, mode="references", refs=[ref]),
                       nets, debug=True)
        guidance = resp.correlations.brightness_hist
        d_en = hist_l1(hard_histogram(resp.intermediates["l_en"]), guidance)
        d_low = hist_l1(hard_histogram(resp.intermediates["l_low"]), guidance)
        improved += d_en < d_low
        deltas.append(d_low - d_en)
        print(f"pair {i:02d}: input {d_low:.4f} -> enhanced {d_en:.4f}")
    print(f"\nimproved on {improved}/{len(deltas)} pairs "
          f"(mean gain {np.mean(deltas):.4f})")


if __name__ == "__main__":
    main()
