#!/usr/bin/env python3
"""Desk-scale end-to-end training: pretrain the denoiser, train the brighten
and enhance networks on the bundled corpora, and write the three checkpoints
the CLI / service / UI load by default.

Roughly 12 minutes on a laptop-class CPU.  Deterministic in the seed.
"""
import argparse
import time
from pathlib import Path

from relight.checkpoint import save_checkpoint
from relight.corpus import load_corpus_dir
from relight.training import (DenoisePretrainConfig, TrainConfig,
                              pretrain_denoiser, train)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data", default="data")
    ap.add_argument("--out", default="checkpoints")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--iters", type=int, default=2000)
    args = ap.parse_args()

    data = Path(args.data)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lows = load_corpus_dir(data / "low")
    refs = load_corpus_dir(data / "ref")

    t0 = time.time()
    denoiser = pretrain_denoiser(refs, DenoisePretrainConfig(seed=args.seed),
                                 log_path=out / "denoise_pretrain.jsonl")
    save_checkpoint(denoiser, out / "denoise.iupe")
    print(f"denoiser pretrained in {time.time() - t0:.0f}s")

    t0 = time.time()
    cfg = TrainConfig(seed=args.seed, total_iters=args.iters)
    train(lows, refs, cfg, denoiser=denoiser, out_dir=out,
          log_path=out / "train_log.jsonl")
    print(f"main training finished in {time.time() - t0:.0f}s")
    print(f"checkpoints written to {out}/")


if __name__ == "__main__":
    main()
