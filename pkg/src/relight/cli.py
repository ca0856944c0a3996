"""Command-line interface.

Subcommands: decompose, correlate, pretrain-denoiser, train, enhance, eval,
serve.  Every command exits 0 on success and nonzero with a one-line
diagnostic on stderr otherwise.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields as dc_fields
from pathlib import Path

import numpy as np

from .correlation import extract
from .corpus import load_corpus_dir
from .image import load_image, save_image
from .losses import LossWeights
from .metrics import evaluate
from .pipeline import (ControlParams, EnhanceRequest, enhance, load_enhancer)
from .retinex import decompose
from .service import ServiceConfig, serve
from .training import DenoisePretrainConfig, TrainConfig, pretrain_denoiser, train


def _add_decompose(sub):
    p = sub.add_parser("decompose", help="split an image into illumination and reflectance")
    p.add_argument("--image", required=True)
    p.add_argument("--out-illumination", required=True)
    p.add_argument("--out-reflectance", required=True)
    p.add_argument("--smoothness", type=float, default=0.1)
    p.add_argument("--iterations", type=int, default=50)


def _add_correlate(sub):
    p = sub.add_parser("correlate", help="extract correlations against references")
    p.add_argument("--low", required=True)
    p.add_argument("--ref", action="append", required=True,
                   help="reference image (repeatable)")
    p.add_argument("--out", required=True, help="output JSON path")


def _add_pretrain(sub):
    p = sub.add_parser("pretrain-denoiser", help="two-step self-supervised pretraining")
    p.add_argument("--corpus", required=True, help="directory of clean PNGs")
    p.add_argument("--out", required=True, help="output checkpoint path")
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--step1-iters", type=int, default=500)
    p.add_argument("--step2-iters", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--log", help="JSONL loss log path")


def _add_train(sub):
    p = sub.add_parser("train", help="train the brighten and enhance networks")
    p.add_argument("--low-dir", required=True)
    p.add_argument("--ref-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", help="JSON file with TrainConfig fields")
    p.add_argument("--iters", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--paper-scale", action="store_true",
                   help="300k iterations, batch 18, lr 1e-4 (hours)")
    p.add_argument("--log", help="JSONL loss log path")


def _add_enhance(sub):
    p = sub.add_parser("enhance", help="enhance a low-light image")
    p.add_argument("--low", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--checkpoint-dir", default="checkpoints")
    p.add_argument("--ref", action="append", help="reference image (repeatable)")
    p.add_argument("--bright-ref")
    p.add_argument("--chroma-ref")
    p.add_argument("--noise-ref")
    p.add_argument("--gamma", type=float)
    p.add_argument("--ch", type=float, help="hue correlation in [0,1]")
    p.add_argument("--cs", type=float, help="saturation correlation in [0,1]")
    p.add_argument("--cn", type=float, help="noise correlation in [0,1]")
    p.add_argument("--debug-dir", help="write decomposition planes and noise maps here")


def _add_eval(sub):
    p = sub.add_parser("eval", help="PSNR/SSIM/histogram report for a prediction")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)


def _add_serve(sub):
    p = sub.add_parser("serve", help="run the HTTP enhancement service")
    p.add_argument("--checkpoint-dir", default="checkpoints")
    p.add_argument("--port", type=int, default=8023)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--max-dim", type=int, default=4096)
    p.add_argument("--config", help="JSON file with port/host/max_dim/checkpoint_dir")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="relight",
        description="Personalized low-light image enhancement")
    sub = ap.add_subparsers(dest="command", required=True)
    for add in (_add_decompose, _add_correlate, _add_pretrain, _add_train,
                _add_enhance, _add_eval, _add_serve):
        add(sub)
    return ap


def _cmd_decompose(args) -> int:
    img = load_image(args.image)
    pair = decompose(img, args.smoothness, args.iterations)
    save_image(pair.illumination, args.out_illumination)
    save_image(pair.reflectance, args.out_reflectance)
    print(f"wrote {args.out_illumination} and {args.out_reflectance}")
    return 0


def _cmd_correlate(args) -> int:
    low = load_image(args.low)
    refs = [load_image(r) for r in args.ref]
    corr = extract(low, refs)
    Path(args.out).write_text(json.dumps(corr.to_json_dict()))
    print(f"wrote {args.out} (c_h={corr.c_h:.4f} c_s={corr.c_s:.4f} c_n={corr.c_n:.4f})")
    return 0


def _cmd_pretrain(args) -> int:
    corpus = load_corpus_dir(args.corpus)
    cfg = DenoisePretrainConfig(sigma=args.sigma, step1_iters=args.step1_iters,
                                step2_iters=args.step2_iters, seed=args.seed)
    net = pretrain_denoiser(corpus, cfg, log_path=args.log)
    from .checkpoint import save_checkpoint
    save_checkpoint(net, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_train(args) -> int:
    kwargs = {}
    if args.config:
        raw = json.loads(Path(args.config).read_text())
        weights = raw.pop("weights", None)
        valid = {f.name for f in dc_fields(TrainConfig)}
        unknown = set(raw) - valid
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        kwargs.update(raw)
        if weights is not None:
            kwargs["weights"] = LossWeights(**weights)
    for name, value in (("total_iters", args.iters), ("batch_size", args.batch_size),
                        ("lr", args.lr), ("seed", args.seed)):
        if value is not None:
            kwargs[name] = value
    cfg = TrainConfig.paper_scale(**kwargs) if args.paper_scale else TrainConfig(**kwargs)
    lows = load_corpus_dir(args.low_dir)
    refs = load_corpus_dir(args.ref_dir)
    train(lows, refs, cfg, out_dir=args.out_dir, log_path=args.log)
    print(f"wrote checkpoints to {args.out_dir}")
    return 0


def _cmd_enhance(args) -> int:
    low = load_image(args.low)
    param_flags = (args.gamma, args.ch, args.cs, args.cn)
    if args.ref:
        if any(v is not None for v in param_flags) or args.bright_ref:
            raise ValueError("choose one mode: --ref, cross refs, or parameters")
        req = EnhanceRequest(low=low, mode="references",
                             refs=[load_image(r) for r in args.ref])
    elif args.bright_ref or args.chroma_ref or args.noise_ref:
        if any(v is None for v in (args.bright_ref, args.chroma_ref, args.noise_ref)):
            raise ValueError("cross-attribution needs --bright-ref, --chroma-ref "
                             "and --noise-ref")
        req = EnhanceRequest(low=low, mode="cross_attribution",
                             bright_ref=load_image(args.bright_ref),
                             chroma_ref=load_image(args.chroma_ref),
                             noise_ref=load_image(args.noise_ref))
    elif all(v is not None for v in param_flags):
        req = EnhanceRequest(low=low, mode="parameters",
                             params=ControlParams(gamma=args.gamma, c_h=args.ch,
                                                  c_s=args.cs, c_n=args.cn))
    else:
        raise ValueError("provide --ref, the three cross-attribution refs, or "
                         "all of --gamma --ch --cs --cn")

    nets = load_enhancer(args.checkpoint_dir)
    resp = enhance(req, nets, debug=args.debug_dir is not None)
    save_image(resp.enhanced, args.out)
    sidecar = Path(args.out).with_suffix(".corr.json")
    sidecar.write_text(json.dumps(resp.correlations.to_json_dict()))
    if args.debug_dir:
        dbg = Path(args.debug_dir)
        dbg.mkdir(parents=True, exist_ok=True)
        for name, arr in resp.intermediates.items():
            if name.startswith("n_"):
                peak = arr.max()
                arr = arr / peak if peak > 0 else arr
            save_image(np.clip(arr, 0, 1), dbg / f"{name}.png")
    print(f"wrote {args.out} and {sidecar}")
    return 0


def _cmd_eval(args) -> int:
    report = evaluate(load_image(args.pred), load_image(args.gt))
    print(json.dumps(report.to_json_dict()))
    return 0


def _cmd_serve(args) -> int:
    checkpoint_dir = args.checkpoint_dir
    cfg_kwargs = {"port": args.port, "host": args.host, "max_dim": args.max_dim}
    if args.config:
        raw = json.loads(Path(args.config).read_text())
        checkpoint_dir = raw.pop("checkpoint_dir", checkpoint_dir)
        cfg_kwargs.update(raw)
    serve(checkpoint_dir, ServiceConfig(**cfg_kwargs))
    return 0


_COMMANDS = {
    "decompose": _cmd_decompose,
    "correlate": _cmd_correlate,
    "pretrain-denoiser": _cmd_pretrain,
    "train": _cmd_train,
    "enhance": _cmd_enhance,
    "eval": _cmd_eval,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except BrokenPipeError:
        return 1
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
