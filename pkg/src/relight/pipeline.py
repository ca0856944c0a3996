"""End-to-end enhancement: decompose, brighten, adjust chromaticity, denoise,
recompose, with three user-facing steering modes:

* references        - one or more whole-image exemplars, correlations averaged
* cross_attribution - separate exemplars for brightness / chromaticity / noise
* parameters        - direct (gamma, c_h, c_s, c_n) values, no images needed

The noise correlation is computed against the *enhanced* reflectance (the
denoiser sees how noisy its own input is relative to the references).
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .correlation import (CorrelationSet, chroma_correlations, estimate_noise_map,
                          gamma_histogram, map_noise_correlation, noise_correlation)
from .image import hard_histogram, validate_image
from .nets import NetParams, brighten_forward, denoise_forward, enhance_forward
from .retinex import RetinexPair, decompose, recompose

MIN_SIZE = 8

MODES = ("references", "cross_attribution", "parameters")

__all__ = ["MODES", "ControlParams", "EnhanceRequest", "EnhancerNets",
           "EnhanceResponse", "enhance", "load_enhancer"]


@dataclass
class ControlParams:
    gamma: float
    c_h: float
    c_s: float
    c_n: float

    def validate(self) -> None:
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        for name in ("c_h", "c_s", "c_n"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {v}")


@dataclass
class EnhanceRequest:
    low: np.ndarray
    mode: str
    refs: list[np.ndarray] | None = None
    bright_ref: np.ndarray | None = None
    chroma_ref: np.ndarray | None = None
    noise_ref: np.ndarray | None = None
    params: ControlParams | None = None

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        cross = (self.bright_ref, self.chroma_ref, self.noise_ref)
        if self.mode == "references":
            if not self.refs:
                raise ValueError("references mode needs at least one reference")
            if any(x is not None for x in cross) or self.params is not None:
                raise ValueError("references mode accepts only 'refs'")
        elif self.mode == "cross_attribution":
            if any(x is None for x in cross):
                raise ValueError("cross_attribution mode needs bright_ref, "
                                 "chroma_ref and noise_ref")
            if self.refs or self.params is not None:
                raise ValueError("cross_attribution mode accepts only the three "
                                 "attribute references")
        else:
            if self.params is None:
                raise ValueError("parameters mode needs gamma/c_h/c_s/c_n")
            if self.refs or any(x is not None for x in cross):
                raise ValueError("parameters mode accepts no reference images")
            self.params.validate()


@dataclass
class EnhancerNets:
    brighten: NetParams
    enhance: NetParams
    denoise: NetParams


@dataclass
class EnhanceResponse:
    enhanced: np.ndarray
    correlations: CorrelationSet
    intermediates: dict[str, np.ndarray] | None = None


def _check_size(img: np.ndarray, name: str) -> np.ndarray:
    img = validate_image(img, name)
    if img.shape[0] < MIN_SIZE or img.shape[1] < MIN_SIZE:
        raise ValueError(f"{name} must be at least {MIN_SIZE}x{MIN_SIZE}")
    if img.ndim != 3:
        raise ValueError(f"{name} must be an RGB image")
    return img


def enhance(req: EnhanceRequest, nets: EnhancerNets, debug: bool = False,
            smoothness_weight: float = 0.1, iterations: int = 50) -> EnhanceResponse:
    req.validate()
    low = _check_size(req.low, "low image")
    dec = lambda img: decompose(img, smoothness_weight, iterations)
    low_pair = dec(low)

    if req.mode == "references":
        ref_pairs = [dec(_check_size(r, "reference")) for r in req.refs]
        hists = [hard_histogram(p.illumination) for p in ref_pairs]
        hist = np.mean(hists, axis=0)
        hist = hist / hist.sum()
        pairs_hs = [chroma_correlations(low_pair.reflectance, p.reflectance)
                    for p in ref_pairs]
        c_h = float(np.mean([hs[0] for hs in pairs_hs]))
        c_s = float(np.mean([hs[1] for hs in pairs_hs]))
        noise_pairs = ref_pairs
    elif req.mode == "cross_attribution":
        bright_pair = dec(_check_size(req.bright_ref, "bright_ref"))
        chroma_pair = dec(_check_size(req.chroma_ref, "chroma_ref"))
        noise_pairs = [dec(_check_size(req.noise_ref, "noise_ref"))]
        hist = hard_histogram(bright_pair.illumination)
        c_h, c_s = chroma_correlations(low_pair.reflectance, chroma_pair.reflectance)
    else:
        hist = gamma_histogram(low_pair.illumination, req.params.gamma)
        c_h, c_s = req.params.c_h, req.params.c_s
        noise_pairs = None

    l_en = brighten_forward(low_pair.illumination[None], hist, nets.brighten).data[0]
    r_en = enhance_forward(low_pair.reflectance.transpose(2, 0, 1), (c_h, c_s),
                           nets.enhance).data
    r_en_hwc = r_en.transpose(1, 2, 0)

    if noise_pairs is None:
        c_n = req.params.c_n
    else:
        n_en = estimate_noise_map(r_en_hwc)
        raws = [noise_correlation(n_en, estimate_noise_map(p.reflectance))
                for p in noise_pairs]
        c_n = map_noise_correlation(float(np.mean(raws)))

    r_de = denoise_forward(r_en, c_n, nets.denoise).data
    r_de_hwc = r_de.transpose(1, 2, 0)
    enhanced = recompose(RetinexPair(illumination=l_en, reflectance=r_de_hwc))

    correlations = CorrelationSet(brightness_hist=hist, c_h=c_h, c_s=c_s, c_n=c_n)
    intermediates = None
    if debug:
        intermediates = {
            "l_low": low_pair.illumination,
            "l_en": l_en,
            "r_low": low_pair.reflectance,
            "r_en": r_en_hwc,
            "r_de": r_de_hwc,
            "n_en": estimate_noise_map(r_en_hwc),
            "n_de": estimate_noise_map(r_de_hwc),
        }
    return EnhanceResponse(enhanced=enhanced, correlations=correlations,
                           intermediates=intermediates)


def load_enhancer(checkpoint_dir: str | Path) -> EnhancerNets:
    """Load brighten.iupe / enhance.iupe / denoise.iupe from a directory."""
    from .checkpoint import load_checkpoint

    d = Path(checkpoint_dir)
    nets = {}
    for name in ("brighten", "enhance", "denoise"):
        path = d / f"{name}.iupe"
        if not path.exists():
            raise FileNotFoundError(f"missing checkpoint: {path}")
        nets[name] = load_checkpoint(path)
    return EnhancerNets(**nets)
