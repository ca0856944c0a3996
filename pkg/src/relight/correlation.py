"""Control-signal extraction: reference brightness histogram, hue/saturation
correlations, noise maps and noise-level correlation, multi-reference
averaging, and the gamma-curve synthetic brightness histogram.

These scalars and the 256-bin histogram are what a user sees and steers;
everything here is plain numpy on decomposed image components.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .image import N_BINS, hard_histogram, rgb_to_hsv
from .retinex import RetinexPair, decompose

__all__ = [
    "CorrelationSet",
    "cosine_correlation",
    "chroma_correlations",
    "estimate_noise_map",
    "noise_correlation",
    "map_noise_correlation",
    "extract",
    "extract_from_components",
    "gamma_histogram",
]


@dataclass
class CorrelationSet:
    """The steering signal: brightness histogram plus three scalars in [0,1]."""

    brightness_hist: np.ndarray
    c_h: float
    c_s: float
    c_n: float

    def to_json_dict(self) -> dict:
        return {
            "brightness_hist": [float(v) for v in self.brightness_hist],
            "c_h": float(self.c_h),
            "c_s": float(self.c_s),
            "c_n": float(self.c_n),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "CorrelationSet":
        hist = np.asarray(d["brightness_hist"], dtype=np.float64)
        if hist.shape != (N_BINS,):
            raise ValueError(f"brightness_hist must have {N_BINS} bins")
        return cls(brightness_hist=hist, c_h=float(d["c_h"]),
                   c_s=float(d["c_s"]), c_n=float(d["c_n"]))


def cosine_correlation(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity a.b / (|a||b|); in [0,1] for histograms."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError("histogram length mismatch")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("zero-norm histogram")
    # nonnegative inputs put the true value in [0,1]; clip float fuzz
    return float(np.clip(np.dot(a, b) / (na * nb), 0.0, 1.0))


def chroma_correlations(r_low: np.ndarray, r_ref: np.ndarray) -> tuple[float, float]:
    """Hue and saturation histogram correlations between two reflectances."""
    hsv_low = rgb_to_hsv(r_low)
    hsv_ref = rgb_to_hsv(r_ref)
    c_h = cosine_correlation(hard_histogram(hsv_low.hue),
                             hard_histogram(hsv_ref.hue))
    c_s = cosine_correlation(hard_histogram(hsv_low.saturation),
                             hard_histogram(hsv_ref.saturation))
    return c_h, c_s


def estimate_noise_map(refl: np.ndarray) -> np.ndarray:
    """Local noise magnitude: |g - box3(g)| on the channel-mean plane g."""
    refl = np.asarray(refl, dtype=np.float64)
    gray = refl.mean(axis=2) if refl.ndim == 3 else refl
    if gray.shape[0] < 3 or gray.shape[1] < 3:
        raise ValueError("image must be at least 3x3 for noise estimation")
    padded = np.pad(gray, 1, mode="reflect")
    box = np.zeros_like(gray)
    for dy in range(3):
        for dx in range(3):
            box += padded[dy:dy + gray.shape[0], dx:dx + gray.shape[1]]
    box /= 9.0
    return np.abs(gray - box)


def noise_correlation(n_en: np.ndarray, n_ref: np.ndarray) -> float:
    """Raw cosine correlation between 256-bin histograms of two noise maps."""
    h_en = hard_histogram(np.clip(n_en, 0.0, 1.0))
    h_ref = hard_histogram(np.clip(n_ref, 0.0, 1.0))
    return cosine_correlation(h_en, h_ref)


def map_noise_correlation(raw: float) -> float:
    """Affine map [-1, 1] -> [0, 1]."""
    if raw < -1.0 - 1e-9 or raw > 1.0 + 1e-9:
        raise ValueError(f"raw correlation {raw} outside [-1, 1]")
    return (min(max(raw, -1.0), 1.0) + 1.0) / 2.0


def extract_from_components(
    low: RetinexPair,
    refs: Sequence[RetinexPair],
    enhanced_reflectance: np.ndarray | None = None,
) -> CorrelationSet:
    """Correlation set from already-decomposed components.

    Multiple references average: histograms elementwise (then renormalized),
    scalar correlations arithmetically.  The noise correlation compares each
    reference against the enhanced reflectance when given, else against the
    input reflectance (bootstrap before any enhancement exists).
    """
    if len(refs) == 0:
        raise ValueError("need at least one reference")
    base_refl = low.reflectance if enhanced_reflectance is None else enhanced_reflectance
    base_noise = estimate_noise_map(base_refl)

    hists = []
    chs, css, cns = [], [], []
    for ref in refs:
        hists.append(hard_histogram(ref.illumination))
        c_h, c_s = chroma_correlations(low.reflectance, ref.reflectance)
        chs.append(c_h)
        css.append(c_s)
        cns.append(noise_correlation(base_noise, estimate_noise_map(ref.reflectance)))

    hist = np.mean(hists, axis=0)
    hist = hist / hist.sum()
    return CorrelationSet(
        brightness_hist=hist,
        c_h=float(np.mean(chs)),
        c_s=float(np.mean(css)),
        c_n=map_noise_correlation(float(np.mean(cns))),
    )


def extract(
    low: np.ndarray,
    refs: Sequence[np.ndarray],
    enhanced_reflectance: np.ndarray | None = None,
    smoothness_weight: float = 0.1,
    iterations: int = 50,
) -> CorrelationSet:
    """Decompose the input and references, then extract their correlations."""
    if len(refs) == 0:
        raise ValueError("need at least one reference")
    low_pair = decompose(low, smoothness_weight, iterations)
    ref_pairs = [decompose(r, smoothness_weight, iterations) for r in refs]
    return extract_from_components(low_pair, ref_pairs, enhanced_reflectance)


def gamma_histogram(illumination: np.ndarray, gamma: float) -> np.ndarray:
    """Brightness histogram of L**(1/gamma); gamma > 1 brightens the target."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    lum = np.asarray(illumination, dtype=np.float64)
    return hard_histogram(np.power(lum, 1.0 / gamma))
