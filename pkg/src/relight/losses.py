"""Unsupervised training losses, all differentiable through the network graph.

Histogram and chromaticity terms compare soft (differentiable) histograms of
generated maps against hard histograms of reference maps.  Hue and saturation
of generated reflectance come from a smooth HSV approximation: hue is the
angle of the RGB opponent projection, saturation uses log-sum-exp soft
max/min, so gradients exist everywhere (the hexcone formulas do not
differentiate across sector boundaries).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .image import N_BINS, avg_pool, soft_histogram
from .nets import NetParams, extractor_forward

LSE_TEMPERATURE = 50.0

__all__ = [
    "LossWeights",
    "LossReport",
    "smooth_hsv_planes",
    "histogram_loss",
    "gram_loss",
    "chromaticity_loss",
    "spatial_loss",
    "perceptual_loss",
    "total_loss",
]


@dataclass
class LossWeights:
    w1: float = 0.0001  # gram
    w2: float = 0.01    # chromaticity
    w3: float = 0.03    # spatial consistency
    w4: float = 0.001   # perceptual


@dataclass
class LossReport:
    his: float
    gram: float
    chr: float
    spa: float
    per: float
    total: float

    def to_json_dict(self) -> dict:
        return {"his": self.his, "gram": self.gram, "chr": self.chr,
                "spa": self.spa, "per": self.per, "total": self.total}


def smooth_hsv_planes(refl) -> tuple[Tensor, Tensor]:
    """Differentiable hue and saturation of a (3,H,W) reflectance.

    hue = atan2(sqrt(3)/2 (G-B), R - (G+B)/2) / 2pi wrapped to [0,1);
    saturation = (softmax - softmin) / (softmax + 1e-5), clamped to [0,1].
    """
    t = refl if isinstance(refl, Tensor) else Tensor(np.asarray(refl, dtype=np.float64))
    if t.ndim != 3 or t.shape[0] != 3:
        raise ValueError(f"expected (3,H,W) reflectance, got {t.shape}")
    r, g, b = t[0], t[1], t[2]
    alpha = r - (g + b) * 0.5
    beta = (g - b) * (math.sqrt(3.0) / 2.0)
    hue = ad.wrap_unit(ad.atan2(beta, alpha) * (1.0 / (2.0 * math.pi)))
    smax = ad.logsumexp(t * LSE_TEMPERATURE, axis=0) * (1.0 / LSE_TEMPERATURE)
    smin = ad.logsumexp(t * (-LSE_TEMPERATURE), axis=0) * (-1.0 / LSE_TEMPERATURE)
    sat = ad.clamp((smax - smin) / (smax + 1e-5), 0.0, 1.0)
    return hue, sat


def histogram_loss(l_en: Tensor, his_ref: np.ndarray, bandwidth: float = 1.0) -> Tensor:
    """L1 distance between the reference histogram and the soft histogram
    of the generated illumination; in [0, 2]."""
    his_ref = np.asarray(his_ref, dtype=np.float64)
    if his_ref.shape != (N_BINS,) or abs(his_ref.sum() - 1.0) > 1e-6:
        raise ValueError("reference histogram must be normalized with 256 bins")
    his_en = soft_histogram(l_en, N_BINS, bandwidth)
    return ad.absolute(Tensor(his_ref) - his_en).sum()


def _flat_channels(x, name: str):
    """(3,P) view of a reflectance given as (3,H,W), (H,W,3) or (3,P)."""
    if isinstance(x, Tensor):
        if x.ndim == 3 and x.shape[0] == 3:
            return x.reshape(3, -1)
        if x.ndim == 2 and x.shape[0] == 3:
            return x
        raise ValueError(f"{name}: expected 3 channels, got {x.shape}")
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 3:
        arr = arr.transpose(2, 0, 1)
    if arr.ndim == 3 and arr.shape[0] == 3:
        arr = arr.reshape(3, -1)
    if arr.ndim != 2 or arr.shape[0] != 3:
        raise ValueError(f"{name}: expected 3 channels, got {arr.shape}")
    return arr


def gram_loss(r_ref, r_en) -> Tensor:
    """Sum of absolute differences between pixel-normalized 3x3 Gram matrices."""
    ref = _flat_channels(r_ref, "r_ref")
    en = _flat_channels(r_en, "r_en")
    ref_np = ref.data if isinstance(ref, Tensor) else ref
    gram_ref = (ref_np @ ref_np.T) / ref_np.shape[1]
    if isinstance(en, Tensor):
        gram_en = ad.matmul(en, en.T) * (1.0 / en.shape[1])
    else:
        gram_en = Tensor((en @ en.T) / en.shape[1])
    return ad.absolute(Tensor(gram_ref) - gram_en).sum()


def chromaticity_loss(r_ref, r_en: Tensor, bandwidth: float = 1.0) -> Tensor:
    """L1 distance of hue plus saturation histograms, both from the smooth
    HSV planes.  Both sides use the same triangular binning (the reference
    side without gradients) so the loss is exactly zero at identical inputs;
    hard counting on the reference side would leave a data-dependent floor.
    """
    hue_ref, sat_ref = smooth_hsv_planes(_to_chw(r_ref))
    his_h_ref = soft_histogram(hue_ref.data, N_BINS, bandwidth)
    his_s_ref = soft_histogram(sat_ref.data, N_BINS, bandwidth)

    hue_en, sat_en = smooth_hsv_planes(r_en)
    his_h_en = soft_histogram(hue_en, N_BINS, bandwidth)
    his_s_en = soft_histogram(sat_en, N_BINS, bandwidth)
    hue_term = ad.absolute(Tensor(his_h_ref) - his_h_en).sum()
    sat_term = ad.absolute(Tensor(his_s_ref) - his_s_en).sum()
    return hue_term + sat_term


def _to_chw(x) -> np.ndarray | Tensor:
    if isinstance(x, Tensor):
        return x
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 3:
        arr = arr.transpose(2, 0, 1)
    return arr


def spatial_loss(r_low, r_en: Tensor) -> Tensor:
    """Gradient-field mismatch of the 4x4-pooled maps.

    Mean squared difference of horizontal forward differences plus the same
    for vertical; invariant to constant offsets between the two inputs.
    """
    low = _to_chw(r_low)
    low_np = low.data if isinstance(low, Tensor) else low
    if low_np.shape[-2] < 8 or low_np.shape[-1] < 8:
        raise ValueError("spatial loss needs at least 8x8 images")
    pooled_low = avg_pool(low_np.transpose(1, 2, 0), 4).transpose(2, 0, 1)
    pooled_en = ad.avg_pool2d(r_en, 4)

    gx_low = pooled_low[:, :, 1:] - pooled_low[:, :, :-1]
    gy_low = pooled_low[:, 1:, :] - pooled_low[:, :-1, :]
    gx_en = pooled_en[:, :, 1:] - pooled_en[:, :, :-1]
    gy_en = pooled_en[:, 1:, :] - pooled_en[:, :-1, :]
    term_x = ((Tensor(gx_low) - gx_en) ** 2).mean()
    term_y = ((Tensor(gy_low) - gy_en) ** 2).mean()
    return term_x + term_y


def perceptual_loss(r_low, r_en: Tensor, extractor: NetParams) -> Tensor:
    """MSE between frozen-extractor features of the two reflectances."""
    feat_low = extractor_forward(_to_chw(r_low), extractor)
    feat_en = extractor_forward(r_en, extractor)
    return ((Tensor(feat_low.data) - feat_en) ** 2).mean()


def total_loss(his: Tensor, gram: Tensor, chr_: Tensor, spa: Tensor, per: Tensor,
               weights: LossWeights | None = None) -> tuple[Tensor, LossReport]:
    """Weighted sum; returns the differentiable total and a float report."""
    w = weights or LossWeights()
    parts = {"his": his, "gram": gram, "chr": chr_, "spa": spa, "per": per}
    for name, t in parts.items():
        if not np.isfinite(t.item()):
            raise FloatingPointError(f"loss component {name!r} is not finite")
    tot = his + w.w1 * gram + w.w2 * chr_ + w.w3 * spa + w.w4 * per
    report = LossReport(his=his.item(), gram=gram.item(), chr=chr_.item(),
                        spa=spa.item(), per=per.item(), total=tot.item())
    return tot, report
