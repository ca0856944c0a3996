"""Image quality metrics: PSNR, single-scale SSIM, histogram L1 distance."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import hard_histogram

PSNR_CAP = 99.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01 ** 2
SSIM_C2 = 0.03 ** 2

__all__ = ["EvalReport", "psnr", "ssim", "hist_l1", "evaluate"]


@dataclass
class EvalReport:
    psnr_db: float
    ssim: float
    hist_l1: float

    def to_json_dict(self) -> dict:
        return {"psnr_db": self.psnr_db, "ssim": self.ssim,
                "hist_l1": self.hist_l1}


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """10*log10(1/MSE) on [0,1]-range images, capped at 99 dB."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_CAP
    return min(10.0 * np.log10(1.0 / mse), PSNR_CAP)


def _gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    offsets = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(offsets ** 2) / (2.0 * sigma ** 2))
    w = np.outer(g, g)
    return w / w.sum()


def _ssim_plane(a: np.ndarray, b: np.ndarray, window: np.ndarray) -> float:
    # Valid sliding windows only; weighted (uncorrected) moments.
    k = window.shape[0]
    wa = np.lib.stride_tricks.sliding_window_view(a, (k, k))
    wb = np.lib.stride_tricks.sliding_window_view(b, (k, k))
    mu_a = np.tensordot(wa, window, axes=((2, 3), (0, 1)))
    mu_b = np.tensordot(wb, window, axes=((2, 3), (0, 1)))
    e_aa = np.tensordot(wa * wa, window, axes=((2, 3), (0, 1)))
    e_bb = np.tensordot(wb * wb, window, axes=((2, 3), (0, 1)))
    e_ab = np.tensordot(wa * wb, window, axes=((2, 3), (0, 1)))
    var_a = e_aa - mu_a ** 2
    var_b = e_bb - mu_b ** 2
    cov = e_ab - mu_a * mu_b
    num = (2 * mu_a * mu_b + SSIM_C1) * (2 * cov + SSIM_C2)
    den = (mu_a ** 2 + mu_b ** 2 + SSIM_C1) * (var_a + var_b + SSIM_C2)
    return float(np.mean(num / den))


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Single-scale SSIM, 11x11 Gaussian window sigma=1.5, channel-averaged."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.shape[0] < SSIM_WINDOW or a.shape[1] < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW}")
    window = _gaussian_window()
    if a.ndim == 2:
        return _ssim_plane(a, b, window)
    return float(np.mean([_ssim_plane(a[:, :, c], b[:, :, c], window)
                          for c in range(a.shape[2])]))


def hist_l1(a: np.ndarray, b: np.ndarray) -> float:
    """Total-variation style distance: sum |a_i - b_i| over bins; in [0, 2]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"bin count mismatch: {a.shape} vs {b.shape}")
    return float(np.abs(a - b).sum())


def evaluate(pred: np.ndarray, gt: np.ndarray) -> EvalReport:
    """PSNR/SSIM plus L1 distance of intensity histograms (channel mean)."""
    gray_pred = pred.mean(axis=2) if pred.ndim == 3 else pred
    gray_gt = gt.mean(axis=2) if gt.ndim == 3 else gt
    return EvalReport(
        psnr_db=psnr(pred, gt),
        ssim=ssim(pred, gt),
        hist_l1=hist_l1(hard_histogram(gray_pred), hard_histogram(gray_gt)),
    )
