"""Retinex split: illumination x reflectance, and its inverse.

The decomposition initializes illumination as the per-pixel channel maximum
and refines it by projected gradient descent on a quadratic smoothness
objective, never letting it drop below the initial estimate so reflectance
stays in [0, 1].  Reflectance is the elementwise quotient, which makes the
recomposition exact by construction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import validate_image

EPS_ILLUM = 1e-4

__all__ = ["EPS_ILLUM", "RetinexPair", "decompose", "recompose"]


@dataclass
class RetinexPair:
    """illumination: (H,W) in [eps,1]; reflectance: (H,W,3) in [0,1]."""

    illumination: np.ndarray
    reflectance: np.ndarray


def decompose(img: np.ndarray, smoothness_weight: float = 0.1,
              iterations: int = 50) -> RetinexPair:
    """Split an RGB image into a smooth illumination map and reflectance.

    Minimizes ||L - L0||^2 + w * ||grad L||^2 subject to L >= L0, where L0
    is the channel maximum floored at EPS_ILLUM.  With smoothness_weight=0
    (or zero iterations) L equals L0 exactly and L*R reproduces the input.
    """
    img = validate_image(img)
    if img.ndim != 3:
        raise ValueError("decompose expects a 3-channel image")
    if smoothness_weight < 0:
        raise ValueError("smoothness_weight must be >= 0")

    l_init = np.maximum(img.max(axis=2), EPS_ILLUM)
    lum = l_init.copy()
    if smoothness_weight > 0 and iterations > 0:
        # Gradient of the energy is 2(L - L0) + smoothness term; the step
        # size is 1/Lipschitz so the descent cannot diverge.
        step = 1.0 / (2.0 + 16.0 * smoothness_weight)
        for _ in range(iterations):
            grad = 2.0 * (lum - l_init)
            dx = lum[:, 1:] - lum[:, :-1]
            dy = lum[1:, :] - lum[:-1, :]
            grad[:, :-1] -= 2.0 * smoothness_weight * dx
            grad[:, 1:] += 2.0 * smoothness_weight * dx
            grad[:-1, :] -= 2.0 * smoothness_weight * dy
            grad[1:, :] += 2.0 * smoothness_weight * dy
            lum = lum - step * grad
            np.maximum(lum, l_init, out=lum)  # keep reflectance <= 1
            np.clip(lum, EPS_ILLUM, 1.0, out=lum)

    refl = img / lum[:, :, None]
    return RetinexPair(illumination=lum, reflectance=np.clip(refl, 0.0, 1.0))


def recompose(pair: RetinexPair) -> np.ndarray:
    """Pixelwise product clamp(L * R, 0, 1)."""
    lum = np.asarray(pair.illumination, dtype=np.float64)
    refl = np.asarray(pair.reflectance, dtype=np.float64)
    if lum.ndim != 2 or refl.shape != lum.shape + (3,):
        raise ValueError(
            f"shape mismatch: illumination {lum.shape}, reflectance {refl.shape}")
    return np.clip(lum[:, :, None] * refl, 0.0, 1.0)
