"""Image representation and the numeric substrate: PNG I/O, HSV conversion,
hard and differentiable histograms, pooling, finite-difference gradients.

Images are plain float64 numpy arrays in [0, 1]: (H, W) for grayscale,
(H, W, 3) for RGB.  Histograms are 1-D arrays that sum to one.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from . import autodiff as ad
from .autodiff import Tensor

N_BINS = 256

__all__ = [
    "N_BINS",
    "HsvImage",
    "load_image",
    "save_image",
    "validate_image",
    "rgb_to_hsv",
    "hsv_to_rgb",
    "hard_histogram",
    "soft_histogram",
    "avg_pool",
    "spatial_gradients",
]


@dataclass
class HsvImage:
    """Hue/saturation/value planes, each (H, W) in [0, 1].

    Hue is scaled from [0deg, 360deg) to [0, 1); achromatic pixels get hue 0.
    """

    hue: np.ndarray
    saturation: np.ndarray
    value: np.ndarray


def validate_image(img: np.ndarray, name: str = "image") -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 3 and img.shape[2] == 1:
        img = img[:, :, 0]
    if img.ndim not in (2, 3) or (img.ndim == 3 and img.shape[2] != 3):
        raise ValueError(f"{name}: expected (H,W) or (H,W,3), got {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"{name}: zero-dimension image")
    if img.min() < -1e-9 or img.max() > 1 + 1e-9:
        raise ValueError(f"{name}: values outside [0,1]")
    return np.clip(img, 0.0, 1.0)


def load_image(path: str | Path) -> np.ndarray:
    """Read an 8- or 16-bit PNG, scaled to [0,1] by its max code value."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such image: {path}")
    with PILImage.open(path) as im:
        if im.format != "PNG":
            raise ValueError(f"unsupported format {im.format!r}; PNG only")
        if im.mode in ("L", "RGB"):
            scale = 255.0
        elif im.mode in ("I;16", "I"):
            scale = 65535.0
        else:
            raise ValueError(f"unsupported PNG mode {im.mode!r}")
        arr = np.asarray(im, dtype=np.float64)
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"zero-dimension image: {path}")
    return arr / scale


def save_image(img: np.ndarray, path: str | Path) -> None:
    """Write an image as 8-bit PNG (grayscale or RGB)."""
    img = validate_image(img)
    codes = np.rint(img * 255.0).astype(np.uint8)
    mode = "L" if codes.ndim == 2 else "RGB"
    path = Path(path)
    if path.parent and not path.parent.exists():
        raise FileNotFoundError(f"directory does not exist: {path.parent}")
    PILImage.fromarray(codes, mode=mode).save(path, format="PNG")


def rgb_to_hsv(img: np.ndarray) -> HsvImage:
    """Standard hexcone RGB -> HSV; all planes in [0,1], achromatic hue = 0."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"rgb_to_hsv expects (H,W,3), got {img.shape}")
    r, g, b = img[:, :, 0], img[:, :, 1], img[:, :, 2]
    mx = img.max(axis=2)
    mn = img.min(axis=2)
    delta = mx - mn
    chroma = delta > 0

    hue = np.zeros_like(mx)
    safe = np.where(chroma, delta, 1.0)
    rmax = chroma & (mx == r)
    gmax = chroma & (mx == g) & ~rmax
    bmax = chroma & ~rmax & ~gmax
    hue[rmax] = ((g - b)[rmax] / safe[rmax]) % 6.0
    hue[gmax] = (b - r)[gmax] / safe[gmax] + 2.0
    hue[bmax] = (r - g)[bmax] / safe[bmax] + 4.0
    hue = hue / 6.0
    hue[hue >= 1.0] -= 1.0

    sat = np.where(mx > 0, delta / np.where(mx > 0, mx, 1.0), 0.0)
    return HsvImage(hue=hue, saturation=sat, value=mx)


def hsv_to_rgb(hsv: HsvImage) -> np.ndarray:
    """Inverse hexcone transform; exact round trip for in-range planes."""
    for name, plane in (("hue", hsv.hue), ("saturation", hsv.saturation),
                        ("value", hsv.value)):
        plane = np.asarray(plane)
        if plane.min() < -1e-9 or plane.max() > 1 + 1e-9:
            raise ValueError(f"hsv_to_rgb: {name} plane outside [0,1]")
    h = np.asarray(hsv.hue, dtype=np.float64) * 6.0
    s = np.clip(np.asarray(hsv.saturation, dtype=np.float64), 0.0, 1.0)
    v = np.clip(np.asarray(hsv.value, dtype=np.float64), 0.0, 1.0)
    c = v * s
    x = c * (1.0 - np.abs(h % 2.0 - 1.0))
    m = v - c
    sector = np.floor(h).astype(int) % 6
    zeros = np.zeros_like(c)
    r = np.choose(sector, [c, x, zeros, zeros, x, c])
    g = np.choose(sector, [x, c, c, x, zeros, zeros])
    b = np.choose(sector, [zeros, zeros, x, c, c, x])
    return np.clip(np.stack([r + m, g + m, b + m], axis=-1), 0.0, 1.0)


def hard_histogram(plane: np.ndarray, n_bins: int = N_BINS) -> np.ndarray:
    """Counting histogram, bin = min(floor(v * n_bins), n_bins - 1), sum 1."""
    if n_bins < 2:
        raise ValueError("need at least 2 bins")
    plane = np.asarray(plane, dtype=np.float64)
    if plane.size == 0:
        raise ValueError("empty plane")
    idx = np.minimum((plane.ravel() * n_bins).astype(np.int64), n_bins - 1)
    idx = np.maximum(idx, 0)
    counts = np.bincount(idx, minlength=n_bins).astype(np.float64)
    return counts / plane.size


def soft_histogram(plane, n_bins: int = N_BINS, bandwidth: float = 1.0):
    """Differentiable histogram: triangular kernel around each bin center.

    Pixel v spreads weight max(0, 1 - |v*n_bins - (k+0.5)| / bandwidth) to
    bin k; the result is normalized to sum 1.  Accepts a Tensor (keeps the
    graph) or a plain array (returns an array).
    """
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    if n_bins < 2:
        raise ValueError("need at least 2 bins")
    is_tensor = isinstance(plane, Tensor)
    t = plane if is_tensor else Tensor(np.asarray(plane, dtype=np.float64))
    if t.size == 0:
        raise ValueError("empty plane")
    hist = ad.triangular_histogram(t, n_bins, bandwidth)
    return hist if is_tensor else hist.data


def avg_pool(img: np.ndarray, k: int) -> np.ndarray:
    """Block-mean downsampling; reflect-pads when k does not divide H or W."""
    if k < 1:
        raise ValueError("pooling factor must be >= 1")
    img = np.asarray(img, dtype=np.float64)
    if k == 1:
        return img.copy()
    h, w = img.shape[:2]
    ph, pw = (-h) % k, (-w) % k
    if ph or pw:
        if ph >= h or pw >= w:
            raise ValueError("image too small to reflect-pad for pooling")
        pad = ((0, ph), (0, pw)) + ((0, 0),) * (img.ndim - 2)
        img = np.pad(img, pad, mode="reflect")
        h, w = h + ph, w + pw
    shape = (h // k, k, w // k, k) + img.shape[2:]
    return img.reshape(shape).mean(axis=(1, 3))


def spatial_gradients(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Forward differences along x and y; last column/row zero-padded."""
    img = np.asarray(img, dtype=np.float64)
    if img.shape[0] < 2 or img.shape[1] < 2:
        raise ValueError("need at least 2 pixels per axis for gradients")
    gx = np.zeros_like(img)
    gy = np.zeros_like(img)
    gx[:, :-1] = img[:, 1:] - img[:, :-1]
    gy[:-1, :] = img[1:, :] - img[:-1, :]
    return gx, gy
