"""Deterministic synthetic corpora for desk-scale training and testing.

Each image is a smooth random luminance field with a few colored shapes,
rendered at a controlled brightness level.  Low-light variants are dim with
mild sensor-style Gaussian noise; reference variants span dim to bright and
are nearly clean, so the reference set covers a wide brightness range and a
spread of hues and saturations.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .image import hsv_to_rgb, HsvImage, save_image

__all__ = ["smooth_field", "make_scene", "make_low", "make_reference",
           "build_corpus", "load_corpus_dir"]


def smooth_field(rng: np.random.Generator, size: int, cells: int = 5) -> np.ndarray:
    """Low-frequency random field in [0,1]: bilinear upsampling of a coarse grid."""
    coarse = rng.uniform(0.0, 1.0, size=(cells, cells))
    xs = np.linspace(0, cells - 1, size)
    ix = np.clip(xs.astype(int), 0, cells - 2)
    fx = xs - ix
    rows = coarse[:, ix] * (1 - fx) + coarse[:, ix + 1] * fx
    out = rows[ix, :] * (1 - fx[:, None]) + rows[ix + 1, :] * fx[:, None]
    return out


def make_scene(rng: np.random.Generator, size: int = 64) -> np.ndarray:
    """Full-brightness scene (H,W,3): smooth tinted base plus colored shapes."""
    base = smooth_field(rng, size)
    hue0 = rng.uniform(0, 1)
    sat0 = rng.uniform(0.15, 0.65)
    hue = np.full((size, size), hue0)
    sat = np.full((size, size), sat0) * (0.6 + 0.4 * smooth_field(rng, size))
    val = 0.35 + 0.65 * base

    yy, xx = np.mgrid[0:size, 0:size]
    for _ in range(int(rng.integers(2, 5))):
        cy, cx = rng.uniform(0.1, 0.9, 2) * size
        radius = rng.uniform(0.08, 0.25) * size
        mask = (yy - cy) ** 2 + (xx - cx) ** 2 < radius ** 2
        hue[mask] = rng.uniform(0, 1)
        sat[mask] = rng.uniform(0.3, 0.95)
        val[mask] = np.clip(val[mask] * rng.uniform(0.7, 1.3), 0.05, 1.0)

    rgb = hsv_to_rgb(HsvImage(hue=hue, saturation=np.clip(sat, 0, 1),
                              value=np.clip(val, 0, 1)))
    return rgb


def _scale_brightness(img: np.ndarray, target_mean: float) -> np.ndarray:
    mean = img.max(axis=2).mean()
    return np.clip(img * (target_mean / max(mean, 1e-6)), 0.0, 1.0)


def make_low(rng: np.random.Generator, size: int = 64,
             brightness: float | None = None,
             noise_sigma: float | None = None) -> np.ndarray:
    """Noisy capture of a random scene; defaults to a dim exposure."""
    scene = make_scene(rng, size)
    if brightness is None:
        brightness = float(rng.uniform(0.04, 0.16))
    if noise_sigma is None:
        noise_sigma = float(rng.uniform(0.01, 0.035))
    dark = _scale_brightness(scene, brightness)
    noise = rng.normal(0.0, noise_sigma, dark.shape)
    return np.clip(dark + noise, 0.0, 1.0)


def make_reference(rng: np.random.Generator, size: int = 64,
                   brightness: float | None = None) -> np.ndarray:
    """Clean exemplar; brightness defaults to a normal-light draw."""
    scene = make_scene(rng, size)
    if brightness is None:
        brightness = float(rng.uniform(0.25, 0.75))
    return _scale_brightness(scene, brightness)


def reference_brightness_ladder(count: int, lo: float = 0.06,
                                hi: float = 0.72,
                                shape: float = 1.6) -> np.ndarray:
    """Dark-weighted exposure targets for the training reference set.

    Training needs guidance histograms from gamma-curve-dark up to
    normal-light bright.  The spacing is deliberately dark-heavy (power-law
    with exponent `shape`): a brightness-symmetric reference set balances the
    histogram loss's pull on the initially constant network output exactly at
    the corpus centroid, and training stalls there; a dark-heavy set keeps a
    net force that breaks the tie.
    """
    t = np.linspace(0.0, 1.0, count) ** shape
    return lo + (hi - lo) * t


def build_corpus(out_dir: str | Path, n_low: int = 20, n_ref: int = 20,
                 n_test: int = 20, size: int = 64, seed: int = 2024) -> dict:
    """Materialize low/, ref/, test_low/, test_ref/ PNG sets under out_dir.

    Training references climb a stratified dark-to-bright exposure ladder
    (with jitter); the held-out test references are normal-light only.
    """
    out_dir = Path(out_dir)
    rng = np.random.default_rng(seed)
    written: dict[str, list[str]] = {}
    ladder = reference_brightness_ladder(n_ref)

    def make_train_ref(r, s, index):
        level = float(ladder[index] * r.uniform(0.92, 1.08))
        return make_reference(r, s, brightness=level)

    groups = [("low", n_low, lambda r, s, i: make_low(r, s)),
              ("ref", n_ref, make_train_ref),
              ("test_low", n_test, lambda r, s, i: make_low(r, s)),
              ("test_ref", n_test, lambda r, s, i: make_reference(r, s))]
    for name, count, maker in groups:
        sub = out_dir / name
        sub.mkdir(parents=True, exist_ok=True)
        paths = []
        for i in range(count):
            path = sub / f"{name}_{i:03d}.png"
            save_image(maker(rng, size, i), path)
            paths.append(str(path))
        written[name] = paths
    return written


def load_corpus_dir(path: str | Path) -> list[np.ndarray]:
    """All PNGs in a directory, sorted by name."""
    from .image import load_image

    files = sorted(Path(path).glob("*.png"))
    if not files:
        raise FileNotFoundError(f"no PNG files in {path}")
    return [load_image(f) for f in files]
