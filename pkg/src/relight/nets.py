"""The three small modulated networks and their control blocks.

Each network is three 3x3 conv layers (16 channels wide) with a modulation
block after the first two activations:

* brighten net  - histogram-driven softmax channel gate on illumination
* enhance net   - normalization-and-affine modulation (AdaIN style) driven
                  by the hue/saturation correlation pair on reflectance
* denoise net   - sigmoid channel gate driven by the noise correlation,
                  predicting a residual that is subtracted from the input

Parameters live in a NetParams bundle: a flat name->Tensor map plus an
architecture descriptor that the checkpoint container serializes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .image import N_BINS

CONV_WIDTH = 16
GATE_HIDDEN = 32
DEFAULT_SEED = 42

__all__ = [
    "NetParams",
    "init_net",
    "histogram_gate",
    "chroma_modulation",
    "noise_gate",
    "brighten_forward",
    "enhance_forward",
    "denoise_forward",
    "perceptual_extractor",
    "extractor_forward",
]


@dataclass
class NetParams:
    """Named parameter tensors plus a JSON-serializable architecture record."""

    arch: dict
    params: dict[str, Tensor] = field(default_factory=dict)

    def set_trainable(self, trainable: bool = True,
                      only_prefixes: tuple[str, ...] | None = None) -> None:
        for name, p in self.params.items():
            if only_prefixes is None or name.startswith(only_prefixes):
                p.requires_grad = trainable

    def zero_grads(self) -> None:
        for p in self.params.values():
            p.grad = None

    def trainable(self) -> dict[str, Tensor]:
        return {n: p for n, p in self.params.items() if p.requires_grad}

    def assert_finite(self) -> None:
        for name, p in self.params.items():
            if not np.all(np.isfinite(p.data)):
                raise FloatingPointError(f"non-finite parameter {name!r}")


def _uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int,
             gain: float = 1.0) -> np.ndarray:
    bound = gain / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def _conv_params(rng, out_ch: int, in_ch: int,
                 gain: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    return _uniform(rng, (out_ch, in_ch, 3, 3), in_ch * 9, gain), np.zeros(out_ch)


def _fc_params(rng, out_dim: int, in_dim: int) -> tuple[np.ndarray, np.ndarray]:
    return _uniform(rng, (out_dim, in_dim), in_dim), np.zeros(out_dim)


def _gate_block(rng, p: dict, prefix: str, code_dim: int, channels: int) -> None:
    w1, b1 = _fc_params(rng, GATE_HIDDEN, code_dim)
    w2, b2 = _fc_params(rng, channels, GATE_HIDDEN)
    p[f"{prefix}.fc1.w"], p[f"{prefix}.fc1.b"] = Tensor(w1), Tensor(b1)
    p[f"{prefix}.fc2.w"], p[f"{prefix}.fc2.b"] = Tensor(w2), Tensor(b2)


def _mod_block(rng, p: dict, prefix: str, channels: int) -> None:
    w1, b1 = _fc_params(rng, GATE_HIDDEN, 2)
    w2, b2 = _fc_params(rng, 2 * channels, GATE_HIDDEN)
    p[f"{prefix}.fc1.w"], p[f"{prefix}.fc1.b"] = Tensor(w1), Tensor(b1)
    p[f"{prefix}.fc2.w"], p[f"{prefix}.fc2.b"] = Tensor(w2), Tensor(b2)


def init_net(kind: str, seed: int = DEFAULT_SEED, width: int = CONV_WIDTH) -> NetParams:
    """Fresh parameters: weights ~ uniform(+-gain/sqrt(fan_in)), biases zero.

    Convs fed by a softmax channel gate get gain = width: the gate's weights
    sum to one over channels, attenuating activations by ~1/width per block,
    and without the compensating gain the output sigmoid collapses to a
    constant whose histogram gradient vanishes.
    """
    rng = np.random.default_rng(seed)
    p: dict[str, Tensor] = {}
    if kind == "brighten":
        in_ch, out_ch = 1, 1
    elif kind in ("enhance", "denoise"):
        in_ch, out_ch = 3, 3
    else:
        raise ValueError(f"unknown net kind {kind!r}")
    post_gate_gain = float(width) if kind == "brighten" else 1.0

    w, b = _conv_params(rng, width, in_ch)
    p["conv1.w"], p["conv1.b"] = Tensor(w), Tensor(b)
    if kind == "brighten":
        _gate_block(rng, p, "hgate1", N_BINS, width)
    elif kind == "enhance":
        _mod_block(rng, p, "mod1", width)
    else:
        _gate_block(rng, p, "ngate1", N_BINS, width)

    w, b = _conv_params(rng, width, width, gain=post_gate_gain)
    p["conv2.w"], p["conv2.b"] = Tensor(w), Tensor(b)
    if kind == "brighten":
        _gate_block(rng, p, "hgate2", N_BINS, width)
    elif kind == "enhance":
        _mod_block(rng, p, "mod2", width)
    else:
        _gate_block(rng, p, "ngate2", N_BINS, width)

    w, b = _conv_params(rng, out_ch, width, gain=post_gate_gain)
    p["conv3.w"], p["conv3.b"] = Tensor(w), Tensor(b)

    arch = {"kind": kind, "width": width, "in_channels": in_ch,
            "out_channels": out_ch, "gate_hidden": GATE_HIDDEN,
            "n_bins": N_BINS, "seed": seed}
    return NetParams(arch=arch, params=p)


def _code_vector(p: dict[str, Tensor], prefix: str, code) -> Tensor:
    hidden = ad.relu(ad.fc(code, p[f"{prefix}.fc1.w"], p[f"{prefix}.fc1.b"]))
    return ad.fc(hidden, p[f"{prefix}.fc2.w"], p[f"{prefix}.fc2.b"])


def histogram_gate(f: Tensor, hist, params: NetParams, prefix: str) -> Tensor:
    """Softmax channel attention: F * softmax_c(F * v(hist))."""
    code = hist if isinstance(hist, Tensor) else Tensor(np.asarray(hist, dtype=np.float64))
    if code.shape != (N_BINS,):
        raise ValueError(f"histogram code must have {N_BINS} entries")
    a = _code_vector(params.params, prefix, code)
    logits = f * a.reshape(-1, 1, 1)
    gate = ad.softmax(logits, axis=0)
    return f * gate


def noise_gate(f: Tensor, cn: float, params: NetParams, prefix: str) -> Tensor:
    """Sigmoid channel attention; the gate stays open at cn = 0."""
    if not (0.0 <= cn <= 1.0):
        raise ValueError(f"noise correlation {cn} outside [0, 1]")
    code = Tensor(np.full(N_BINS, float(cn)))
    a = _code_vector(params.params, prefix, code)
    gate = ad.sigmoid(f * a.reshape(-1, 1, 1))
    return f * gate


def chroma_modulation(f: Tensor, code, params: NetParams, prefix: str) -> Tensor:
    """Instance-norm then affine, with scale/shift mapped from (c_h, c_s)."""
    code_t = code if isinstance(code, Tensor) else Tensor(np.asarray(code, dtype=np.float64))
    if code_t.shape != (2,):
        raise ValueError("chroma code must be the pair (c_h, c_s)")
    gb = _code_vector(params.params, prefix, code_t)
    c = f.shape[0]
    gamma, beta = gb[:c], gb[c:]
    mu, var = ad.channel_mean_var(f)
    sigma = ad.sqrt(var + 1e-10)  # floors sigma at 1e-5 for constant maps
    return gamma.reshape(-1, 1, 1) * ((f - mu) / sigma) + beta.reshape(-1, 1, 1)


def _as_chw(x, channels: int) -> Tensor:
    t = x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))
    if t.ndim == 2 and channels == 1:
        t = t.reshape(1, *t.shape)
    if t.ndim != 3 or t.shape[0] != channels:
        raise ValueError(f"expected ({channels},H,W) input, got {t.shape}")
    return t


def brighten_forward(lum, hist, net: NetParams) -> Tensor:
    """Illumination (1,H,W) + reference histogram -> brightened map in (0,1)."""
    t = _as_chw(lum, 1)
    h = np.asarray(hist.data if isinstance(hist, Tensor) else hist, dtype=np.float64)
    if abs(h.sum() - 1.0) > 1e-6:
        raise ValueError("guidance histogram must be normalized")
    p = net.params
    f = ad.relu(ad.conv2d(t, p["conv1.w"], p["conv1.b"]))
    f = histogram_gate(f, h, net, "hgate1")
    f = ad.relu(ad.conv2d(f, p["conv2.w"], p["conv2.b"]))
    f = histogram_gate(f, h, net, "hgate2")
    return ad.sigmoid(ad.conv2d(f, p["conv3.w"], p["conv3.b"]))


def enhance_forward(refl, code, net: NetParams) -> Tensor:
    """Reflectance (3,H,W) + (c_h, c_s) -> chroma-adjusted reflectance."""
    t = _as_chw(refl, 3)
    cv = np.asarray(code, dtype=np.float64)
    if cv.shape != (2,) or cv.min() < 0 or cv.max() > 1:
        raise ValueError("chroma code must be (c_h, c_s) in [0,1]^2")
    p = net.params
    f = ad.relu(ad.conv2d(t, p["conv1.w"], p["conv1.b"]))
    f = chroma_modulation(f, cv, net, "mod1")
    f = ad.relu(ad.conv2d(f, p["conv2.w"], p["conv2.b"]))
    f = chroma_modulation(f, cv, net, "mod2")
    return ad.sigmoid(ad.conv2d(f, p["conv3.w"], p["conv3.b"]))


def denoise_forward(refl, cn: float, net: NetParams) -> Tensor:
    """Reflectance (3,H,W) + noise correlation -> residual-denoised map."""
    t = _as_chw(refl, 3)
    p = net.params
    f = ad.relu(ad.conv2d(t, p["conv1.w"], p["conv1.b"]))
    f = noise_gate(f, cn, net, "ngate1")
    f = ad.relu(ad.conv2d(f, p["conv2.w"], p["conv2.b"]))
    f = noise_gate(f, cn, net, "ngate2")
    residual = ad.conv2d(f, p["conv3.w"], p["conv3.b"])
    return ad.clamp(t - residual, 0.0, 1.0)


# ---- frozen perceptual feature extractor -------------------------------------

PERCEPTUAL_SEED = 7
_PERCEPTUAL_CHANNELS = (8, 8, 16, 16, 16)
# He-style gain keeps activation variance through the relu stack, and the
# output scale puts feature MSEs in the same O(10) range as the pretrained
# deep-feature stacks this extractor substitutes; with plain 1/sqrt(fan_in)
# weights the features shrink ~80x over five layers and the content term
# contributes nothing to the total loss.
_PERCEPTUAL_GAIN = 2.45  # ~sqrt(6)
_PERCEPTUAL_OUT_SCALE = 10.0


def perceptual_extractor(seed: int = PERCEPTUAL_SEED) -> NetParams:
    """Fixed random 5-layer conv stack used as a content-feature extractor.

    Weights are seed-pinned and never trained; 2x average pooling after the
    second and fourth layers gives the features some spatial abstraction.
    """
    rng = np.random.default_rng(seed)
    p: dict[str, Tensor] = {}
    in_ch = 3
    for i, out_ch in enumerate(_PERCEPTUAL_CHANNELS, start=1):
        w, b = _conv_params(rng, out_ch, in_ch, gain=_PERCEPTUAL_GAIN)
        p[f"conv{i}.w"], p[f"conv{i}.b"] = Tensor(w), Tensor(b)
        in_ch = out_ch
    arch = {"kind": "perceptual", "channels": list(_PERCEPTUAL_CHANNELS),
            "seed": seed, "pool_after": [2, 4],
            "out_scale": _PERCEPTUAL_OUT_SCALE}
    return NetParams(arch=arch, params=p)


def extractor_forward(refl, net: NetParams) -> Tensor:
    t = _as_chw(refl, 3)
    p = net.params
    f = t
    for i in range(1, len(_PERCEPTUAL_CHANNELS) + 1):
        f = ad.relu(ad.conv2d(f, p[f"conv{i}.w"], p[f"conv{i}.b"]))
        if i in net.arch.get("pool_after", ()):
            f = ad.avg_pool2d(f, 2)
    return f * float(net.arch.get("out_scale", 1.0))
