"""Minimal reverse-mode automatic differentiation over numpy arrays.

A Tensor wraps a float64 ndarray and records the operations applied to it.
Calling backward() on a scalar result accumulates exact gradients into every
upstream tensor created with requires_grad=True.  Everything runs on the CPU
in plain numpy; the op set is just what the enhancement networks and their
losses need (elementwise math, matmul, 3x3 convolution with reflect padding,
softmax, pooling, slicing).
"""
from __future__ import annotations

from typing import Callable

import numpy as np

Scalar = int | float

__all__ = [
    "Tensor",
    "as_tensor",
    "relu",
    "sigmoid",
    "exp",
    "log",
    "sqrt",
    "absolute",
    "clamp",
    "softmax",
    "matmul",
    "fc",
    "atan2",
    "wrap_unit",
    "pad_reflect2d",
    "conv2d_valid",
    "conv2d",
    "avg_pool2d",
    "triangular_histogram",
    "channel_mean_var",
    "logsumexp",
]


class Tensor:
    """Array with optional gradient tracking.

    data is always float64.  grad is populated by backward() and has the
    same shape as data.  The graph is built eagerly: each op attaches its
    parents and a closure that maps the output gradient to parent gradients.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_grad_fn")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple[Tensor, ...] = ()
        self._grad_fn: Callable[[np.ndarray], tuple] | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # ---- graph construction -------------------------------------------------

    def _walk(self) -> list["Tensor"]:
        # Iterative post-order topological sort; graphs from conv stacks can
        # be deep enough to bother Python's recursion limit.
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        return order

    def backward(self) -> None:
        """Accumulate gradients of this scalar into all requiring parents."""
        if self.data.size != 1:
            raise ValueError(f"backward() needs a scalar, got shape {self.shape}")
        grads: dict[int, np.ndarray] = {id(self): np.ones_like(self.data)}
        for node in reversed(self._walk()):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.requires_grad and node._grad_fn is None:
                # leaf tensor
                node.grad = g if node.grad is None else node.grad + g
                continue
            if node._grad_fn is None:
                continue
            parent_grads = node._grad_fn(g)
            for parent, pg in zip(node._parents, parent_grads):
                if pg is None or not parent.requires_grad:
                    continue
                if id(parent) in grads:
                    grads[id(parent)] += pg
                else:
                    grads[id(parent)] = pg

    # ---- operators ----------------------------------------------------------

    def __add__(self, other):
        return _binary(self, other, lambda a, b: a + b,
                       lambda g, a, b: (g, g))

    __radd__ = __add__

    def __sub__(self, other):
        return _binary(self, other, lambda a, b: a - b,
                       lambda g, a, b: (g, -g))

    def __rsub__(self, other):
        return _binary(self, other, lambda a, b: b - a,
                       lambda g, a, b: (-g, g))

    def __mul__(self, other):
        return _binary(self, other, lambda a, b: a * b,
                       lambda g, a, b: (g * b, g * a))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return _binary(self, other, lambda a, b: a / b,
                       lambda g, a, b: (g / b, -g * a / (b * b)))

    def __rtruediv__(self, other):
        return _binary(self, other, lambda a, b: b / a,
                       lambda g, a, b: (-g * b / (a * a), g / a))

    def __neg__(self):
        return _unary(self, lambda a: -a, lambda g, a, out: -g)

    def __pow__(self, k: Scalar):
        if not isinstance(k, (int, float)):
            raise TypeError("only scalar exponents are supported")
        return _unary(self, lambda a: a ** k,
                      lambda g, a, out: g * k * a ** (k - 1))

    def __getitem__(self, key):
        def fwd(a):
            return a[key]

        def bwd(g, a, out):
            full = np.zeros_like(a)
            full[key] += g
            return full

        return _unary(self, fwd, bwd)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return _unary(self, lambda a: a.reshape(shape),
                      lambda g, a, out: g.reshape(a.shape))

    def flatten(self) -> "Tensor":
        return self.reshape(-1)

    def transpose(self) -> "Tensor":
        return _unary(self, lambda a: a.T, lambda g, a, out: g.T)

    @property
    def T(self) -> "Tensor":
        return self.transpose()

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        def bwd(g, a, out):
            if axis is None:
                return np.broadcast_to(g, a.shape).copy()
            if not keepdims:
                g = np.expand_dims(g, axis)
            return np.broadcast_to(g, a.shape).copy()

        return _unary(self, lambda a: a.sum(axis=axis, keepdims=keepdims), bwd)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        n = self.data.size if axis is None else _axis_size(self.data.shape, axis)
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)

    def __matmul__(self, other):
        return matmul(self, other)


def _axis_size(shape: tuple[int, ...], axis) -> int:
    if isinstance(axis, int):
        return shape[axis]
    return int(np.prod([shape[a] for a in axis]))


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Reduce grad back to shape after numpy broadcasting."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _make(data: np.ndarray, parents: tuple[Tensor, ...], grad_fn) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._grad_fn = grad_fn
    return out


def _unary(x: Tensor, fwd, bwd) -> Tensor:
    x = as_tensor(x)
    data = fwd(x.data)

    def grad_fn(g):
        return (bwd(g, x.data, data),)

    return _make(np.asarray(data, dtype=np.float64), (x,), grad_fn)


def _binary(x, y, fwd, bwd) -> Tensor:
    x, y = as_tensor(x), as_tensor(y)
    data = fwd(x.data, y.data)

    def grad_fn(g):
        ga, gb = bwd(g, x.data, y.data)
        return (_unbroadcast(ga, x.data.shape), _unbroadcast(gb, y.data.shape))

    return _make(np.asarray(data, dtype=np.float64), (x, y), grad_fn)


# ---- elementwise functions ---------------------------------------------------


def relu(x) -> Tensor:
    return _unary(x, lambda a: np.maximum(a, 0.0),
                  lambda g, a, out: g * (a > 0))


def sigmoid(x) -> Tensor:
    def fwd(a):
        out = np.empty_like(a)
        pos = a >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
        ea = np.exp(a[~pos])
        out[~pos] = ea / (1.0 + ea)
        return out

    return _unary(x, fwd, lambda g, a, out: g * out * (1.0 - out))


def exp(x) -> Tensor:
    return _unary(x, np.exp, lambda g, a, out: g * out)


def log(x) -> Tensor:
    return _unary(x, np.log, lambda g, a, out: g / a)


def sqrt(x) -> Tensor:
    return _unary(x, np.sqrt, lambda g, a, out: g * 0.5 / out)


def absolute(x) -> Tensor:
    return _unary(x, np.abs, lambda g, a, out: g * np.sign(a))


def clamp(x, lo: float, hi: float) -> Tensor:
    # Gradient passes through wherever the input is inside [lo, hi].
    return _unary(x, lambda a: np.clip(a, lo, hi),
                  lambda g, a, out: g * ((a >= lo) & (a <= hi)))


def softmax(x, axis: int) -> Tensor:
    x = as_tensor(x)
    if x.data.shape[axis] == 0:
        raise ValueError("softmax over an empty axis")

    z = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    s = e / e.sum(axis=axis, keepdims=True)

    def grad_fn(g):
        dot = (g * s).sum(axis=axis, keepdims=True)
        return (s * (g - dot),)

    return _make(s, (x,), grad_fn)


def logsumexp(x, axis: int, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    m = x.data.max(axis=axis, keepdims=True)
    e = np.exp(x.data - m)
    se = e.sum(axis=axis, keepdims=True)
    out = m + np.log(se)
    soft = e / se

    def grad_fn(g):
        if not keepdims:
            g = np.expand_dims(g, axis)
        return (g * soft,)

    return _make(out if keepdims else np.squeeze(out, axis=axis), (x,), grad_fn)


def atan2(y, x) -> Tensor:
    """Elementwise arctangent of y/x with quadrant handling; atan2(0,0)=0."""
    def bwd(g, ya, xa):
        denom = xa * xa + ya * ya
        safe = np.where(denom > 0, denom, 1.0)
        gy = np.where(denom > 0, g * xa / safe, 0.0)
        gx = np.where(denom > 0, -g * ya / safe, 0.0)
        return gy, gx

    return _binary(y, x, np.arctan2, bwd)


def wrap_unit(x) -> Tensor:
    """x mod 1 with pass-through gradient (the floor shift is constant a.e.)."""
    return _unary(x, lambda a: a - np.floor(a), lambda g, a, out: g)


# ---- linear algebra ----------------------------------------------------------


def matmul(x, y) -> Tensor:
    x, y = as_tensor(x), as_tensor(y)
    if x.ndim not in (1, 2) or y.ndim not in (1, 2):
        raise ValueError("matmul supports 1-D and 2-D operands only")
    data = x.data @ y.data

    def grad_fn(g):
        a, b = x.data, y.data
        if a.ndim == 2 and b.ndim == 2:
            return (g @ b.T, a.T @ g)
        if a.ndim == 2 and b.ndim == 1:
            return (np.outer(g, b), a.T @ g)
        if a.ndim == 1 and b.ndim == 2:
            return (g @ b.T, np.outer(a, g))
        return (g * b, g * a)  # 1-D dot product

    return _make(np.asarray(data, dtype=np.float64), (x, y), grad_fn)


def fc(x, weight, bias) -> Tensor:
    """Fully connected layer: weight @ x + bias for a 1-D input."""
    return matmul(weight, x) + bias


# ---- image-shaped ops ----------------------------------------------------------


def pad_reflect2d(x, pad: int) -> Tensor:
    """Reflect-pad the last two axes (edge not repeated, numpy 'reflect')."""
    x = as_tensor(x)
    if pad == 0:
        return x
    h, w = x.data.shape[-2:]
    if h < 2 or w < 2:
        raise ValueError("reflect padding needs at least 2 pixels per axis")
    idx = np.pad(np.arange(h * w).reshape(h, w), pad, mode="reflect")
    lead = x.data.shape[:-2]
    flat = x.data.reshape(lead + (h * w,))
    out = flat[..., idx]

    def grad_fn(g):
        n = int(np.prod(lead, dtype=np.int64)) if lead else 1
        g2 = g.reshape(n, idx.size)
        flat_idx = idx.ravel()
        gf = np.stack([np.bincount(flat_idx, weights=g2[i], minlength=h * w)
                       for i in range(n)])
        return (gf.reshape(x.data.shape),)

    return _make(out, (x,), grad_fn)


def _im2col(x: np.ndarray, kh: int, kw: int, oh: int, ow: int) -> np.ndarray:
    # (Cin*kh*kw, oh*ow) patch matrix
    windows = np.lib.stride_tricks.sliding_window_view(x, (kh, kw), axis=(1, 2))
    return windows.transpose(0, 3, 4, 1, 2).reshape(-1, oh * ow)


def conv2d_valid(x, weight) -> Tensor:
    """Valid cross-correlation: x (Cin,H,W) with weight (Cout,Cin,kh,kw)."""
    x, weight = as_tensor(x), as_tensor(weight)
    cin, h, w = x.data.shape
    cout, cin_w, kh, kw = weight.data.shape
    if cin != cin_w:
        raise ValueError(f"channel mismatch: input {cin}, kernel {cin_w}")
    oh, ow = h - kh + 1, w - kw + 1
    if oh < 1 or ow < 1:
        raise ValueError("kernel larger than input")
    cols = _im2col(x.data, kh, kw, oh, ow)
    out = (weight.data.reshape(cout, -1) @ cols).reshape(cout, oh, ow)

    def grad_fn(g):
        g2 = g.reshape(cout, -1)
        gw = (g2 @ cols.T).reshape(weight.data.shape)
        gcols = (weight.data.reshape(cout, -1).T @ g2).reshape(cin, kh, kw, oh, ow)
        gx = np.zeros_like(x.data)
        for dy in range(kh):
            for dx in range(kw):
                gx[:, dy:dy + oh, dx:dx + ow] += gcols[:, dy, dx]
        return (gx, gw)

    return _make(out, (x, weight), grad_fn)


def conv2d(x, weight, bias) -> Tensor:
    """3x3-style convolution, stride 1, reflect padding, spatial size kept."""
    kh = as_tensor(weight).data.shape[2]
    pad = (kh - 1) // 2
    out = conv2d_valid(pad_reflect2d(x, pad), weight)
    return out + as_tensor(bias).reshape(-1, 1, 1)


def avg_pool2d(x, k: int) -> Tensor:
    """k x k average pooling on the last two axes; reflect-pads to a multiple."""
    if k < 1:
        raise ValueError("pooling factor must be >= 1")
    x = as_tensor(x)
    if k == 1:
        return x
    h, w = x.data.shape[-2:]
    ph, pw = (-h) % k, (-w) % k
    if ph or pw:
        x = _pad_tail_reflect(x, ph, pw)
        h, w = h + ph, w + pw
    lead = x.data.shape[:-2]
    xr = x.reshape(lead + (h // k, k, w // k, k))
    nlead = len(lead)
    return xr.mean(axis=(nlead + 1, nlead + 3))


def _pad_tail_reflect(x: Tensor, ph: int, pw: int) -> Tensor:
    h, w = x.data.shape[-2:]
    if ph >= h or pw >= w:
        raise ValueError("image too small to reflect-pad for pooling")
    idx = np.pad(np.arange(h * w).reshape(h, w), ((0, ph), (0, pw)), mode="reflect")
    lead = x.data.shape[:-2]
    flat_shape = lead + (h * w,)

    def fwd(a):
        return a.reshape(flat_shape)[..., idx]

    def bwd(g, a, out):
        n = int(np.prod(lead, dtype=np.int64)) if lead else 1
        g2 = g.reshape(n, idx.size)
        flat_idx = idx.ravel()
        gf = np.stack([np.bincount(flat_idx, weights=g2[i], minlength=h * w)
                       for i in range(n)])
        return gf.reshape(a.shape)

    return _unary(x, fwd, bwd)


def triangular_histogram(x, n_bins: int, bandwidth: float) -> Tensor:
    """Normalized soft histogram with a triangular kernel, as one fused op.

    Each value v spreads weight max(0, 1 - |v*n_bins - (k+0.5)|/bandwidth)
    over nearby bins k, so only the ~2*bandwidth bins around each value are
    touched instead of a dense (pixels x bins) matrix.
    """
    x = as_tensor(x)
    v = x.data.ravel()
    if v.size == 0:
        raise ValueError("empty input")
    s = v * n_bins
    width = int(np.floor(2 * bandwidth)) + 1
    base = np.ceil(s - 0.5 - bandwidth).astype(np.int64)
    raw = np.zeros(n_bins)
    for j in range(width):
        k = base + j
        wgt = 1.0 - np.abs(s - (k + 0.5)) / bandwidth
        valid = (wgt > 0) & (k >= 0) & (k < n_bins)
        if valid.any():
            raw += np.bincount(k[valid], weights=wgt[valid], minlength=n_bins)
    total = raw.sum()
    if total <= 0:
        raise ValueError("all values fell outside every bin kernel")
    hist = raw / total

    def grad_fn(g):
        # d(hist)/d(raw) couples through the normalization
        g_raw = (g - np.dot(g, hist)) / total
        g_s = np.zeros_like(s)
        for j in range(width):
            k = base + j
            dist = s - (k + 0.5)
            inside = (np.abs(dist) < bandwidth) & (k >= 0) & (k < n_bins)
            kc = np.where(inside, k, 0)
            g_s += np.where(inside, -np.sign(dist) / bandwidth * g_raw[kc], 0.0)
        return ((g_s * n_bins).reshape(x.data.shape),)

    return _make(hist, (x,), grad_fn)


def channel_mean_var(x) -> tuple[Tensor, Tensor]:
    """Per-channel mean and variance over the spatial axes of a (C,H,W) map."""
    x = as_tensor(x)
    if x.ndim != 3:
        raise ValueError("channel_mean_var expects a (C,H,W) tensor")
    mu = x.mean(axis=(1, 2), keepdims=True)
    var = ((x - mu) ** 2).mean(axis=(1, 2), keepdims=True)
    return mu, var
