"""Reverse-mode automatic differentiation on numpy arrays.

A `Tensor` wraps an ndarray and remembers how it was produced; `backward`
replays the tape in reverse topological order and accumulates gradients
into every reachable leaf with `requires_grad=True`.  Only the operations
the suppression network actually needs are provided: elementwise
arithmetic with broadcasting, matmul, the convolution family (dense,
depthwise, strided analysis, overlap-add synthesis, fixed-kernel FIR),
pointwise nonlinearities, and a few reductions.

Latent activations follow the (features, frames) layout everywhere;
waveforms are 1-D.  All convolutions are built from shifted-slice
arithmetic (never FFT) so that causality is exact to the bit: perturbing
a frame can never touch earlier outputs through rounding.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np


class Tensor:
    """Array node in the computation graph."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        parents: tuple = (),
        backward: Optional[Callable] = None,
    ):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self._parents = parents
        self._backward = backward

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, grad={self.requires_grad})"

    # operator sugar; non-Tensor operands are treated as constants
    def __add__(self, other):
        return add(self, _as_tensor(other))

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, _as_tensor(other))

    def __rsub__(self, other):
        return sub(_as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, _as_tensor(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, _as_tensor(other))

    def __rtruediv__(self, other):
        return div(_as_tensor(other), self)

    def __neg__(self):
        return mul(self, Tensor(-1.0))

    def __pow__(self, exponent):
        return power(self, float(exponent))


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _node(data, parents: Sequence[Tensor], backward: Callable) -> Tensor:
    """Create a graph node; the tape entry is dropped if no parent needs grads."""
    if any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, parents=tuple(parents), backward=backward)
    return Tensor(data)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a broadcast gradient back down to the original operand shape."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def add(a: Tensor, b: Tensor) -> Tensor:
    def back(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)

    return _node(a.data + b.data, (a, b), back)


def sub(a: Tensor, b: Tensor) -> Tensor:
    def back(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(-g, b.data.shape)

    return _node(a.data - b.data, (a, b), back)


def mul(a: Tensor, b: Tensor) -> Tensor:
    def back(g):
        return (
            _unbroadcast(g * b.data, a.data.shape),
            _unbroadcast(g * a.data, b.data.shape),
        )

    return _node(a.data * b.data, (a, b), back)


def div(a: Tensor, b: Tensor) -> Tensor:
    def back(g):
        return (
            _unbroadcast(g / b.data, a.data.shape),
            _unbroadcast(-g * a.data / (b.data * b.data), b.data.shape),
        )

    return _node(a.data / b.data, (a, b), back)


def power(x: Tensor, exponent: float) -> Tensor:
    """x ** p for a fixed float exponent (x > 0 unless p is integral)."""
    out = x.data**exponent

    def back(g):
        return (g * exponent * x.data ** (exponent - 1.0),)

    return _node(out, (x,), back)


def log(x: Tensor) -> Tensor:
    def back(g):
        return (g / x.data,)

    return _node(np.log(x.data), (x,), back)


def log10(x: Tensor) -> Tensor:
    return mul(log(x), Tensor(1.0 / np.log(10.0)))


def sigmoid(x: Tensor) -> Tensor:
    # evaluate on the branch that avoids exp overflow
    d = x.data
    out = np.where(d >= 0, 1.0 / (1.0 + np.exp(-np.abs(d))), np.exp(-np.abs(d)) / (1.0 + np.exp(-np.abs(d))))

    def back(g):
        return (g * out * (1.0 - out),)

    return _node(out, (x,), back)


def softplus(x: Tensor) -> Tensor:
    out = np.logaddexp(0.0, x.data)

    def back(g):
        return (g / (1.0 + np.exp(-x.data)),)

    return _node(out, (x,), back)


def prelu(x: Tensor, slope: Tensor) -> Tensor:
    """max(0, x) + slope * min(0, x); slope is a scalar parameter."""
    pos = x.data > 0
    out = np.where(pos, x.data, slope.data * x.data)

    def back(g):
        gx = np.where(pos, g, slope.data * g)
        gs = _unbroadcast(np.where(pos, 0.0, x.data) * g, slope.data.shape)
        return gx, gs

    return _node(out, (x, slope), back)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    def back(g):
        return g @ b.data.T, a.data.T @ g

    return _node(a.data @ b.data, (a, b), back)


def concat_features(a: Tensor, b: Tensor) -> Tensor:
    """Stack two (F, K) latents along the feature axis."""
    fa = a.data.shape[0]

    def back(g):
        return g[:fa], g[fa:]

    return _node(np.concatenate([a.data, b.data], axis=0), (a, b), back)


def sum_features(x: Tensor) -> Tensor:
    """Per-frame sum over features: (F, K) -> (1, K)."""
    f = x.data.shape[0]

    def back(g):
        return (np.broadcast_to(g, (f,) + g.shape[1:]).copy() if f != 1 else g,)

    return _node(x.data.sum(axis=0, keepdims=True), (x,), back)


def sum_all(x: Tensor) -> Tensor:
    def back(g):
        return (np.full_like(x.data, float(g)),)

    return _node(x.data.sum(), (x,), back)


def mean_all(x: Tensor) -> Tensor:
    n = x.data.size

    def back(g):
        return (np.full_like(x.data, float(g) / n),)

    return _node(x.data.mean(), (x,), back)


def dot(a: Tensor, b: Tensor) -> Tensor:
    """Inner product of two 1-D tensors."""

    def back(g):
        return float(g) * b.data, float(g) * a.data

    return _node(np.dot(a.data, b.data), (a, b), back)


def causal_fir(x: Tensor, kernel: np.ndarray) -> Tensor:
    """Convolve each row of x (F, K) with a fixed causal FIR kernel.

    out[:, k] = sum_p kernel[p] * x[:, k - p].  The kernel is a constant,
    so no gradient flows into it.  Direct convolution keeps the causal
    structure bit-exact.
    """
    kernel = np.asarray(kernel, dtype=np.float64)
    k_len = len(kernel)
    n = x.data.shape[1]
    out = np.empty_like(x.data)
    for r in range(x.data.shape[0]):
        out[r] = np.convolve(x.data[r], kernel)[:n]
    rev = kernel[::-1]

    def back(g):
        gx = np.empty_like(g)
        for r in range(g.shape[0]):
            gx[r] = np.convolve(g[r], rev)[k_len - 1 : k_len - 1 + n]
        return (gx,)

    return _node(out, (x,), back)


def _pad_frames(data: np.ndarray, left: int, right: int) -> np.ndarray:
    if left == 0 and right == 0:
        return data
    return np.pad(data, ((0, 0), (left, right)))


def depthwise_conv(
    x: Tensor,
    weights: Tensor,
    dilation: int = 1,
    left_taps: Optional[int] = None,
    right_taps: int = 0,
) -> Tensor:
    """Per-channel dilated convolution over frames.

    x is (C, K), weights (C, P).  Tap t reads frame k + (t - left_taps) *
    dilation; the default left_taps = P - 1 - right_taps keeps the output
    length K with zero padding outside the signal.  right_taps > 0 grants
    that many future kernel positions (lookahead).
    """
    c, k = x.data.shape
    p = weights.data.shape[1]
    if weights.data.shape[0] != c:
        raise ValueError(f"depthwise weights {weights.data.shape} do not match {c} channels")
    if left_taps is None:
        left_taps = p - 1 - right_taps
    if left_taps + right_taps != p - 1 or left_taps < 0 or right_taps < 0:
        raise ValueError("left_taps + right_taps must equal kernel-1")
    pad_l = left_taps * dilation
    pad_r = right_taps * dilation
    xp = _pad_frames(x.data, pad_l, pad_r)
    out = np.zeros((c, k))
    for t in range(p):
        start = t * dilation
        out += weights.data[:, t : t + 1] * xp[:, start : start + k]

    def back(g):
        gx_pad = np.zeros_like(xp)
        gw = np.empty_like(weights.data)
        for t in range(p):
            start = t * dilation
            seg = xp[:, start : start + k]
            gw[:, t] = (g * seg).sum(axis=1)
            gx_pad[:, start : start + k] += weights.data[:, t : t + 1] * g
        gx = gx_pad[:, pad_l : pad_l + k] if (pad_l or pad_r) else gx_pad
        return gx, gw

    return _node(out, (x, weights), back)


def conv1d(
    x: Tensor,
    weights: Tensor,
    dilation: int = 1,
    padding: str = "causal",
    right_taps: int = 0,
) -> Tensor:
    """Dense dilated convolution over frames: (Cin, K) x (Cout, Cin, P) -> (Cout, K).

    padding: "causal" reads only current and past frames, "centered" splits
    the context symmetrically (odd P), "custom" uses right_taps directly.
    Output length always equals input length (zero padded).
    """
    cin, k = x.data.shape
    cout, cin_w, p = weights.data.shape
    if cin_w != cin:
        raise ValueError(f"conv1d weights expect {cin_w} input channels, got {cin}")
    if padding == "causal":
        right = 0
    elif padding == "centered":
        if p % 2 == 0:
            raise ValueError("centered padding requires an odd kernel")
        right = (p - 1) // 2
    elif padding == "custom":
        right = right_taps
    else:
        raise ValueError(f"unknown padding policy {padding!r}")
    left = p - 1 - right
    pad_l, pad_r = left * dilation, right * dilation
    xp = _pad_frames(x.data, pad_l, pad_r)
    out = np.zeros((cout, k))
    for t in range(p):
        start = t * dilation
        out += weights.data[:, :, t] @ xp[:, start : start + k]

    def back(g):
        gx_pad = np.zeros_like(xp)
        gw = np.empty_like(weights.data)
        for t in range(p):
            start = t * dilation
            seg = xp[:, start : start + k]
            gw[:, :, t] = g @ seg.T
            gx_pad[:, start : start + k] += weights.data[:, :, t].T @ g
        gx = gx_pad[:, pad_l : pad_l + k] if (pad_l or pad_r) else gx_pad
        return gx, gw

    return _node(out, (x, weights), back)


def frame_signal(x: np.ndarray, frame_len: int, hop: int) -> tuple[np.ndarray, int]:
    """Slice a 1-D signal into (frame_len, K) columns under the left-pad policy.

    The signal is padded with frame_len - hop zeros on the left and enough on
    the right that K = ceil(n / hop) frames fit; frame k starts at k * hop in
    the padded signal, i.e. at k * hop - (frame_len - hop) in the original.
    """
    n = len(x)
    if n == 0:
        raise ValueError("cannot frame an empty signal")
    pad_left = frame_len - hop
    k = -(-n // hop)
    total = (k - 1) * hop + frame_len
    xp = np.zeros(total)
    xp[pad_left : pad_left + n] = x
    idx = np.arange(frame_len)[:, None] + hop * np.arange(k)[None, :]
    return xp[idx], pad_left


def encoder_conv(x: Tensor, weights: Tensor, hop: int) -> Tensor:
    """Strided analysis convolution: 1-D signal -> (N, K) latent.

    weights is (N, L); frame k is the signal slice starting at k * hop - (L - hop).
    """
    n_feat, frame_len = weights.data.shape
    frames, pad_left = frame_signal(x.data, frame_len, hop)
    k = frames.shape[1]
    n = len(x.data)
    out = weights.data @ frames

    def back(g):
        gw = g @ frames.T
        gx_frames = weights.data.T @ g  # (L, K)
        total = (k - 1) * hop + frame_len
        gx_pad = np.zeros(total)
        for tap in range(frame_len):
            gx_pad[tap : tap + (k - 1) * hop + 1 : hop] += gx_frames[tap]
        return gx_pad[pad_left : pad_left + n], gw

    return _node(out, (x, weights), back)


def decoder_overlap_add(latent: Tensor, weights: Tensor, hop: int, n_out: int) -> Tensor:
    """Transposed synthesis convolution: (N, K) latent -> 1-D signal.

    weights is (N, L).  Frame k contributes weights.T @ latent[:, k] at
    position k * hop in OLA coordinates; the result is trimmed with the same
    left offset the encoder used, so decode(encode(x)) is sample-aligned.
    """
    n_feat, frame_len = weights.data.shape
    k = latent.data.shape[1]
    pad_left = frame_len - hop
    total = (k - 1) * hop + frame_len
    cols = weights.data.T @ latent.data  # (L, K)
    full = np.zeros(total)
    for tap in range(frame_len):
        full[tap : tap + (k - 1) * hop + 1 : hop] += cols[tap]
    out = full[pad_left : pad_left + n_out]

    def back(g):
        g_full = np.zeros(total)
        g_full[pad_left : pad_left + n_out] = g
        idx = np.arange(frame_len)[:, None] + hop * np.arange(k)[None, :]
        g_cols = g_full[idx]  # (L, K)
        g_latent = weights.data @ g_cols
        g_weights = (latent.data @ g_cols.T)
        return g_latent, g_weights

    return _node(out, (latent, weights), back)


def backward(root: Tensor) -> None:
    """Accumulate d(root)/d(leaf) into .grad of every grad-requiring leaf."""
    if root.data.shape != ():
        raise ValueError("backward expects a scalar root")
    if not root.requires_grad:
        raise ValueError("root does not require grad; no forward was recorded")
    order: list[Tensor] = []
    seen = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in seen:
                stack.append((parent, False))
    root.grad = np.ones_like(root.data)
    for node in reversed(order):
        if node._backward is None or node.grad is None:
            continue
        grads = node._backward(node.grad)
        for parent, g in zip(node._parents, grads):
            if g is None or not parent.requires_grad:
                continue
            if parent.grad is None:
                parent.grad = g.copy() if isinstance(g, np.ndarray) else np.asarray(g, dtype=np.float64)
            else:
                parent.grad = parent.grad + g
