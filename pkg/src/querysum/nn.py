"""Minimal dense layer library with explicit forward/backward passes.

Layers are objects holding :class:`Param` weights.  A forward call returns
``(output, cache)`` and the matching ``backward(cache, grad_out)`` call
accumulates parameter gradients and returns the input gradient.  Returning
caches (instead of storing them on the layer) lets the same parameter set be
applied many times inside one step, which the per-intent loops rely on.

The numeric dtype is a per-model choice: every layer takes ``dtype`` at
construction (float32 by default, float64 for the gradient-check suite).
"""

import numpy as np

from . import kernels
from .errors import ConfigError, DimensionError

DTYPES = {"f32": np.float32, "f64": np.float64}

BCE_EPS = 1e-7


def resolve_dtype(dtype):
    if isinstance(dtype, str):
        try:
            return DTYPES[dtype]
        except KeyError:
            raise ConfigError(f"unknown dtype {dtype!r}; expected one of {sorted(DTYPES)}")
    return np.dtype(dtype).type


class Param:
    """A weight tensor plus its gradient accumulator (same shape)."""

    __slots__ = ("value", "grad")

    def __init__(self, value):
        self.value = np.ascontiguousarray(value)
        self.grad = np.zeros_like(self.value)

    @property
    def shape(self):
        return self.value.shape


class Module:
    """Base class providing named parameter traversal."""

    def params(self):
        out = []
        for attr in sorted(vars(self)):
            val = getattr(self, attr)
            if isinstance(val, Param):
                out.append((attr, val))
            elif isinstance(val, Module):
                out.extend((f"{attr}.{n}", p) for n, p in val.params())
            elif isinstance(val, (list, tuple)):
                for i, item in enumerate(val):
                    if isinstance(item, Module):
                        out.extend((f"{attr}.{i}.{n}", p) for n, p in item.params())
            elif isinstance(val, dict):
                for key in sorted(val):
                    item = val[key]
                    if isinstance(item, Module):
                        out.extend((f"{attr}.{key}.{n}", p) for n, p in item.params())
        return out

    def zero_grad(self):
        for _, p in self.params():
            p.grad[...] = 0


def glorot(rng, n_in, n_out, dtype):
    scale = np.sqrt(6.0 / (n_in + n_out))
    return rng.uniform(-scale, scale, size=(n_in, n_out)).astype(dtype)


class Linear(Module):
    """y = x @ W + b with x of shape [..., n_in]."""

    def __init__(self, n_in, n_out, rng, dtype=np.float32):
        dtype = resolve_dtype(dtype)
        self.n_in = int(n_in)
        self.n_out = int(n_out)
        self.W = Param(glorot(rng, self.n_in, self.n_out, dtype))
        self.b = Param(np.zeros(self.n_out, dtype=dtype))

    def forward(self, x):
        x = np.asarray(x)
        if x.shape[-1] != self.n_in:
            raise DimensionError(
                f"linear expects last dim {self.n_in}, got input shape {x.shape}"
            )
        y = x @ self.W.value + self.b.value
        return y, x

    def backward(self, cache, dy):
        x = cache
        x2 = x.reshape(-1, self.n_in)
        dy2 = dy.reshape(-1, self.n_out)
        self.W.grad += x2.T @ dy2
        self.b.grad += dy2.sum(axis=0)
        return (dy2 @ self.W.value.T).reshape(x.shape)


def _ceil_pad(length, kernel, stride):
    """Symmetric zero padding so the output length is ceil(length/stride)."""
    out_len = -(-length // stride)
    needed = max((out_len - 1) * stride + kernel - length, 0)
    left = needed // 2
    right = needed - left
    return out_len, left, right


class Conv1d(Module):
    """Temporal 1-D convolution over [T, Cin] -> [ceil(T/stride), Cout]."""

    def __init__(self, c_in, c_out, kernel, stride, rng, dtype=np.float32):
        if kernel < 1 or stride < 1:
            raise ConfigError(f"conv1d kernel/stride must be >= 1, got {kernel}/{stride}")
        dtype = resolve_dtype(dtype)
        self.c_in = int(c_in)
        self.c_out = int(c_out)
        self.kernel = int(kernel)
        self.stride = int(stride)
        self.W = Param(glorot(rng, self.kernel * self.c_in, self.c_out, dtype))
        self.b = Param(np.zeros(self.c_out, dtype=dtype))

    def forward(self, x):
        t, c = x.shape
        if c != self.c_in:
            raise DimensionError(f"conv1d expects {self.c_in} channels, got {c}")
        if t < 1:
            raise DimensionError("conv1d input must have at least one step")
        out_len, left, right = _ceil_pad(t, self.kernel, self.stride)
        xp = np.zeros((t + left + right, c), dtype=x.dtype)
        xp[left : left + t] = x
        cols = np.empty((out_len, self.kernel, c), dtype=x.dtype)
        for k in range(self.kernel):
            cols[:, k, :] = xp[k : k + out_len * self.stride : self.stride, :]
        cols = cols.reshape(out_len, self.kernel * c)
        y = cols @ self.W.value + self.b.value
        return y, (cols, t, left, xp.shape[0])

    def backward(self, cache, dy):
        cols, t, left, padded_len = cache
        self.W.grad += cols.T @ dy
        self.b.grad += dy.sum(axis=0)
        dcols = (dy @ self.W.value.T).reshape(-1, self.kernel, self.c_in)
        dxp = np.zeros((padded_len, self.c_in), dtype=dy.dtype)
        out_len = dy.shape[0]
        for k in range(self.kernel):
            dxp[k : k + out_len * self.stride : self.stride, :] += dcols[:, k, :]
        return dxp[left : left + t]


class MaxPool1d:
    """Per-channel max over temporal windows, zero padded to ceil(T/stride).

    Backward routes the gradient to the argmax position (ties take the
    lowest index).  Padded positions can win only when every real value in
    the window is negative; their gradient is dropped.
    """

    def __init__(self, kernel, stride):
        if kernel < 1 or stride < 1:
            raise ConfigError(f"maxpool kernel/stride must be >= 1, got {kernel}/{stride}")
        self.kernel = int(kernel)
        self.stride = int(stride)

    def forward(self, x):
        t, c = x.shape
        if t < 1 or c < 1:
            raise DimensionError(f"maxpool input must be non-empty, got shape {x.shape}")
        out_len, left, right = _ceil_pad(t, self.kernel, self.stride)
        xp = np.zeros((t + left + right, c), dtype=x.dtype)
        xp[left : left + t] = x
        y, arg = kernels.maxpool_forward(xp, self.kernel, self.stride, out_len)
        return y, (arg, t, left, xp.shape[0])

    def backward(self, cache, dy):
        arg, t, left, padded_len = cache
        dxp = kernels.maxpool_backward(np.ascontiguousarray(dy), arg, padded_len)
        return dxp[left : left + t]


# ---------------------------------------------------------------------------
# stateless ops


def relu(x):
    mask = x > 0
    return x * mask, mask


def relu_backward(mask, dy):
    return dy * mask


def shifted_relu(x, delta):
    """Elementwise max(x - delta, 0)."""
    if delta < 0:
        raise ConfigError(f"shifted_relu delta must be >= 0, got {delta}")
    mask = x > delta
    return np.maximum(x - delta, 0), mask


def shifted_relu_backward(mask, dy):
    return dy * mask


def softmax(x):
    """Stable softmax along the last axis."""
    z = x - x.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_backward(y, dy):
    return y * (dy - (dy * y).sum(axis=-1, keepdims=True))


def sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid_backward(y, dy):
    return dy * y * (1.0 - y)


def bce_loss(p, y):
    """Mean binary cross-entropy; p is clamped into [eps, 1-eps]."""
    p = np.asarray(p)
    y = np.asarray(y)
    if p.shape != y.shape:
        raise DimensionError(f"bce_loss shape mismatch: {p.shape} vs {y.shape}")
    pc = np.clip(p, BCE_EPS, 1.0 - BCE_EPS)
    loss = -(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc)).mean()
    return loss, (p, pc, y)


def bce_backward(cache, dloss=1.0):
    p, pc, y = cache
    inside = (p > BCE_EPS) & (p < 1.0 - BCE_EPS)
    dp = (pc - y) / (pc * (1.0 - pc)) / p.size * dloss
    return dp * inside


class MLP(Module):
    """Stack of Linear layers with ReLU between them (none after the last)."""

    def __init__(self, dims, rng, dtype=np.float32):
        if len(dims) < 2:
            raise ConfigError("MLP needs at least input and output dims")
        self.layers = [Linear(a, b, rng, dtype) for a, b in zip(dims[:-1], dims[1:])]

    def forward(self, x):
        caches = []
        for i, layer in enumerate(self.layers):
            x, c = layer.forward(x)
            if i < len(self.layers) - 1:
                x, mask = relu(x)
            else:
                mask = None
            caches.append((c, mask))
        return x, caches

    def backward(self, caches, dy):
        for layer, (c, mask) in zip(reversed(self.layers), reversed(caches)):
            if mask is not None:
                dy = relu_backward(mask, dy)
            dy = layer.backward(c, dy)
        return dy


class MultiheadAttention(Module):
    """Scaled dot-product attention: queries [Q,e] against keys/values [N,e]."""

    def __init__(self, e, heads, rng, dtype=np.float32):
        if e % heads != 0:
            raise ConfigError(f"embedding dim {e} not divisible by {heads} heads")
        self.e = int(e)
        self.heads = int(heads)
        self.dh = self.e // self.heads
        self.wq = Linear(e, e, rng, dtype)
        self.wk = Linear(e, e, rng, dtype)
        self.wv = Linear(e, e, rng, dtype)
        self.wo = Linear(e, e, rng, dtype)

    def _split(self, x):
        # [n, e] -> [heads, n, dh]
        return x.reshape(x.shape[0], self.heads, self.dh).transpose(1, 0, 2)

    def forward(self, queries, keys_values):
        q, cq = self.wq.forward(queries)
        k, ck = self.wk.forward(keys_values)
        v, cv = self.wv.forward(keys_values)
        qh, kh, vh = self._split(q), self._split(k), self._split(v)
        scores = qh @ kh.transpose(0, 2, 1) / np.sqrt(self.dh)
        attn = softmax(scores)
        ctx = attn @ vh  # [heads, Q, dh]
        merged = ctx.transpose(1, 0, 2).reshape(queries.shape[0], self.e)
        out, co = self.wo.forward(merged)
        return out, (cq, ck, cv, co, qh, kh, vh, attn)

    def backward(self, cache, dy):
        cq, ck, cv, co, qh, kh, vh, attn = cache
        dmerged = self.wo.backward(co, dy)
        dctx = self._split(dmerged)
        dattn = dctx @ vh.transpose(0, 2, 1)
        dvh = attn.transpose(0, 2, 1) @ dctx
        dscores = softmax_backward(attn, dattn) / np.sqrt(self.dh)
        dqh = dscores @ kh
        dkh = dscores.transpose(0, 2, 1) @ qh
        dq = dqh.transpose(1, 0, 2).reshape(-1, self.e)
        dk = dkh.transpose(1, 0, 2).reshape(-1, self.e)
        dv = dvh.transpose(1, 0, 2).reshape(-1, self.e)
        dqueries = self.wq.backward(cq, dq)
        dkv = self.wk.backward(ck, dk) + self.wv.backward(cv, dv)
        return dqueries, dkv
