"""Primitive forward/backward rules and the `apply_primitive` dispatcher.

Each primitive validates its operand shapes, computes the forward value with
vectorized numpy, and (in grad mode) records a closure that routes the output
gradient to whichever inputs still need one. Math primitives: add,
scalar-mul, element-mul, matmul, conv1d, linear, relu, mish, layernorm,
concat, slice, mse, softmax. Structural data movers (reshape, transpose)
carry exact pass-through gradients.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import ShapeMismatchError, UnknownOpError
from .tensor import Tensor, as_tensor, grad_enabled


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Reduce `grad` back to `shape` after a numpy-broadcast forward."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def _broadcastable(sa: tuple[int, ...], sb: tuple[int, ...]) -> bool:
    for a, b in zip(reversed(sa), reversed(sb)):
        if a != b and a != 1 and b != 1:
            return False
    return True


def _softplus(x: np.ndarray) -> np.ndarray:
    # overflow-safe log(1 + e^x)
    return np.log1p(np.exp(-np.abs(x))) + np.maximum(x, 0.0)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


# ---------------------------------------------------------------------------
# elementwise / broadcast primitives
# ---------------------------------------------------------------------------

def _op_add(attrs, a, b):
    if not _broadcastable(a.shape, b.shape):
        raise ShapeMismatchError(f"add: cannot broadcast {a.shape} with {b.shape}")
    out = a + b

    def bwd(g, needs):
        return (
            _unbroadcast(g, a.shape) if needs[0] else None,
            _unbroadcast(g, b.shape) if needs[1] else None,
        )

    return out, bwd


def _op_scalar_mul(attrs, a):
    s = float(attrs["scalar"])
    out = a * s

    def bwd(g, needs):
        return (g * s if needs[0] else None,)

    return out, bwd


def _op_element_mul(attrs, a, b):
    if not _broadcastable(a.shape, b.shape):
        raise ShapeMismatchError(f"element-mul: cannot broadcast {a.shape} with {b.shape}")
    out = a * b

    def bwd(g, needs):
        return (
            _unbroadcast(g * b, a.shape) if needs[0] else None,
            _unbroadcast(g * a, b.shape) if needs[1] else None,
        )

    return out, bwd


# ---------------------------------------------------------------------------
# linear algebra
# ---------------------------------------------------------------------------

def _op_matmul(attrs, a, b):
    ta = bool(attrs.get("transpose_a", False))
    tb = bool(attrs.get("transpose_b", False))
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeMismatchError(f"matmul: operands must be >=2-D, got {a.shape} and {b.shape}")
    aa = np.swapaxes(a, -1, -2) if ta else a
    bb = np.swapaxes(b, -1, -2) if tb else b
    if aa.shape[-1] != bb.shape[-2]:
        raise ShapeMismatchError(
            f"matmul: inner dims differ, lhs {a.shape} (transposed={ta}) rhs {b.shape} (transposed={tb})")
    if not _broadcastable(aa.shape[:-2], bb.shape[:-2]):
        raise ShapeMismatchError(f"matmul: batch dims of {a.shape} and {b.shape} do not broadcast")
    out = np.matmul(aa, bb)

    def bwd(g, needs):
        ga = gb = None
        if needs[0]:
            d = np.matmul(g, np.swapaxes(bb, -1, -2))
            if ta:
                d = np.swapaxes(d, -1, -2)
            ga = _unbroadcast(d, a.shape)
        if needs[1]:
            d = np.matmul(np.swapaxes(aa, -1, -2), g)
            if tb:
                d = np.swapaxes(d, -1, -2)
            gb = _unbroadcast(d, b.shape)
        return ga, gb

    return out, bwd


def _op_linear(attrs, x, w, b):
    if w.ndim != 2 or x.shape[-1] != w.shape[0]:
        raise ShapeMismatchError(f"linear: input {x.shape} incompatible with weight {w.shape}")
    if b.shape != (w.shape[1],):
        raise ShapeMismatchError(f"linear: bias {b.shape} incompatible with weight {w.shape}")
    out = x @ w + b

    def bwd(g, needs):
        gx = gw = gb = None
        if needs[0]:
            gx = g @ w.T
        if needs[1]:
            gw = np.tensordot(x, g, axes=(tuple(range(x.ndim - 1)), tuple(range(g.ndim - 1))))
        if needs[2]:
            gb = g.reshape(-1, g.shape[-1]).sum(axis=0)
        return gx, gw, gb

    return out, bwd


def _conv_cols(xp: np.ndarray, kernel: int, stride: int, l_out: int) -> np.ndarray:
    # (B, Ci, K, Lo) sliding view over the padded input
    s = xp.strides
    return np.lib.stride_tricks.as_strided(
        xp, (xp.shape[0], xp.shape[1], kernel, l_out), (s[0], s[1], s[2], s[2] * stride))


def _op_conv1d(attrs, x, w, b):
    stride = int(attrs.get("stride", 1))
    pad = int(attrs.get("padding", 0))
    squeeze = x.ndim == 2
    x3 = x[None] if squeeze else x
    if x3.ndim != 3 or w.ndim != 3:
        raise ShapeMismatchError(f"conv1d: need (B,Ci,L) input and (Co,Ci,K) kernel, got {x.shape}, {w.shape}")
    B, Ci, L = x3.shape
    Co, Cw, K = w.shape
    if Cw != Ci:
        raise ShapeMismatchError(f"conv1d: input channels {Ci} != kernel channels {Cw}")
    if b.shape != (Co,):
        raise ShapeMismatchError(f"conv1d: bias {b.shape} incompatible with {Co} output channels")
    if L + 2 * pad < K:
        raise ShapeMismatchError(f"conv1d: kernel width {K} exceeds padded length {L + 2 * pad}")
    Lo = (L + 2 * pad - K) // stride + 1
    xp = np.pad(x3, ((0, 0), (0, 0), (pad, pad))) if pad else x3
    cols = _conv_cols(xp, K, stride, Lo)
    y = np.tensordot(w, cols, axes=([1, 2], [1, 2]))          # (Co, B, Lo)
    y = np.ascontiguousarray(y.transpose(1, 0, 2)) + b[None, :, None]

    def bwd(g, needs):
        g3 = g[None] if squeeze else g
        gx = gw = gb = None
        if needs[1]:
            gw = np.tensordot(g3, cols, axes=([0, 2], [0, 3]))  # (Co, Ci, K)
        if needs[2]:
            gb = g3.sum(axis=(0, 2))
        if needs[0]:
            gxp = np.zeros_like(xp)
            # scatter g * w back through the sliding window, one tap at a time
            contrib = np.tensordot(g3, w, axes=(1, 0))          # (B, Lo, Ci, K)
            for k in range(K):
                gxp[:, :, k:k + Lo * stride:stride] += contrib[:, :, :, k].transpose(0, 2, 1)
            gx = gxp[:, :, pad:pad + L] if pad else gxp
            if squeeze:
                gx = gx[0]
        return gx, gw, gb

    return y[0] if squeeze else y, bwd


# ---------------------------------------------------------------------------
# activations / normalization
# ---------------------------------------------------------------------------

def _op_relu(attrs, x):
    out = np.maximum(x, 0.0)

    def bwd(g, needs):
        return (np.where(x > 0.0, g, 0.0) if needs[0] else None,)

    return out, bwd


def _op_mish(attrs, x):
    t = np.tanh(_softplus(x))
    out = x * t

    def bwd(g, needs):
        if not needs[0]:
            return (None,)
        return (g * (t + x * _sigmoid(x) * (1.0 - t * t)),)

    return out, bwd


def _op_layernorm(attrs, x, gamma, beta):
    eps = float(attrs.get("eps", 1e-5))
    axis = int(attrs.get("axis", -1)) % x.ndim
    n = x.shape[axis]
    if gamma.shape != (n,) or beta.shape != (n,):
        raise ShapeMismatchError(
            f"layernorm: affine shapes {gamma.shape}/{beta.shape} do not match width {n}")
    shape = [1] * x.ndim
    shape[axis] = n
    gam = gamma.reshape(shape)
    mu = x.mean(axis=axis, keepdims=True)
    xc = x - mu
    var = np.mean(xc * xc, axis=axis, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    out = xhat * gam + beta.reshape(shape)
    reduce_axes = tuple(i for i in range(x.ndim) if i != axis)

    def bwd(g, needs):
        gx = gg = gb = None
        if needs[1]:
            gg = np.sum(g * xhat, axis=reduce_axes)
        if needs[2]:
            gb = np.sum(g, axis=reduce_axes)
        if needs[0]:
            gh = g * gam
            m1 = gh.mean(axis=axis, keepdims=True)
            m2 = (gh * xhat).mean(axis=axis, keepdims=True)
            gx = inv * (gh - m1 - xhat * m2)
        return gx, gg, gb

    return out, bwd


def _op_softmax(attrs, x):
    axis = int(attrs.get("axis", -1))
    z = x - x.max(axis=axis, keepdims=True)
    e = np.exp(z)
    s = e / e.sum(axis=axis, keepdims=True)

    def bwd(g, needs):
        if not needs[0]:
            return (None,)
        dot = np.sum(g * s, axis=axis, keepdims=True)
        return (s * (g - dot),)

    return s, bwd


# ---------------------------------------------------------------------------
# structure
# ---------------------------------------------------------------------------

def _op_concat(attrs, *arrays):
    axis = int(attrs["axis"])
    base = list(arrays[0].shape)
    for a in arrays[1:]:
        other = list(a.shape)
        if len(other) != len(base):
            raise ShapeMismatchError(f"concat: rank mismatch {arrays[0].shape} vs {a.shape}")
        for i, (m, n) in enumerate(zip(base, other)):
            if i != axis % len(base) and m != n:
                raise ShapeMismatchError(f"concat: shapes {arrays[0].shape} and {a.shape} differ off axis {axis}")
    out = np.concatenate(arrays, axis=axis)
    sizes = [a.shape[axis] for a in arrays]
    offsets = np.cumsum([0] + sizes)

    def bwd(g, needs):
        grads = []
        for i in range(len(arrays)):
            if needs[i]:
                sl = [slice(None)] * g.ndim
                sl[axis] = slice(offsets[i], offsets[i + 1])
                grads.append(np.ascontiguousarray(g[tuple(sl)]))
            else:
                grads.append(None)
        return tuple(grads)

    return out, bwd


def _op_slice(attrs, x):
    key = attrs["key"]
    if not isinstance(key, tuple) or not all(isinstance(s, slice) for s in key):
        raise ShapeMismatchError("slice: key must be a tuple of slice objects")
    out = np.ascontiguousarray(x[key])

    def bwd(g, needs):
        if not needs[0]:
            return (None,)
        gx = np.zeros_like(x)
        gx[key] = g
        return (gx,)

    return out, bwd


def _op_reshape(attrs, x):
    shape = tuple(attrs["shape"])
    out = np.ascontiguousarray(x).reshape(shape)

    def bwd(g, needs):
        return (g.reshape(x.shape) if needs[0] else None,)

    return out, bwd


def _op_transpose(attrs, x):
    axes = tuple(attrs["axes"])
    out = np.ascontiguousarray(x.transpose(axes))
    inverse = tuple(np.argsort(axes))

    def bwd(g, needs):
        return (np.ascontiguousarray(g.transpose(inverse)) if needs[0] else None,)

    return out, bwd


# ---------------------------------------------------------------------------
# losses
# ---------------------------------------------------------------------------

def _op_mse(attrs, a, b):
    if a.shape != b.shape:
        raise ShapeMismatchError(f"mse: shapes differ, {a.shape} vs {b.shape}")
    diff = a - b
    out = np.asarray(np.mean(diff * diff))
    scale = 2.0 / diff.size

    def bwd(g, needs):
        base = g * scale * diff
        return (
            base if needs[0] else None,
            -base if needs[1] else None,
        )

    return out, bwd


_OPS = {
    "add": (_op_add, 2),
    "scalar-mul": (_op_scalar_mul, 1),
    "element-mul": (_op_element_mul, 2),
    "matmul": (_op_matmul, 2),
    "conv1d": (_op_conv1d, 3),
    "linear": (_op_linear, 3),
    "relu": (_op_relu, 1),
    "mish": (_op_mish, 1),
    "layernorm": (_op_layernorm, 3),
    "concat": (_op_concat, None),
    "slice": (_op_slice, 1),
    "mse": (_op_mse, 2),
    "softmax": (_op_softmax, 1),
    "reshape": (_op_reshape, 1),
    "transpose": (_op_transpose, 1),
}

PRIMITIVE_KINDS = tuple(sorted(_OPS))


def apply_primitive(kind: str, inputs: Sequence[Tensor], attrs: dict | None = None) -> Tensor:
    """Evaluate one primitive, recording its backward closure in grad mode."""
    try:
        impl, arity = _OPS[kind]
    except KeyError:
        raise UnknownOpError(f"unknown primitive op tag: {kind!r}") from None
    if arity is not None and len(inputs) != arity:
        raise ShapeMismatchError(f"{kind}: expected {arity} inputs, got {len(inputs)}")
    tensors = [as_tensor(t) for t in inputs]
    arrays = [t.data for t in tensors]
    out_data, bwd = impl(attrs or {}, *arrays)

    if not grad_enabled():
        return Tensor._from_op(np.asarray(out_data), kind, (), None)

    in_tuple = tuple(tensors)

    def backward_hook(g: np.ndarray):
        needs = [t.needs_grad() for t in in_tuple]
        grads = bwd(g, needs)
        for t, gr in zip(in_tuple, grads):
            if gr is not None:
                t.accumulate_grad(gr)

    return Tensor._from_op(np.asarray(out_data), kind, in_tuple, backward_hook)


# -- thin functional sugar over apply_primitive -----------------------------

def add(a, b):
    return apply_primitive("add", [a, b])


def scalar_mul(a, s: float):
    return apply_primitive("scalar-mul", [a], {"scalar": s})


def element_mul(a, b):
    return apply_primitive("element-mul", [a, b])


def matmul(a, b, transpose_a=False, transpose_b=False):
    return apply_primitive("matmul", [a, b], {"transpose_a": transpose_a, "transpose_b": transpose_b})


def conv1d(x, w, b, stride=1, padding=0):
    return apply_primitive("conv1d", [x, w, b], {"stride": stride, "padding": padding})


def linear(x, w, b):
    return apply_primitive("linear", [x, w, b])


def relu(x):
    return apply_primitive("relu", [x])


def mish(x):
    return apply_primitive("mish", [x])


def layernorm(x, gamma, beta, eps=1e-5, axis=-1):
    return apply_primitive("layernorm", [x, gamma, beta], {"eps": eps, "axis": axis})


def concat(tensors, axis):
    return apply_primitive("concat", list(tensors), {"axis": axis})


def slice_(x, key):
    return apply_primitive("slice", [x], {"key": key})


def mse(a, b):
    return apply_primitive("mse", [a, b])


def softmax(x, axis=-1):
    return apply_primitive("softmax", [x], {"axis": axis})


def reshape(x, shape):
    return apply_primitive("reshape", [x], {"shape": tuple(shape)})


def transpose(x, axes):
    return apply_primitive("transpose", [x], {"axes": tuple(axes)})
