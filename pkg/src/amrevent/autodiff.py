"""Minimal reverse-mode automatic differentiation over numpy arrays.

A ``Tensor`` wraps an ndarray, remembers the tensors it was computed
from, and knows how to push an output gradient back to them. Calling
``backward()`` on a scalar runs the tape in reverse topological order.
Dtypes are preserved: float32 graphs stay float32, float64 stays
float64 (the latter is what the finite-difference tests use).
"""

from __future__ import annotations

import numpy as np


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum `grad` down to `shape` (inverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents")

    def __init__(self, data, requires_grad=False, _parents=(), _backward=None):
        if isinstance(data, Tensor):
            raise TypeError("Tensor(data) expects an array-like, not a Tensor")
        self.data = np.asarray(data)
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in _parents)
        self._parents = _parents
        self._backward = _backward

    # -- bookkeeping ---------------------------------------------------

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def __float__(self):
        return float(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, grad={self.requires_grad})"

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def _accum(self, grad: np.ndarray):
        grad = np.asarray(grad, dtype=self.data.dtype)
        self.grad = grad if self.grad is None else self.grad + grad

    def zero_grad(self):
        self.grad = None

    def backward(self, grad=None):
        if grad is None:
            if self.data.shape != ():
                raise ValueError("backward() without gradient requires a scalar output")
            grad = np.ones_like(self.data)
        topo: list[Tensor] = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in seen:
                    stack.append((p, False))
        self._accum(np.asarray(grad))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        a, b = self, as_tensor(other)
        out = Tensor(a.data + b.data, _parents=(a, b))

        def back(g):
            if a.requires_grad:
                a._accum(_unbroadcast(g, a.data.shape))
            if b.requires_grad:
                b._accum(_unbroadcast(g, b.data.shape))

        out._backward = back
        return out

    __radd__ = __add__

    def __neg__(self):
        a = self
        out = Tensor(-a.data, _parents=(a,))
        out._backward = lambda g: a._accum(-g) if a.requires_grad else None
        return out

    def __sub__(self, other):
        return self + (-as_tensor(other))

    def __rsub__(self, other):
        return as_tensor(other) + (-self)

    def __mul__(self, other):
        a, b = self, as_tensor(other)
        out = Tensor(a.data * b.data, _parents=(a, b))

        def back(g):
            if a.requires_grad:
                a._accum(_unbroadcast(g * b.data, a.data.shape))
            if b.requires_grad:
                b._accum(_unbroadcast(g * a.data, b.data.shape))

        out._backward = back
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        a, b = self, as_tensor(other)
        out = Tensor(a.data / b.data, _parents=(a, b))

        def back(g):
            if a.requires_grad:
                a._accum(_unbroadcast(g / b.data, a.data.shape))
            if b.requires_grad:
                b._accum(_unbroadcast(-g * a.data / (b.data * b.data), b.data.shape))

        out._backward = back
        return out

    def __rtruediv__(self, other):
        return as_tensor(other) / self

    def __matmul__(self, other):
        a, b = self, as_tensor(other)
        out = Tensor(a.data @ b.data, _parents=(a, b))

        def back(g):
            # promote vector operands to matrices, apply the matrix
            # VJP, then squeeze the promoted axes back out
            g = np.asarray(g)
            ad, bd = a.data, b.data
            am = ad[None, :] if ad.ndim == 1 else ad
            bm = bd[:, None] if bd.ndim == 1 else bd
            gm = g
            if bd.ndim == 1:
                gm = np.expand_dims(gm, -1)
            if ad.ndim == 1:
                gm = np.expand_dims(gm, -2)
            if a.requires_grad:
                ga = gm @ bm.swapaxes(-1, -2)
                if ad.ndim == 1:
                    ga = np.squeeze(ga, -2)
                a._accum(_unbroadcast(ga, ad.shape))
            if b.requires_grad:
                gb = am.swapaxes(-1, -2) @ gm
                if bd.ndim == 1:
                    gb = np.squeeze(gb, -1)
                b._accum(_unbroadcast(gb, bd.shape))

        out._backward = back
        return out

    def __pow__(self, exponent):
        if not isinstance(exponent, (int, float)):
            raise TypeError("only scalar exponents are supported")
        a = self
        out = Tensor(a.data ** exponent, _parents=(a,))

        def back(g):
            if a.requires_grad:
                a._accum(g * exponent * a.data ** (exponent - 1))

        out._backward = back
        return out

    # -- shape ops -----------------------------------------------------

    def reshape(self, *shape):
        a = self
        out = Tensor(a.data.reshape(*shape), _parents=(a,))
        out._backward = lambda g: a._accum(g.reshape(a.data.shape)) if a.requires_grad else None
        return out

    def swapaxes(self, ax1, ax2):
        a = self
        out = Tensor(a.data.swapaxes(ax1, ax2), _parents=(a,))
        out._backward = lambda g: a._accum(g.swapaxes(ax1, ax2)) if a.requires_grad else None
        return out

    @property
    def T(self):
        return self.swapaxes(-1, -2)

    def __getitem__(self, idx):
        a = self
        out = Tensor(a.data[idx], _parents=(a,))

        def back(g):
            if a.requires_grad:
                full = np.zeros_like(a.data)
                np.add.at(full, idx, g)
                a._accum(full)

        out._backward = back
        return out

    # -- reductions ----------------------------------------------------

    def sum(self, axis=None, keepdims=False):
        a = self
        out = Tensor(a.data.sum(axis=axis, keepdims=keepdims), _parents=(a,))

        def back(g):
            if not a.requires_grad:
                return
            if axis is None:
                a._accum(np.broadcast_to(g, a.data.shape))
            else:
                gk = g if keepdims else np.expand_dims(g, axis)
                a._accum(np.broadcast_to(gk, a.data.shape))

        out._backward = back
        return out

    def mean(self, axis=None, keepdims=False):
        n = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)

    def max(self, axis=None, keepdims=False):
        a = self
        out_data = a.data.max(axis=axis, keepdims=keepdims)
        out = Tensor(out_data, _parents=(a,))

        def back(g):
            if not a.requires_grad:
                return
            if axis is None:
                mask = (a.data == out_data)
                gk = g
            else:
                ref = out_data if keepdims else np.expand_dims(out_data, axis)
                mask = (a.data == ref)
                gk = g if keepdims else np.expand_dims(g, axis)
            # ties share the gradient equally
            counts = mask.sum(axis=axis, keepdims=True) if axis is not None else mask.sum()
            a._accum(mask * (gk / counts))

        out._backward = back
        return out

    # -- elementwise ---------------------------------------------------

    def exp(self):
        a = self
        out_data = np.exp(a.data)
        out = Tensor(out_data, _parents=(a,))
        out._backward = lambda g: a._accum(g * out_data) if a.requires_grad else None
        return out

    def log(self):
        a = self
        out = Tensor(np.log(a.data), _parents=(a,))
        out._backward = lambda g: a._accum(g / a.data) if a.requires_grad else None
        return out

    def tanh(self):
        a = self
        out_data = np.tanh(a.data)
        out = Tensor(out_data, _parents=(a,))
        out._backward = lambda g: a._accum(g * (1.0 - out_data * out_data)) if a.requires_grad else None
        return out

    def relu(self):
        a = self
        out = Tensor(np.maximum(a.data, 0.0), _parents=(a,))
        out._backward = lambda g: a._accum(g * (a.data > 0)) if a.requires_grad else None
        return out

    def sqrt(self):
        a = self
        out_data = np.sqrt(a.data)
        out = Tensor(out_data, _parents=(a,))
        out._backward = lambda g: a._accum(g * 0.5 / out_data) if a.requires_grad else None
        return out


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def parameter(data, rng=None, scale=None, dtype=np.float32) -> Tensor:
    """Trainable tensor. With `rng` and `scale`, Gaussian-initialized."""
    if rng is not None:
        data = (rng.standard_normal(data) * scale).astype(dtype)
    else:
        data = np.asarray(data, dtype=dtype)
    return Tensor(data, requires_grad=True)


def concat(tensors, axis=0) -> Tensor:
    parts = [as_tensor(t) for t in tensors]
    out = Tensor(np.concatenate([p.data for p in parts], axis=axis), _parents=tuple(parts))
    sizes = [p.data.shape[axis] for p in parts]
    offsets = np.cumsum([0] + sizes)

    def back(g):
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            if p.requires_grad:
                sl = [slice(None)] * g.ndim
                sl[axis] = slice(lo, hi)
                p._accum(g[tuple(sl)])

    out._backward = back
    return out


def stack(tensors, axis=0) -> Tensor:
    parts = [as_tensor(t) for t in tensors]
    out = Tensor(np.stack([p.data for p in parts], axis=axis), _parents=tuple(parts))

    def back(g):
        for i, p in enumerate(parts):
            if p.requires_grad:
                p._accum(np.take(g, i, axis=axis))

    out._backward = back
    return out


def scatter_sum(x: Tensor, index: np.ndarray, n: int) -> Tensor:
    """out[i] = sum of x rows j with index[j] == i, for i in 0..n-1."""
    x = as_tensor(x)
    index = np.asarray(index, dtype=np.intp)
    out_data = np.zeros((n,) + x.data.shape[1:], dtype=x.data.dtype)
    np.add.at(out_data, index, x.data)
    out = Tensor(out_data, _parents=(x,))
    out._backward = lambda g: x._accum(g[index]) if x.requires_grad else None
    return out


def where(mask: np.ndarray, a, b) -> Tensor:
    """Elementwise select with a constant boolean mask."""
    a, b = as_tensor(a), as_tensor(b)
    mask = np.asarray(mask, dtype=bool)
    out = Tensor(np.where(mask, a.data, b.data), _parents=(a, b))

    def back(g):
        if a.requires_grad:
            a._accum(_unbroadcast(np.where(mask, g, 0.0), a.data.shape))
        if b.requires_grad:
            b._accum(_unbroadcast(np.where(mask, 0.0, g), b.data.shape))

    out._backward = back
    return out


def logsumexp(x: Tensor, axis=-1, keepdims=False) -> Tensor:
    """Max-shifted log-sum-exp; the shift is treated as a constant,
    which gives exactly the softmax gradient."""
    x = as_tensor(x)
    m = np.max(x.data, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    shifted = x - Tensor(m)
    s = shifted.exp().sum(axis=axis, keepdims=True).log() + Tensor(m)
    if not keepdims:
        s = s.reshape(np.squeeze(s.data, axis=axis).shape)
    return s


def softmax(x: Tensor, axis=-1) -> Tensor:
    return (x - logsumexp(x, axis=axis, keepdims=True)).exp()


def l2_normalize(x: Tensor) -> Tensor:
    """x / ||x||, with the all-zero vector passed through unchanged."""
    x = as_tensor(x)
    n2 = (x * x).sum()
    if float(n2.data) == 0.0:
        return x
    return x / n2.sqrt()


def check_gradients(f, tensors, step=1e-4, probes=3, rng=None, rtol=1e-3):
    """Compare analytic gradients of scalar f(*) against central
    finite differences on `probes` random coordinates per tensor.

    A coordinate whose central differences at `step` and `step/2`
    disagree is skipped: the difference quotient has not converged
    there (a relu kink inside the stencil), so it says nothing about
    the analytic gradient. Returns the worst relative error seen and
    raises AssertionError when the tolerance is exceeded.
    """
    rng = rng or np.random.default_rng(0)
    for t in tensors:
        t.zero_grad()
    out = f()
    out.backward()
    worst = 0.0

    def central(flat, c, h):
        orig = flat[c]
        flat[c] = orig + h
        f_hi = float(f().data)
        flat[c] = orig - h
        f_lo = float(f().data)
        flat[c] = orig
        return (f_hi - f_lo) / (2.0 * h)

    for t in tensors:
        grad = t.grad if t.grad is not None else np.zeros_like(t.data)
        flat = t.data.reshape(-1)
        gflat = np.asarray(grad).reshape(-1)
        k = min(probes, flat.size)
        coords = rng.choice(flat.size, size=k, replace=False)
        for c in coords:
            numeric = central(flat, c, step)
            refined = central(flat, c, step / 2.0)
            if abs(numeric - refined) > rtol * max(abs(numeric), abs(refined), 1e-8):
                continue
            analytic = float(gflat[c])
            denom = max(abs(refined), abs(analytic))
            if denom < 1e-8:
                continue
            err = abs(refined - analytic) / denom
            worst = max(worst, err)
            if err >= rtol:
                raise AssertionError(
                    f"gradient mismatch: analytic={analytic:.6g} numeric={refined:.6g} rel_err={err:.3g}"
                )
    return worst
