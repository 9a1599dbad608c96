"""Dense float64 tensors with define-by-run reverse-mode differentiation.

Every trainable computation in the package is built from the primitives in
this module.  Conventions:

* all values are float64; non-finite values are rejected at construction and
  after every primitive (NaN/Inf anywhere raises :class:`NumericError`),
* the graph is rebuilt on every forward pass; ``backward`` walks it once in
  reverse topological order and never mutates forward values,
* forward matmul/conv kernels go through ``np.einsum(optimize=False)``, whose
  per-element reduction order does not depend on the number of rows.  This
  makes every frame-wise output bit-identical between a full-sequence pass
  and an incremental pass over the same prefix, which the streaming cache
  and the causality audits rely on.  Backward passes have no such
  requirement and use BLAS.
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np

from ..errors import ContractError, DimensionError, NumericError

# Finite stand-in for -inf in masked attention / log-domain DP.  Small enough
# that exp() underflows to exactly 0.0, large enough magnitude that adding any
# desk-scale score to it is absorbed bit-exactly.
NEG_LARGE = -1.0e30

_grad_enabled = True


@contextmanager
def inference_mode():
    """Disable graph construction inside the block (forward values only)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


def _check_finite(arr: np.ndarray, op: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite values produced by {op}")


class Tensor:
    """A node in the differentiation graph.

    ``data`` is an ndarray of float64; ``grad`` is populated by ``backward``
    for nodes with ``requires_grad``.  Operation records are the closures in
    ``_backward`` plus the ``_parents`` links; the graph is acyclic because
    nodes only ever reference previously constructed nodes.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "name")

    def __init__(self, data, requires_grad=False, _parents=(), _backward=None, name=""):
        self.data = np.asarray(data, dtype=np.float64)
        _check_finite(self.data, name or "tensor")
        self.requires_grad = bool(requires_grad) and _grad_enabled
        self.grad = None
        self._parents = _parents if self.requires_grad else ()
        self._backward = _backward if self.requires_grad else None
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False, name=self.name)

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError("item() requires a scalar tensor")
        return float(self.data.reshape(()))

    def zero_grad(self) -> None:
        self.grad = None

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    # -- operator sugar -------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return mul(self, -1.0)

    def __sub__(self, other):
        return add(self, mul(other, -1.0) if isinstance(other, Tensor) else -other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __repr__(self):
        return f"Tensor(shape={tuple(self.shape)}, grad={self.requires_grad}, name={self.name!r})"


def tensor(data, requires_grad=False, name="") -> Tensor:
    return Tensor(data, requires_grad=requires_grad, name=name)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _wants_grad(*ts: Tensor) -> bool:
    return _grad_enabled and any(t.requires_grad for t in ts)


def topo_order(root: Tensor) -> list[Tensor]:
    """Nodes reachable from ``root`` in topological order (parents first)."""
    order: list[Tensor] = []
    seen: set[int] = set()
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
        for p in node._parents:
            if id(p) not in seen:
                stack.append((p, False))
    return order


def backward(loss: Tensor) -> None:
    """Populate ``grad`` on every reachable tensor with ``requires_grad``.

    ``loss`` must be scalar.  Forward values are left untouched.
    """
    if loss.data.size != 1:
        raise ContractError(f"backward requires a scalar loss, got shape {tuple(loss.shape)}")
    if not loss.requires_grad:
        return  # constant loss: nothing to do
    order = topo_order(loss)
    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)


# ---------------------------------------------------------------------------
# numpy kernels (shared by the graph ops and by inference-only fast paths)
# ---------------------------------------------------------------------------

def matmul_np(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # einsum w/o optimization: per-element reduction order fixed by k only,
    # hence bit-stable under row-slicing of `a` (BLAS gemm is not).
    return np.einsum("ik,kj->ij", a, b, optimize=False)


def softmax_np(x: np.ndarray) -> np.ndarray:
    m = np.max(x, axis=-1, keepdims=True)
    e = np.exp(x - m)
    return e / np.sum(e, axis=-1, keepdims=True)


def log_softmax_np(x: np.ndarray) -> np.ndarray:
    m = np.max(x, axis=-1, keepdims=True)
    s = x - m
    return s - np.log(np.sum(np.exp(s), axis=-1, keepdims=True))


def layer_norm_np(x: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    mu = np.mean(x, axis=-1, keepdims=True)
    var = np.mean((x - mu) ** 2, axis=-1, keepdims=True)
    return (x - mu) / np.sqrt(var + eps)


def conv1d_windows(x: np.ndarray, k: int, causal: bool) -> np.ndarray:
    """Sliding windows over axis 0 with conv padding applied.

    Returns shape (T, Cin, k): windows[t, c, j] = xpad[t + j, c].
    """
    if causal:
        pad = ((k - 1, 0), (0, 0))
    else:
        half = (k - 1) // 2
        pad = ((half, half), (0, 0))
    xpad = np.pad(x, pad)
    return np.lib.stride_tricks.sliding_window_view(xpad, k, axis=0)


def conv1d_np(x: np.ndarray, w: np.ndarray, b: np.ndarray | None, causal: bool) -> np.ndarray:
    win = conv1d_windows(x, w.shape[0], causal)
    out = np.einsum("tcj,jco->to", win, w, optimize=False)
    if b is not None:
        out = out + b
    return out


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------

def _broadcast_ok(a: np.ndarray, b: np.ndarray) -> bool:
    if a.shape == b.shape:
        return True
    if b.ndim == 0 or a.ndim == 0:
        return True
    # allow (..., D) op (D,)
    return b.ndim == 1 and a.ndim >= 1 and a.shape[-1] == b.shape[0]


def _reduce_to_shape(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum gradient over axes that were broadcast."""
    if g.shape == shape:
        return g
    if shape == ():
        return np.sum(g).reshape(())
    # (D,) broadcast against (..., D)
    return np.sum(g.reshape(-1, shape[0]), axis=0)


def add(a, b) -> Tensor:
    a = _as_tensor(a)
    b = _as_tensor(b)
    if not (_broadcast_ok(a.data, b.data) or _broadcast_ok(b.data, a.data)):
        raise DimensionError(f"add: incompatible shapes {a.shape} and {b.shape}")
    out_data = a.data + b.data
    _check_finite(out_data, "add")
    if not _wants_grad(a, b):
        return Tensor(out_data)

    def _bwd(g):
        if a.requires_grad:
            a._accumulate(_reduce_to_shape(g, a.data.shape))
        if b.requires_grad:
            b._accumulate(_reduce_to_shape(g, b.data.shape))

    return Tensor(out_data, True, (a, b), _bwd, "add")


def mul(a, b) -> Tensor:
    a = _as_tensor(a)
    b = _as_tensor(b)
    if not (_broadcast_ok(a.data, b.data) or _broadcast_ok(b.data, a.data)):
        raise DimensionError(f"mul: incompatible shapes {a.shape} and {b.shape}")
    out_data = a.data * b.data
    _check_finite(out_data, "mul")
    if not _wants_grad(a, b):
        return Tensor(out_data)

    def _bwd(g):
        if a.requires_grad:
            a._accumulate(_reduce_to_shape(g * b.data, a.data.shape))
        if b.requires_grad:
            b._accumulate(_reduce_to_shape(g * a.data, b.data.shape))

    return Tensor(out_data, True, (a, b), _bwd, "mul")


def matmul(a, b) -> Tensor:
    a = _as_tensor(a)
    b = _as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.data.shape[1] != b.data.shape[0]:
        raise DimensionError(f"matmul: incompatible shapes {a.shape} and {b.shape}")
    out_data = matmul_np(a.data, b.data)
    _check_finite(out_data, "matmul")
    if not _wants_grad(a, b):
        return Tensor(out_data)

    def _bwd(g):
        if a.requires_grad:
            a._accumulate(g @ b.data.T)
        if b.requires_grad:
            b._accumulate(a.data.T @ g)

    return Tensor(out_data, True, (a, b), _bwd, "matmul")


def transpose(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    if a.data.ndim != 2:
        raise DimensionError(f"transpose: expected 2-D, got {a.shape}")
    out_data = a.data.T.copy()
    if not _wants_grad(a):
        return Tensor(out_data)

    def _bwd(g):
        a._accumulate(g.T)

    return Tensor(out_data, True, (a,), _bwd, "transpose")


def relu(a) -> Tensor:
    a = _as_tensor(a)
    out_data = np.maximum(a.data, 0.0)
    if not _wants_grad(a):
        return Tensor(out_data)

    def _bwd(g):
        a._accumulate(g * (a.data > 0.0))

    return Tensor(out_data, True, (a,), _bwd, "relu")


def softmax(a) -> Tensor:
    a = _as_tensor(a)
    s = softmax_np(a.data)
    _check_finite(s, "softmax")
    if not _wants_grad(a):
        return Tensor(s)

    def _bwd(g):
        dot = np.sum(g * s, axis=-1, keepdims=True)
        a._accumulate(s * (g - dot))

    return Tensor(s, True, (a,), _bwd, "softmax")


def log_softmax(a) -> Tensor:
    a = _as_tensor(a)
    out_data = log_softmax_np(a.data)
    _check_finite(out_data, "log_softmax")
    if not _wants_grad(a):
        return Tensor(out_data)

    def _bwd(g):
        p = np.exp(out_data)
        a._accumulate(g - p * np.sum(g, axis=-1, keepdims=True))

    return Tensor(out_data, True, (a,), _bwd, "log_softmax")


def layer_norm(a, eps: float = 1e-5) -> Tensor:
    a = _as_tensor(a)
    x = a.data
    mu = np.mean(x, axis=-1, keepdims=True)
    xc = x - mu
    var = np.mean(xc * xc, axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    out_data = xc * inv
    _check_finite(out_data, "layer_norm")
    if not _wants_grad(a):
        return Tensor(out_data)

    def _bwd(g):
        # dL/dx = (g - mean(g) - y * mean(g*y)) / sigma, means over the last axis
        gm = np.mean(g, axis=-1, keepdims=True)
        gym = np.mean(g * out_data, axis=-1, keepdims=True)
        a._accumulate((g - gm - out_data * gym) * inv)

    return Tensor(out_data, True, (a,), _bwd, "layer_norm")


def conv1d(x, w, b=None, causal: bool = True) -> Tensor:
    """1-D convolution over axis 0.  x: (T, Cin), w: (k, Cin, Cout), b: (Cout,).

    ``causal`` left-pads with k-1 zeros so output frame t sees inputs <= t;
    otherwise same-padding is used (k must be odd).
    """
    x = _as_tensor(x)
    w = _as_tensor(w)
    bt = _as_tensor(b) if b is not None else None
    if x.data.ndim != 2 or w.data.ndim != 3 or x.data.shape[1] != w.data.shape[1]:
        raise DimensionError(f"conv1d: incompatible shapes x{x.shape} w{w.shape}")
    k = w.data.shape[0]
    if not causal and k % 2 == 0:
        raise DimensionError(f"conv1d: same-padding needs odd kernel, got {k}")
    win = conv1d_windows(x.data, k, causal)
    out_data = np.einsum("tcj,jco->to", win, w.data, optimize=False)
    if bt is not None:
        out_data = out_data + bt.data
    _check_finite(out_data, "conv1d")
    parents = (x, w) if bt is None else (x, w, bt)
    if not _wants_grad(*parents):
        return Tensor(out_data)

    def _bwd(g):
        T = x.data.shape[0]
        if w.requires_grad:
            w._accumulate(np.einsum("tcj,to->jco", win, g, optimize=False))
        if bt is not None and bt.requires_grad:
            bt._accumulate(np.sum(g, axis=0))
        if x.requires_grad:
            pad_left = k - 1 if causal else (k - 1) // 2
            gx_pad = np.zeros((T + k - 1, x.data.shape[1]))
            for j in range(k):
                gx_pad[j : j + T] += g @ w.data[j].T
            x._accumulate(gx_pad[pad_left : pad_left + T])

    return Tensor(out_data, True, parents, _bwd, "conv1d")


def embed(table, ids) -> Tensor:
    """Row lookup: table (N, D), ids int array (L,) -> (L, D)."""
    table = _as_tensor(table)
    ids = np.asarray(ids, dtype=np.int64)
    if table.data.ndim != 2 or ids.ndim != 1:
        raise DimensionError(f"embed: table {table.shape}, ids {ids.shape}")
    if ids.size and (ids.min() < 0 or ids.max() >= table.data.shape[0]):
        raise DimensionError("embed: id out of range")
    out_data = table.data[ids]
    if not _wants_grad(table):
        return Tensor(out_data)

    def _bwd(g):
        gt = np.zeros_like(table.data)
        np.add.at(gt, ids, g)
        table._accumulate(gt)

    return Tensor(out_data, True, (table,), _bwd, "embed")


def concat(tensors, axis: int = 0) -> Tensor:
    ts = [_as_tensor(t) for t in tensors]
    if not ts:
        raise DimensionError("concat: empty input list")
    out_data = np.concatenate([t.data for t in ts], axis=axis)
    if not _wants_grad(*ts):
        return Tensor(out_data)
    sizes = [t.data.shape[axis] for t in ts]
    offsets = np.cumsum([0] + sizes)

    def _bwd(g):
        for t, lo, hi in zip(ts, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                idx = [slice(None)] * g.ndim
                idx[axis] = slice(lo, hi)
                t._accumulate(g[tuple(idx)])

    return Tensor(out_data, True, tuple(ts), _bwd, "concat")


def narrow(a, axis: int, start: int, length: int) -> Tensor:
    """Contiguous slice [start, start+length) along ``axis``."""
    a = _as_tensor(a)
    if start < 0 or length < 0 or start + length > a.data.shape[axis]:
        raise DimensionError(
            f"narrow: [{start}:{start + length}) out of range for axis {axis} of {a.shape}"
        )
    idx = [slice(None)] * a.data.ndim
    idx[axis] = slice(start, start + length)
    out_data = a.data[tuple(idx)].copy()
    if not _wants_grad(a):
        return Tensor(out_data)

    def _bwd(g):
        ga = np.zeros_like(a.data)
        ga[tuple(idx)] = g
        a._accumulate(ga)

    return Tensor(out_data, True, (a,), _bwd, "narrow")


def pick(a, ids) -> Tensor:
    """Per-row gather: a (T, C), ids (T,) -> (T,) with out[t] = a[t, ids[t]]."""
    a = _as_tensor(a)
    ids = np.asarray(ids, dtype=np.int64)
    if a.data.ndim != 2 or ids.shape != (a.data.shape[0],):
        raise DimensionError(f"pick: a {a.shape}, ids {ids.shape}")
    if ids.size and (ids.min() < 0 or ids.max() >= a.data.shape[1]):
        raise DimensionError("pick: id out of range")
    rows = np.arange(a.data.shape[0])
    out_data = a.data[rows, ids]
    if not _wants_grad(a):
        return Tensor(out_data)

    def _bwd(g):
        ga = np.zeros_like(a.data)
        np.add.at(ga, (rows, ids), g)
        a._accumulate(ga)

    return Tensor(out_data, True, (a,), _bwd, "pick")


def sum_(a) -> Tensor:
    a = _as_tensor(a)
    out_data = np.sum(a.data).reshape(())
    if not _wants_grad(a):
        return Tensor(out_data)

    def _bwd(g):
        a._accumulate(np.broadcast_to(g, a.data.shape).copy())

    return Tensor(out_data, True, (a,), _bwd, "sum")


def mean_(a) -> Tensor:
    a = _as_tensor(a)
    n = a.data.size
    out_data = (np.sum(a.data) / n).reshape(())
    if not _wants_grad(a):
        return Tensor(out_data)

    def _bwd(g):
        a._accumulate(np.broadcast_to(g / n, a.data.shape).copy())

    return Tensor(out_data, True, (a,), _bwd, "mean")
