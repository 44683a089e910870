"""Dense-tensor reverse-mode autodiff, Adam, and WMCK checkpoints.

The graph is recorded dynamically as ops execute (the forward pass is the
tape).  backward() walks the recorded graph once in reverse topological
order and adds this pass's gradients into .grad, so repeated backward
calls accumulate exactly (callers zero between optimizer steps).

All computation is float64.  Broadcasting is supported for elementwise
ops; matmul follows numpy matmul semantics on >=2-D operands.
"""

from __future__ import annotations

import struct

import numpy as np

from ._kernels import dwt2_batch, idwt2_batch
from .errors import (
    CheckpointError,
    NonScalarLoss,
    ShapeMismatch,
    TargetOutOfRange,
)

CHECKPOINT_MAGIC = b"WMCK"


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to `shape`."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (gs, s) in enumerate(zip(g.shape, shape)) if s == 1 and gs != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


class Tensor:
    """N-dimensional float64 array participating in the gradient graph."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward_fn")

    def __init__(self, data, requires_grad=False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad = None
        self._parents: tuple[Tensor, ...] = ()
        self._backward_fn = None

    @property
    def shape(self):
        return self.data.shape

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # --- graph construction -------------------------------------------------

    @staticmethod
    def _result(data, parents, backward_fn):
        out = Tensor(data)
        if any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = tuple(parents)
            out._backward_fn = backward_fn
        return out

    # --- reverse pass -------------------------------------------------------

    def backward(self):
        if self.data.size != 1:
            raise NonScalarLoss(f"loss must be scalar, got shape {self.data.shape}")
        topo: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in visited:
                    stack.append((parent, False))
        flowing: dict[int, np.ndarray] = {id(self): np.ones_like(self.data)}
        for node in reversed(topo):
            g = flowing.pop(id(node), None)
            if g is None:
                continue
            if node.requires_grad:
                if node.grad is None:
                    node.grad = np.zeros_like(node.data)
                node.grad += g
            if node._backward_fn is None:
                continue
            for parent, pg in zip(node._parents, node._backward_fn(g)):
                if pg is None or not parent.requires_grad:
                    continue
                acc = flowing.get(id(parent))
                flowing[id(parent)] = pg if acc is None else acc + pg

    # --- operators ----------------------------------------------------------

    @staticmethod
    def _lift(x) -> "Tensor":
        return x if isinstance(x, Tensor) else Tensor(x)

    def __add__(self, other):
        other = self._lift(other)
        data = self.data + other.data
        return self._result(
            data,
            (self, other),
            lambda g: (_unbroadcast(g, self.shape), _unbroadcast(g, other.shape)),
        )

    __radd__ = __add__

    def __neg__(self):
        return self._result(-self.data, (self,), lambda g: (-g,))

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, other):
        other = self._lift(other)
        data = self.data * other.data
        return self._result(
            data,
            (self, other),
            lambda g: (
                _unbroadcast(g * other.data, self.shape),
                _unbroadcast(g * self.data, other.shape),
            ),
        )

    __rmul__ = __mul__

    def __matmul__(self, other):
        return matmul(self, self._lift(other))

    def __getitem__(self, idx):
        data = self.data[idx]

        def backward_fn(g):
            ga = np.zeros_like(self.data)
            ga[idx] += g
            return (ga,)

        return self._result(data, (self,), backward_fn)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        old = self.shape
        return self._result(
            self.data.reshape(shape), (self,), lambda g: (g.reshape(old),)
        )

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        inv = np.argsort(axes)
        return self._result(
            self.data.transpose(axes), (self,), lambda g: (g.transpose(inv),)
        )

    def sum(self, axis=None, keepdims=False):
        data = self.data.sum(axis=axis, keepdims=keepdims)

        def backward_fn(g):
            if axis is None:
                return (np.broadcast_to(g, self.shape).copy(),)
            gg = g if keepdims else np.expand_dims(g, axis)
            return (np.broadcast_to(gg, self.shape).copy(),)

        return self._result(data, (self,), backward_fn)

    def mean(self, axis=None, keepdims=False):
        if axis is None:
            count = self.data.size
        else:
            count = self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim < 2 or b.data.ndim < 2:
        raise ShapeMismatch("matmul operands must be at least 2-D")
    if a.data.shape[-1] != b.data.shape[-2]:
        raise ShapeMismatch(f"inner dims differ: {a.shape} @ {b.shape}")
    data = np.matmul(a.data, b.data)

    def backward_fn(g):
        ga = _unbroadcast(np.matmul(g, np.swapaxes(b.data, -1, -2)), a.shape)
        gb = _unbroadcast(np.matmul(np.swapaxes(a.data, -1, -2), g), b.shape)
        return ga, gb

    return Tensor._result(data, (a, b), backward_fn)


def concat(tensors: list[Tensor], axis: int = -1) -> Tensor:
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum(sizes)[:-1]

    def backward_fn(g):
        return tuple(np.split(g, offsets, axis=axis))

    return Tensor._result(data, tuple(tensors), backward_fn)


def sigmoid(x: Tensor) -> Tensor:
    xd = x.data
    y = np.where(xd >= 0, 1.0 / (1.0 + np.exp(-np.abs(xd))), np.exp(-np.abs(xd)) / (1.0 + np.exp(-np.abs(xd))))
    return Tensor._result(y, (x,), lambda g: (g * y * (1.0 - y),))


def relu(x: Tensor) -> Tensor:
    y = np.maximum(x.data, 0.0)
    mask = x.data > 0  # subgradient at 0 is 0
    return Tensor._result(y, (x,), lambda g: (g * mask,))


def dropout(x: Tensor, rate: float, training: bool, rng: np.random.Generator) -> Tensor:
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return x
    mask = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return x * Tensor(mask)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Plain numpy softmax over the last axis (inference helper)."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits: Tensor, targets) -> Tensor:
    """Mean over the batch of -log softmax(logits)[target]."""
    targets = np.asarray(targets, dtype=np.int64)
    if logits.data.ndim != 2:
        raise ShapeMismatch(f"logits must be (batch, K), got {logits.shape}")
    batch, k = logits.data.shape
    if targets.shape != (batch,):
        raise ShapeMismatch(f"targets must have shape ({batch},), got {targets.shape}")
    if targets.min(initial=0) < 0 or targets.max(initial=0) >= k:
        raise TargetOutOfRange(f"targets must lie in [0, {k})")
    z = logits.data - logits.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1, keepdims=True))
    logp = z - lse
    loss = -logp[np.arange(batch), targets].mean()

    def backward_fn(g):
        grad = np.exp(logp)
        grad[np.arange(batch), targets] -= 1.0
        return (g * grad / batch,)

    return Tensor._result(np.float64(loss), (logits,), backward_fn)


def sigmoid_binary_cross_entropy(logits: Tensor, targets) -> Tensor:
    """Mean elementwise BCE of sigmoid(logits) against a one-hot target matrix.

    Fidelity option for the sigmoid classification head.
    """
    targets = np.asarray(targets, dtype=np.int64)
    batch, k = logits.data.shape
    onehot = np.zeros((batch, k))
    onehot[np.arange(batch), targets] = 1.0
    z = logits.data
    # log(1 + e^-|z|) stable form
    loss = np.maximum(z, 0.0) - z * onehot + np.log1p(np.exp(-np.abs(z)))

    def backward_fn(g):
        s = 1.0 / (1.0 + np.exp(-z))
        return (g * (s - onehot) / loss.size,)

    return Tensor._result(np.float64(loss.mean()), (logits,), backward_fn)


def l2_penalty(w: Tensor, coeff: float) -> Tensor:
    if coeff < 0:
        raise ValueError(f"penalty coefficient must be >= 0, got {coeff}")
    value = coeff * np.sum(w.data * w.data)
    return Tensor._result(np.float64(value), (w,), lambda g: (g * 2.0 * coeff * w.data,))


def haar_subbands(volume: Tensor) -> Tensor:
    """Batched per-band single-level Haar analysis of (B, P, P, C) volumes.

    Returns (B, P/2, P/2, 4C) with channel blocks [ll, lh, hl, hh].  The
    transform is orthonormal, so the backward pass is the synthesis
    kernel applied to the incoming gradient.
    """
    b, p, q, c = volume.data.shape
    if p % 2 or q % 2:
        raise ShapeMismatch(f"Haar analysis needs even sides, got {volume.shape}")

    def analyze(arr):
        planes = np.ascontiguousarray(arr.transpose(0, 3, 1, 2)).reshape(b * c, p, q)
        sb = dwt2_batch(planes).reshape(b, c, 4, p // 2, q // 2)
        return np.ascontiguousarray(sb.transpose(0, 3, 4, 2, 1)).reshape(
            b, p // 2, q // 2, 4 * c
        )

    def backward_fn(g):
        sb = g.reshape(b, p // 2, q // 2, 4, c).transpose(0, 4, 3, 1, 2)
        planes = idwt2_batch(np.ascontiguousarray(sb).reshape(b * c, 4, p // 2, q // 2))
        return (
            np.ascontiguousarray(
                planes.reshape(b, c, p, q).transpose(0, 2, 3, 1)
            ),
        )

    return Tensor._result(analyze(volume.data), (volume,), backward_fn)


# --- optimizer --------------------------------------------------------------


class Adam:
    """Bias-corrected Adam over a name -> Tensor parameter dict."""

    def __init__(self, params: dict[str, Tensor], lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in params.items()}

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()

    def step(self):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for name, p in self.params.items():
            if p.grad is None:
                continue
            if p.grad.shape != p.data.shape:
                raise ShapeMismatch(f"grad shape {p.grad.shape} != param {p.data.shape}")
            m = self.m[name]
            v = self.v[name]
            m *= b1
            m += (1 - b1) * p.grad
            v *= b2
            v += (1 - b2) * p.grad * p.grad
            m_hat = m / (1 - b1**self.t)
            v_hat = v / (1 - b2**self.t)
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


# --- checkpoints ------------------------------------------------------------


def save_checkpoint(params: dict[str, Tensor], path) -> None:
    """WMCK format: magic, u32 count, then per tensor u32 name length,
    name bytes, u32 rank, u32 dims, float64 payload (all little-endian)."""
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", len(params)))
        for name, tensor in params.items():
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<I", tensor.data.ndim))
            fh.write(struct.pack(f"<{tensor.data.ndim}I", *tensor.data.shape))
            fh.write(tensor.data.astype("<f8").tobytes())


def load_checkpoint(path) -> dict[str, np.ndarray]:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise CheckpointError(str(exc)) from exc
    if raw[:4] != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path}: WMCK magic missing")
    try:
        (count,) = struct.unpack_from("<I", raw, 4)
        offset = 8
        out: dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = struct.unpack_from("<I", raw, offset)
            offset += 4
            name = raw[offset : offset + name_len].decode("utf-8")
            offset += name_len
            (rank,) = struct.unpack_from("<I", raw, offset)
            offset += 4
            dims = struct.unpack_from(f"<{rank}I", raw, offset)
            offset += 4 * rank
            size = int(np.prod(dims)) if rank else 1
            values = np.frombuffer(raw, dtype="<f8", count=size, offset=offset)
            offset += 8 * size
            out[name] = values.astype(np.float64).reshape(dims)
        if offset != len(raw):
            raise CheckpointError(f"{path}: {len(raw) - offset} trailing bytes")
    except (struct.error, ValueError) as exc:
        raise CheckpointError(f"{path}: WMCK payload truncated or corrupt") from exc
    return out
