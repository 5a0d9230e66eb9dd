"""Dense 2-D tensors with reverse-mode automatic differentiation.

Everything is a (rows, cols) float matrix; scalars are 1x1. Each operation
records its inputs and a backward rule on the result node, so calling
``backward()`` on a scalar loss walks the recorded graph once in reverse
execution order and adds adjoints into ``grad`` buffers. Gradients
accumulate until ``zero_grad``; a second backward pass doubles them.

Every operation validates that its result is finite and raises
NonFiniteError otherwise, so NaN/Inf never propagate silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr

from .errors import NonFiniteError, ShapeError

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class Tensor:
    __slots__ = ("data", "grad", "_parents", "_backward")

    def __init__(self, data, dtype=None, _parents=(), _backward=None):
        arr = np.asarray(data, dtype=dtype)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            arr = arr.reshape(1, -1)
        elif arr.ndim != 2:
            raise ShapeError(f"tensors are 2-D matrices, got shape {arr.shape}")
        if not np.issubdtype(arr.dtype, np.floating):
            arr = arr.astype(np.float64)
        if not np.isfinite(arr).all():
            raise NonFiniteError("tensor contains NaN or Inf")
        self.data = arr
        self.grad: np.ndarray | None = None
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a 1x1 tensor, got {self.shape}")
        return float(self.data[0, 0])

    def zero_grad(self):
        self.grad = None

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)

    def __add__(self, other: "Tensor") -> "Tensor":
        return add(self, other)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype})"

    def backward(self):
        """Accumulate d(self)/d(node) into every reachable node's grad."""
        if self.data.size != 1:
            raise ShapeError("backward() needs a scalar (1x1) loss tensor")
        order = _topo_order(self)
        adjoint = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            g = adjoint.pop(id(node), None)
            if g is None:
                continue
            if node.grad is None:
                node.grad = np.zeros_like(node.data)
            node.grad += g
            if node._backward is None:
                continue
            for parent, pg in node._backward(g):
                pid = id(parent)
                acc = adjoint.get(pid)
                adjoint[pid] = pg if acc is None else acc + pg


def _topo_order(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, emitted = stack.pop()
        if emitted:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in seen:
                stack.append((parent, False))
    return order


def _result(data: np.ndarray, parents, backward) -> Tensor:
    if not np.isfinite(data).all():
        raise NonFiniteError("operation produced NaN or Inf")
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out._parents = parents
    out._backward = backward
    return out


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    out_data = a.data @ b.data

    def backward(g):
        return [(a, g @ b.data.T), (b, a.data.T @ g)]

    return _result(out_data, (a, b), backward)


def transpose(a: Tensor) -> Tensor:
    def backward(g):
        return [(a, g.T)]

    return _result(a.data.T.copy(), (a,), backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError(f"add shape mismatch: {a.shape} vs {b.shape}")

    def backward(g):
        return [(a, g), (b, g)]

    return _result(a.data + b.data, (a, b), backward)


def add_bias(x: Tensor, b: Tensor) -> Tensor:
    """Add a (1, cols) row vector to every row of x."""
    if b.shape != (1, x.shape[1]):
        raise ShapeError(f"bias shape {b.shape} does not match columns of {x.shape}")

    def backward(g):
        return [(x, g), (b, g.sum(axis=0, keepdims=True))]

    return _result(x.data + b.data, (x, b), backward)


def affine(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    out = matmul(x, w)
    return out if b is None else add_bias(out, b)


def scale(a: Tensor, c: float) -> Tensor:
    def backward(g):
        return [(a, g * c)]

    return _result(a.data * c, (a,), backward)


def mul_mask(a: Tensor, mask: np.ndarray) -> Tensor:
    """Elementwise multiply by a constant (non-differentiated) mask."""
    mask = np.asarray(mask, dtype=a.data.dtype)

    def backward(g):
        return [(a, g * mask)]

    return _result(a.data * mask, (a,), backward)


def softmax_rows(a: Tensor, k: int) -> Tensor:
    """Row softmax over the first k columns of the first k rows.

    Masked columns get weight exactly 0; rows beyond k come out all-zero.
    """
    rows, cols = a.shape
    if k < 1:
        raise ValueError("active count k must be >= 1")
    if k > rows or k > cols:
        raise ShapeError(f"active count {k} exceeds matrix shape {a.shape}")
    active = a.data[:k, :k]
    shifted = active - active.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    out_data = np.zeros_like(a.data)
    out_data[:k, :k] = exp / exp.sum(axis=1, keepdims=True)

    def backward(g):
        ga = g[:k, :k]
        ya = out_data[:k, :k]
        dx = np.zeros_like(a.data)
        dx[:k, :k] = ya * (ga - (ga * ya).sum(axis=1, keepdims=True))
        return [(a, dx)]

    return _result(out_data, (a,), backward)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Per-row normalization with population variance, then gain and bias."""
    d = x.shape[1]
    if gain.shape != (1, d) or bias.shape != (1, d):
        raise ShapeError(
            f"layer_norm gain/bias must be (1, {d}), got {gain.shape}/{bias.shape}"
        )
    if eps <= 0:
        raise ValueError("eps must be > 0")
    mu = x.data.mean(axis=1, keepdims=True)
    var = x.data.var(axis=1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    out_data = xhat * gain.data + bias.data

    def backward(g):
        dgain = (g * xhat).sum(axis=0, keepdims=True)
        dbias = g.sum(axis=0, keepdims=True)
        dxhat = g * gain.data
        dx = inv * (
            dxhat
            - dxhat.mean(axis=1, keepdims=True)
            - xhat * (dxhat * xhat).mean(axis=1, keepdims=True)
        )
        return [(x, dx), (gain, dgain), (bias, dbias)]

    return _result(out_data, (x, gain, bias), backward)


def gelu(x: Tensor) -> Tensor:
    """Exact GELU: x * Phi(x) with the Gaussian CDF, not the tanh fit."""
    phi = ndtr(x.data).astype(x.data.dtype)
    out_data = x.data * phi

    def backward(g):
        pdf = np.exp(-0.5 * x.data * x.data) * _INV_SQRT_2PI
        return [(x, g * (phi + x.data * pdf))]

    return _result(out_data, (x,), backward)


def tanh_act(x: Tensor) -> Tensor:
    out_data = np.tanh(x.data)

    def backward(g):
        return [(x, g * (1.0 - out_data * out_data))]

    return _result(out_data, (x,), backward)


def dropout(
    x: Tensor, rate: float, train_mode: bool, rng: np.random.Generator | None = None
) -> Tensor:
    """Inverted dropout: identity in eval mode, survivors scaled by 1/(1-rate)."""
    if not 0.0 <= rate < 1.0:
        raise ValueError("dropout rate must lie in [0, 1)")
    if not train_mode or rate == 0.0:
        return x
    if rng is None:
        raise ValueError("dropout in train mode needs an rng")
    keep = (rng.random(x.shape) >= rate).astype(x.data.dtype)
    return mul_mask(x, keep / (1.0 - rate))


def mean_rows(x: Tensor, k: int) -> Tensor:
    """Mean over the first k rows, as a (1, cols) tensor."""
    if not 1 <= k <= x.shape[0]:
        raise ShapeError(f"cannot average {k} rows of a {x.shape} tensor")
    out_data = x.data[:k].mean(axis=0, keepdims=True)

    def backward(g):
        dx = np.zeros_like(x.data)
        dx[:k] = g / k
        return [(x, dx)]

    return _result(out_data, (x,), backward)


def concat_rows(tensors: Sequence[Tensor]) -> Tensor:
    if not tensors:
        raise ValueError("concat_rows needs at least one tensor")
    cols = tensors[0].shape[1]
    for t in tensors:
        if t.shape[1] != cols:
            raise ShapeError("concat_rows needs equal column counts")
    out_data = np.concatenate([t.data for t in tensors], axis=0)
    offsets = np.cumsum([0] + [t.shape[0] for t in tensors])

    def backward(g):
        return [
            (t, g[offsets[i]:offsets[i + 1]]) for i, t in enumerate(tensors)
        ]

    return _result(out_data, tuple(tensors), backward)


def cross_entropy(logits: Tensor, labels) -> Tensor:
    """Mean negative log softmax probability of the true class."""
    labels = np.asarray(labels)
    n, n_classes = logits.shape
    if labels.shape != (n,):
        raise ShapeError(f"labels shape {labels.shape} does not match {n} rows")
    if labels.min() < 0 or labels.max() >= n_classes:
        raise ValueError("labels must be class indices")
    z = logits.data
    zmax = z.max(axis=1, keepdims=True)
    logsumexp = zmax + np.log(np.exp(z - zmax).sum(axis=1, keepdims=True))
    logp = z - logsumexp
    loss = -logp[np.arange(n), labels].mean()
    out_data = np.full((1, 1), loss, dtype=z.dtype)

    def backward(g):
        grad = np.exp(logp)
        grad[np.arange(n), labels] -= 1.0
        return [(logits, grad * (g[0, 0] / n))]

    return _result(out_data, (logits,), backward)


class Adam:
    """Adam with bias correction; one moment pair per parameter tensor."""

    def __init__(
        self,
        params: Sequence[Tensor],
        lr: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m = [np.zeros_like(p.data) for p in self.params]
        self._v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def step(self):
        self.t += 1
        for i, p in enumerate(self.params):
            grad = p.grad if p.grad is not None else np.zeros_like(p.data)
            if grad.shape != p.data.shape:
                raise ShapeError(
                    f"gradient shape {grad.shape} does not match "
                    f"parameter shape {p.data.shape}"
                )
            self._m[i] = self.beta1 * self._m[i] + (1.0 - self.beta1) * grad
            self._v[i] = self.beta2 * self._v[i] + (1.0 - self.beta2) * grad * grad
            m_hat = self._m[i] / (1.0 - self.beta1 ** self.t)
            v_hat = self._v[i] / (1.0 - self.beta2 ** self.t)
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
            if not np.isfinite(p.data).all():
                raise NonFiniteError("Adam update produced NaN or Inf")


@dataclass
class GradCheckReport:
    """Max relative error of analytic vs central-difference gradients, per block."""

    eps: float
    tolerance: float
    block_errors: dict[str, float] = field(default_factory=dict)

    @property
    def max_rel_err(self) -> float:
        return max(self.block_errors.values(), default=0.0)

    @property
    def failed_blocks(self) -> list[str]:
        return [n for n, e in self.block_errors.items() if e >= self.tolerance]

    @property
    def ok(self) -> bool:
        return not self.failed_blocks

    def __str__(self):
        lines = [f"gradient check (eps={self.eps:g}, tol={self.tolerance:g})"]
        for name, err in self.block_errors.items():
            mark = "ok" if err < self.tolerance else "FAIL"
            lines.append(f"  {name:24s} max rel err {err:.3e}  {mark}")
        return "\n".join(lines)


def _rel_err(a: float, b: float, floor: float) -> float:
    denom = max(abs(a), abs(b))
    if denom <= floor:
        return 0.0
    return abs(a - b) / denom


def grad_check(
    closure: Callable[[], Tensor],
    named_params: Sequence[tuple[str, Tensor]],
    eps: float = 1e-5,
    tolerance: float = 1e-4,
    floor: float = 1e-6,
) -> GradCheckReport:
    """Compare recorded gradients against central finite differences.

    The closure must be deterministic (run training-time randomness such as
    dropout disabled); this is verified by evaluating it twice. Entries where
    both gradients are below ``floor`` in magnitude are treated as matching.
    """
    first = closure().item()
    second = closure().item()
    if first != second:
        raise ValueError("non-deterministic closure")

    for _, p in named_params:
        p.zero_grad()
    closure().backward()
    analytic = {name: np.array(p.grad, copy=True) for name, p in named_params}

    report = GradCheckReport(eps=eps, tolerance=tolerance)
    for name, p in named_params:
        worst = 0.0
        flat = p.data.reshape(-1)
        an = analytic[name].reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + eps
            f_plus = closure().item()
            flat[j] = orig - eps
            f_minus = closure().item()
            flat[j] = orig
            fd = (f_plus - f_minus) / (2.0 * eps)
            worst = max(worst, _rel_err(fd, float(an[j]), floor))
        report.block_errors[name] = worst
    return report
