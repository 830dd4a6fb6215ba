"""Reverse-mode automatic differentiation on small dense tensors.

Just enough engine for the surrogate networks: rank <= 2 float64 arrays,
micrograd-style backward closures collected by topological sort, the layer
set the networks use (dense, leaky-ReLU, batchnorm) and the loss heads
(MSE, binary and softmax cross-entropy).  No broadcasting beyond bias rows,
no views, no GPU.
"""

from __future__ import annotations

import numpy as np

LEAKY_SLOPE = 0.01
BATCHNORM_MOMENTUM = 0.1
BATCHNORM_EPS = 1e-5


class GradError(ValueError):
    """Shape mismatch or non-finite value inside the graph."""


def _as_f64(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim > 2:
        raise GradError(f"rank {arr.ndim} tensor not supported")
    return arr


class Tensor:
    """A node in the computation graph: value, gradient, backward closure."""

    __slots__ = ("data", "grad", "_parents", "_backward")

    def __init__(self, data, parents: tuple["Tensor", ...] = ()):
        self.data = _as_f64(data)
        self.grad = np.zeros_like(self.data)
        self._parents = parents
        self._backward = lambda: None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def backward(self, seed: np.ndarray | float = 1.0) -> None:
        """Propagate d(self)/d(everything), seeding d(self) with `seed`.

        A scalar loss uses the default seed 1.  A matrix output seeded with
        a one-hot row mask yields one Jacobian row per call.
        """
        topo: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                stack.append((parent, False))
        self.grad = self.grad + np.broadcast_to(np.asarray(seed, dtype=np.float64), self.data.shape)
        for node in reversed(topo):
            node._backward()

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape})"


def _check_finite(out: np.ndarray, op: str) -> None:
    if not np.all(np.isfinite(out)):
        raise GradError(f"non-finite values out of {op}")


def _make(data: np.ndarray, parents: tuple[Tensor, ...], op: str) -> Tensor:
    _check_finite(data, op)
    return Tensor(data, parents)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    out = _make(a.data @ b.data, (a, b), "matmul")

    def backward():
        a.grad += out.grad @ b.data.T
        b.grad += a.data.T @ out.grad

    out._backward = backward
    return out


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise add; b may be a bias row broadcast over the batch."""
    out = _make(a.data + b.data, (a, b), "add")

    def backward():
        a.grad += _unbroadcast(out.grad, a.data.shape)
        b.grad += _unbroadcast(out.grad, b.data.shape)

    out._backward = backward
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    # sum out the broadcast batch axis, then any size-1 dims
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def mul(a: Tensor, b: Tensor) -> Tensor:
    out = _make(a.data * b.data, (a, b), "mul")

    def backward():
        a.grad += _unbroadcast(b.data * out.grad, a.data.shape)
        b.grad += _unbroadcast(a.data * out.grad, b.data.shape)

    out._backward = backward
    return out


def scale(a: Tensor, c: float) -> Tensor:
    out = _make(a.data * c, (a,), "scale")

    def backward():
        a.grad += c * out.grad

    out._backward = backward
    return out


def square(a: Tensor) -> Tensor:
    out = _make(a.data * a.data, (a,), "square")

    def backward():
        a.grad += 2.0 * a.data * out.grad

    out._backward = backward
    return out


def exp(a: Tensor) -> Tensor:
    with np.errstate(over="ignore"):
        value = np.exp(a.data)
    out = _make(value, (a,), "exp")

    def backward():
        a.grad += out.data * out.grad

    out._backward = backward
    return out


def leaky_relu(a: Tensor, alpha: float = LEAKY_SLOPE) -> Tensor:
    mask = np.where(a.data > 0.0, 1.0, alpha)
    out = _make(a.data * mask, (a,), "leaky_relu")

    def backward():
        a.grad += mask * out.grad

    out._backward = backward
    return out


def concat(parts: list[Tensor], axis: int = 1) -> Tensor:
    out = _make(np.concatenate([p.data for p in parts], axis=axis), tuple(parts), "concat")
    widths = [p.data.shape[axis] for p in parts]

    def backward():
        offset = 0
        for part, width in zip(parts, widths):
            sl = [slice(None)] * out.data.ndim
            sl[axis] = slice(offset, offset + width)
            part.grad += out.grad[tuple(sl)]
            offset += width

    out._backward = backward
    return out


def slice_cols(a: Tensor, start: int, stop: int) -> Tensor:
    out = _make(a.data[:, start:stop], (a,), "slice")

    def backward():
        a.grad[:, start:stop] += out.grad

    out._backward = backward
    return out


def reduce_mean(a: Tensor) -> Tensor:
    out = _make(np.mean(a.data), (a,), "reduce_mean")

    def backward():
        a.grad += out.grad / a.data.size

    out._backward = backward
    return out


def mse(pred: Tensor, target: np.ndarray) -> Tensor:
    """Mean over all elements of (pred - target)^2; target is constant."""
    target = _as_f64(target)
    if target.shape != pred.data.shape:
        raise GradError(f"mse shapes {pred.data.shape} vs {target.shape}")
    diff = pred.data - target
    out = _make(np.mean(diff * diff), (pred,), "mse")

    def backward():
        pred.grad += (2.0 / diff.size) * diff * out.grad

    out._backward = backward
    return out


def binary_ce_with_logits(logits: Tensor, target: np.ndarray) -> Tensor:
    """Mean elementwise sigmoid cross-entropy, numerically stable."""
    target = _as_f64(target)
    if target.shape != logits.data.shape:
        raise GradError(f"bce shapes {logits.data.shape} vs {target.shape}")
    z = logits.data
    # log(1 + e^-|z|) + max(z, 0) - z*t
    loss = np.maximum(z, 0.0) - z * target + np.log1p(np.exp(-np.abs(z)))
    out = _make(np.mean(loss), (logits,), "binary_ce")
    sig = 1.0 / (1.0 + np.exp(-z))

    def backward():
        logits.grad += (sig - target) / z.size * out.grad

    out._backward = backward
    return out


def softmax_ce(logits: Tensor, onehot: np.ndarray) -> Tensor:
    """Rowwise softmax cross-entropy against one-hot rows, mean over batch."""
    onehot = _as_f64(onehot)
    if onehot.shape != logits.data.shape:
        raise GradError(f"softmax_ce shapes {logits.data.shape} vs {onehot.shape}")
    z = logits.data - logits.data.max(axis=1, keepdims=True)
    logsumexp = np.log(np.sum(np.exp(z), axis=1, keepdims=True))
    log_softmax = z - logsumexp
    out = _make(np.mean(-np.sum(onehot * log_softmax, axis=1)), (logits,), "softmax_ce")
    softmax = np.exp(log_softmax)
    batch = logits.data.shape[0]

    def backward():
        logits.grad += (softmax - onehot) / batch * out.grad

    out._backward = backward
    return out


def softmax_rows(z: np.ndarray) -> np.ndarray:
    """Plain (non-graph) rowwise softmax for inference-time class probabilities."""
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


class DenseLayer:
    """y = x W + b with He initialization for the leaky-ReLU family."""

    def __init__(self, fan_in: int, fan_out: int, rng: np.random.Generator):
        std = np.sqrt(2.0 / ((1.0 + LEAKY_SLOPE**2) * fan_in))
        self.weight = Tensor(rng.normal(0.0, std, size=(fan_in, fan_out)))
        self.bias = Tensor(np.zeros((1, fan_out)))

    def __call__(self, x: Tensor) -> Tensor:
        return add(matmul(x, self.weight), self.bias)

    def parameters(self) -> list[Tensor]:
        return [self.weight, self.bias]


class BatchNormLayer:
    """Per-feature batch normalization with learned scale and shift.

    Train mode normalizes with the batch statistics (biased variance) and
    updates running statistics; eval mode uses the running statistics only.
    """

    def __init__(self, width: int, momentum: float = BATCHNORM_MOMENTUM, eps: float = BATCHNORM_EPS):
        self.gamma = Tensor(np.ones((1, width)))
        self.beta = Tensor(np.zeros((1, width)))
        self.running_mean = np.zeros(width)
        self.running_var = np.ones(width)
        self.momentum = momentum
        self.eps = eps
        self.training = True

    def __call__(self, x: Tensor) -> Tensor:
        if self.training:
            mean = x.data.mean(axis=0)
            var = x.data.var(axis=0)
            self.running_mean = (1.0 - self.momentum) * self.running_mean + self.momentum * mean
            self.running_var = (1.0 - self.momentum) * self.running_var + self.momentum * var
        else:
            mean = self.running_mean
            var = self.running_var
        inv_std = 1.0 / np.sqrt(var + self.eps)
        x_hat = (x.data - mean) * inv_std
        out = _make(x_hat * self.gamma.data + self.beta.data, (x, self.gamma, self.beta), "batchnorm")
        gamma = self.gamma
        beta = self.beta
        training = self.training
        batch = x.data.shape[0]

        def backward():
            gamma.grad += np.sum(out.grad * x_hat, axis=0, keepdims=True)
            beta.grad += np.sum(out.grad, axis=0, keepdims=True)
            if training:
                # normalization couples the batch: backprop through mean/var
                g = out.grad * gamma.data
                x.grad += inv_std * (
                    g
                    - g.mean(axis=0)
                    - x_hat * np.mean(g * x_hat, axis=0)
                )
            else:
                x.grad += out.grad * gamma.data * inv_std

        out._backward = backward
        return out

    def parameters(self) -> list[Tensor]:
        return [self.gamma, self.beta]


class AdamState:
    """First/second moment buffers and step counter for a parameter list."""

    BETA1 = 0.9
    BETA2 = 0.999
    EPS = 1e-8

    def __init__(self, params: list[Tensor]):
        self.m = [np.zeros_like(p.data) for p in params]
        self.v = [np.zeros_like(p.data) for p in params]
        self.step = 0


def adam_step(params: list[Tensor], grads: list[np.ndarray], state: AdamState, lr: float) -> None:
    """One bias-corrected Adam update, in place."""
    state.step += 1
    b1, b2, eps = AdamState.BETA1, AdamState.BETA2, AdamState.EPS
    correction1 = 1.0 - b1**state.step
    correction2 = 1.0 - b2**state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2
        p.data -= lr * m_hat / (np.sqrt(v_hat) + eps)


def zero_grads(params: list[Tensor]) -> None:
    for p in params:
        p.zero_grad()
