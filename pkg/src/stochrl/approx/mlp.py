"""Scalar-output MLP with hand-rolled backpropagation.

The value network takes a concatenated (state, action-features) vector and
returns one real number.  Hidden layers are ReLU, the output is linear.
Everything is plain numpy so gradients can be cross-checked against finite
differences exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_HIDDEN = (64, 64)


@dataclass
class MlpParams:
    """Per-layer weight matrices (fan_in, fan_out) and bias vectors."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.biases):
            raise ValueError("one bias vector per weight matrix required")
        for w, b in zip(self.weights, self.biases):
            if w.shape[1] != b.shape[0]:
                raise ValueError(f"bias shape {b.shape} does not match weights {w.shape}")

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[0]

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def n_parameters(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)


def init_params(
    in_dim: int,
    hidden: tuple[int, ...] = DEFAULT_HIDDEN,
    rng: np.random.Generator | int | None = None,
) -> MlpParams:
    """Uniform init on [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer."""
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    sizes = (in_dim, *hidden, 1)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(gen.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(gen.uniform(-bound, bound, size=fan_out))
    return MlpParams(weights, biases)


def forward_batch(params: MlpParams, inputs: np.ndarray) -> np.ndarray:
    """Network values for a (B, in_dim) batch, returned as shape (B,)."""
    h = np.asarray(inputs, dtype=np.float64)
    if h.ndim != 2 or h.shape[1] != params.in_dim:
        raise ValueError(f"expected inputs of shape (B, {params.in_dim}), got {h.shape}")
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        h = h @ w + b
        if i != last:
            np.maximum(h, 0.0, out=h)
    return h[:, 0]


def forward(params: MlpParams, state, action_features) -> float:
    """Scalar value for one (state, action-features) pair; pure in its inputs."""
    x = np.concatenate([np.atleast_1d(state), np.atleast_1d(action_features)])
    return float(forward_batch(params, x[None, :])[0])


EVAL_CHUNK = 128


def forward_chunked(params: MlpParams, inputs: np.ndarray) -> np.ndarray:
    """forward_batch in bounded slices.

    Large single matmuls trip BLAS multithreading thresholds and lose the
    linear-in-rows cost profile the scaling benchmarks rely on; slicing
    keeps per-row cost flat from tens to tens of thousands of rows.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    rows = inputs.shape[0]
    if rows <= EVAL_CHUNK:
        return forward_batch(params, inputs)
    out = np.empty(rows)
    for lo in range(0, rows, EVAL_CHUNK):
        out[lo : lo + EVAL_CHUNK] = forward_batch(params, inputs[lo : lo + EVAL_CHUNK])
    return out


def gradient(
    params: MlpParams, inputs: np.ndarray, targets: np.ndarray
) -> tuple[MlpParams, float]:
    """Gradient of the mean squared error over the batch, plus the loss.

    Loss is (1/B) sum_i (f(x_i) - y_i)^2; the returned structure mirrors
    the parameters so optimizers can walk both in lockstep.
    """
    x = np.asarray(inputs, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise ValueError("inputs must be (B, in_dim) with one target per row")
    if x.shape[0] == 0:
        raise ValueError("gradient needs a non-empty batch")
    last = len(params.weights) - 1
    pre: list[np.ndarray] = []  # pre-activations per layer
    acts: list[np.ndarray] = [x]  # layer inputs
    h = x
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w + b
        pre.append(z)
        h = np.maximum(z, 0.0) if i != last else z
        acts.append(h)
    residual = h[:, 0] - y
    loss = float(np.mean(residual**2))
    delta = (2.0 / x.shape[0]) * residual[:, None]
    grad_w = [np.empty(0)] * len(params.weights)
    grad_b = [np.empty(0)] * len(params.biases)
    for i in range(last, -1, -1):
        grad_w[i] = acts[i].T @ delta
        grad_b[i] = delta.sum(axis=0)
        if i:
            delta = (delta @ params.weights[i].T) * (pre[i - 1] > 0)
    return MlpParams(grad_w, grad_b), loss


def sgd_step(params: MlpParams, grads: MlpParams, lr: float) -> None:
    """Plain gradient descent, in place."""
    for w, gw in zip(params.weights, grads.weights):
        w -= lr * gw
    for b, gb in zip(params.biases, grads.biases):
        b -= lr * gb


def soft_update(target: MlpParams, online: MlpParams, tau: float) -> None:
    """Polyak blend target <- tau * online + (1 - tau) * target, in place."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must be in [0, 1], got {tau}")
    for tw, ow in zip(target.weights, online.weights):
        tw *= 1.0 - tau
        tw += tau * ow
    for tb, ob in zip(target.biases, online.biases):
        tb *= 1.0 - tau
        tb += tau * ob


def flatten(params: MlpParams) -> np.ndarray:
    """All parameters as one vector (finite-difference checks, checkpoints)."""
    parts = [w.reshape(-1) for w in params.weights] + [b for b in params.biases]
    return np.concatenate(parts)


def unflatten(vector: np.ndarray, template: MlpParams) -> MlpParams:
    """Inverse of :func:`flatten` against a shape template."""
    vector = np.asarray(vector, dtype=np.float64)
    weights, biases = [], []
    pos = 0
    for w in template.weights:
        weights.append(vector[pos : pos + w.size].reshape(w.shape).copy())
        pos += w.size
    for b in template.biases:
        biases.append(vector[pos : pos + b.size].copy())
        pos += b.size
    if pos != vector.size:
        raise ValueError("vector length does not match the template")
    return MlpParams(weights, biases)
