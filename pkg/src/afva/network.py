"""From-scratch fully connected feed-forward regressor.

ReLU hidden layers, a linear scalar output, summed-squared-error loss, and
stochastic gradient descent with classical momentum. Everything is float64
NumPy and deterministic given (seed, config, data); a finite-difference
gradient checker ships alongside the analytic backward pass.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from afva.errors import DivergenceError, FormatError

MODEL_MAGIC = b"AFNN"
MODEL_VERSION = 1

DEFAULT_HIDDEN_DIMS = (3000, 1000, 1000)


@dataclass
class Mlp:
    """Layer widths plus per-layer weight matrices and bias vectors.

    weights[l] has shape (dims[l], dims[l+1]); biases[l] has length
    dims[l+1]. The output width is always 1.
    """

    dims: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    axis: str = ""

    def __post_init__(self):
        if len(self.dims) < 2:
            raise ValueError("a network needs at least input and output layers")
        if self.dims[-1] != 1:
            raise ValueError(f"output width must be 1, got {self.dims[-1]}")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            expected = (self.dims[l], self.dims[l + 1])
            if w.shape != expected:
                raise ValueError(f"layer {l} weights {w.shape} != {expected}")
            if b.shape != (self.dims[l + 1],):
                raise ValueError(f"layer {l} bias shape {b.shape}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {l} has non-finite parameters")

    @property
    def n_layers(self) -> int:
        return len(self.dims) - 1

    def clone(self) -> "Mlp":
        return Mlp(
            dims=self.dims,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            axis=self.axis,
        )


def init(dims, seed: int = 0, axis: str = "") -> Mlp:
    """He-style initialization: weights ~ N(0, 2/fan_in), biases zero."""
    dims = tuple(int(d) for d in dims)
    rng = np.random.default_rng(seed)
    weights = [
        rng.normal(0.0, np.sqrt(2.0 / dims[l]), size=(dims[l], dims[l + 1]))
        for l in range(len(dims) - 1)
    ]
    biases = [np.zeros(dims[l + 1]) for l in range(len(dims) - 1)]
    return Mlp(dims=dims, weights=weights, biases=biases, axis=axis)


def _forward_batch(net: Mlp, rows: np.ndarray):
    """Returns (outputs, activations, preactivations).

    activations[0] is the input batch; hidden activations are ReLU of the
    preactivations; the final layer is linear.
    """
    activations = [rows]
    preactivations = []
    x = rows
    for l in range(net.n_layers):
        p = x @ net.weights[l] + net.biases[l]
        preactivations.append(p)
        x = np.maximum(p, 0.0) if l < net.n_layers - 1 else p
        activations.append(x)
    return activations[-1][:, 0], activations, preactivations


def _as_batch(net: Mlp, rows: np.ndarray) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows[None, :]
    if rows.ndim != 2 or rows.shape[1] != net.dims[0]:
        raise ValueError(
            f"input width {rows.shape[-1]} does not match network input "
            f"{net.dims[0]}"
        )
    if not np.all(np.isfinite(rows)):
        raise ValueError("input rows contain non-finite values")
    return rows


def forward(net: Mlp, x) -> tuple[float, list[np.ndarray]]:
    """Single-vector forward pass: (scalar output, per-layer activations)."""
    batch = _as_batch(net, x)
    if batch.shape[0] != 1:
        raise ValueError("forward takes a single input vector; use predict")
    outputs, activations, _ = _forward_batch(net, batch)
    return float(outputs[0]), [a[0] for a in activations]


def predict(net: Mlp, rows) -> np.ndarray:
    """Forward outputs for a batch of rows, no clamping."""
    outputs, _, _ = _forward_batch(net, _as_batch(net, rows))
    return outputs


def loss(net: Mlp, rows, targets) -> float:
    """Sum over the batch of squared output-target differences."""
    batch = _as_batch(net, rows)
    targets = np.asarray(targets, dtype=np.float64).ravel()
    if batch.shape[0] == 0:
        raise ValueError("loss of an empty batch is undefined")
    if targets.shape[0] != batch.shape[0]:
        raise ValueError("targets do not match batch size")
    outputs, _, _ = _forward_batch(net, batch)
    # Oversized parameters overflow to inf here; train() turns that into a
    # divergence error rather than a warning.
    with np.errstate(over="ignore"):
        return float(np.sum((outputs - targets) ** 2))


def backward(
    net: Mlp, rows, targets
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Exact gradients of the summed batch loss for every parameter.

    The ReLU subgradient at exactly 0 is taken as 0.
    """
    batch = _as_batch(net, rows)
    targets = np.asarray(targets, dtype=np.float64).ravel()
    if batch.shape[0] == 0:
        raise ValueError("gradient of an empty batch is undefined")
    outputs, activations, preactivations = _forward_batch(net, batch)

    grad_w = [np.empty_like(w) for w in net.weights]
    grad_b = [np.empty_like(b) for b in net.biases]

    delta = 2.0 * (outputs - targets)[:, None]
    for l in range(net.n_layers - 1, -1, -1):
        grad_w[l] = activations[l].T @ delta
        grad_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ net.weights[l].T) * (preactivations[l - 1] > 0.0)
    return grad_w, grad_b


def gradient_check(net: Mlp, rows, targets, h: float = 1e-5) -> float:
    """Max symmetric relative error between analytic gradients and central
    finite differences over every parameter."""
    grad_w, grad_b = backward(net, rows, targets)
    worst = 0.0
    for params, grads in ((net.weights, grad_w), (net.biases, grad_b)):
        for tensor, grad in zip(params, grads):
            flat = tensor.ravel()
            for i in range(flat.size):
                original = flat[i]
                flat[i] = original + h
                up = loss(net, rows, targets)
                flat[i] = original - h
                down = loss(net, rows, targets)
                flat[i] = original
                numeric = (up - down) / (2.0 * h)
                analytic = grad.ravel()[i]
                denom = max(abs(analytic) + abs(numeric), 1e-8)
                worst = max(worst, abs(analytic - numeric) / denom)
    return worst


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-4
    momentum: float = 0.9
    batch_size: int = 1000
    max_epochs: int = 1000
    patience: int = 20
    min_improvement: float = 1e-6
    seed: int = 0
    mean_loss: bool = False  # average the batch gradient instead of summing
    shuffle: bool = True

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_mse: float
    val_mse: float  # nan when no validation split


def train(
    net: Mlp,
    rows,
    targets,
    config: TrainConfig = TrainConfig(),
    val_fraction: float = 0.1,
) -> tuple[Mlp, list[EpochStats]]:
    """SGD with classical momentum: v <- m v - lr g; theta <- theta + v.

    A validation slice of ``val_fraction`` is carved from the data with the
    seeded generator; training stops after ``patience`` epochs without the
    validation MSE improving by more than ``min_improvement``, returning the
    best-validation parameters. With no validation slice it runs to
    ``max_epochs`` and returns the final parameters.
    """
    rows = _as_batch(net, rows)
    targets = np.asarray(targets, dtype=np.float64).ravel()
    n = rows.shape[0]
    if n == 0:
        raise ValueError("cannot train on an empty dataset")
    if targets.shape[0] != n:
        raise ValueError("targets do not match row count")

    rng = np.random.default_rng(config.seed)
    n_val = int(round(n * val_fraction))
    if n_val > 0:
        split = rng.permutation(n)
        val_idx, train_idx = split[:n_val], split[n_val:]
    else:
        val_idx, train_idx = np.array([], dtype=np.int64), np.arange(n)
    if train_idx.size == 0:
        raise ValueError("validation split leaves no training rows")
    x_train, y_train = rows[train_idx], targets[train_idx]
    x_val, y_val = rows[val_idx], targets[val_idx]

    model = net.clone()
    velocity_w = [np.zeros_like(w) for w in model.weights]
    velocity_b = [np.zeros_like(b) for b in model.biases]
    batch_size = min(config.batch_size, x_train.shape[0])

    best = model.clone() if n_val else None
    best_val = np.inf
    stale_epochs = 0
    history: list[EpochStats] = []

    for epoch in range(config.max_epochs):
        order = (
            rng.permutation(x_train.shape[0])
            if config.shuffle
            else np.arange(x_train.shape[0])
        )
        for step, start in enumerate(range(0, x_train.shape[0], batch_size)):
            batch_idx = order[start : start + batch_size]
            bx, by = x_train[batch_idx], y_train[batch_idx]
            batch_loss = loss(model, bx, by)
            if not np.isfinite(batch_loss):
                raise DivergenceError(
                    f"non-finite loss at epoch {epoch}, step {step}",
                    epoch=epoch,
                    step=step,
                )
            grad_w, grad_b = backward(model, bx, by)
            scale = 1.0 / bx.shape[0] if config.mean_loss else 1.0
            for l in range(model.n_layers):
                velocity_w[l] = (
                    config.momentum * velocity_w[l]
                    - config.learning_rate * (grad_w[l] * scale)
                )
                velocity_b[l] = (
                    config.momentum * velocity_b[l]
                    - config.learning_rate * (grad_b[l] * scale)
                )
                model.weights[l] += velocity_w[l]
                model.biases[l] += velocity_b[l]

        train_mse = float(np.mean((predict(model, x_train) - y_train) ** 2))
        if n_val:
            val_mse = float(np.mean((predict(model, x_val) - y_val) ** 2))
            if val_mse < best_val - config.min_improvement:
                best_val = val_mse
                best = model.clone()
                stale_epochs = 0
            else:
                stale_epochs += 1
        else:
            val_mse = float("nan")
        history.append(EpochStats(epoch=epoch, train_mse=train_mse, val_mse=val_mse))
        if n_val and stale_epochs >= config.patience:
            break

    return (best if best is not None else model), history


def save_model(net: Mlp, path) -> None:
    """Layout: magic, version, axis tag, layer widths, then per layer the
    weight matrix and bias vector as float64 little-endian."""
    axis_bytes = net.axis.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<IB", MODEL_VERSION, len(axis_bytes)))
        fh.write(axis_bytes)
        fh.write(struct.pack("<I", len(net.dims)))
        fh.write(struct.pack(f"<{len(net.dims)}I", *net.dims))
        for w, b in zip(net.weights, net.biases):
            fh.write(w.astype("<f8").tobytes(order="C"))
            fh.write(b.astype("<f8").tobytes(order="C"))


def load_model(path) -> Mlp:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 9 or data[:4] != MODEL_MAGIC:
        raise FormatError(f"{path}: not a model file (bad magic)")
    version, axis_len = struct.unpack("<IB", data[4:9])
    if version != MODEL_VERSION:
        raise FormatError(f"{path}: unsupported model version {version}")
    offset = 9
    axis = data[offset : offset + axis_len].decode("utf-8")
    offset += axis_len
    (n_dims,) = struct.unpack_from("<I", data, offset)
    offset += 4
    dims = struct.unpack_from(f"<{n_dims}I", data, offset)
    offset += 4 * n_dims
    weights, biases = [], []
    for l in range(len(dims) - 1):
        w_len = dims[l] * dims[l + 1] * 8
        b_len = dims[l + 1] * 8
        if offset + w_len + b_len > len(data):
            raise FormatError(f"{path}: truncated parameter payload")
        weights.append(
            np.frombuffer(data, dtype="<f8", count=dims[l] * dims[l + 1], offset=offset)
            .reshape(dims[l], dims[l + 1])
            .copy()
        )
        offset += w_len
        biases.append(
            np.frombuffer(data, dtype="<f8", count=dims[l + 1], offset=offset).copy()
        )
        offset += b_len
    if offset != len(data):
        raise FormatError(f"{path}: {len(data) - offset} trailing bytes")
    return Mlp(dims=tuple(dims), weights=weights, biases=biases, axis=axis)
