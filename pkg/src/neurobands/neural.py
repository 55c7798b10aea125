"""From-scratch residual 1D-CNN: forward pass, exact backprop, Adam.

Stack: reshape [B,D] -> [B,1,D]; Conv1d(1->C, k, same) + ReLU; one or
more residual blocks (conv+ReLU+conv, skip add, ReLU); global average
pool; Dense(C->H) + ReLU; Dropout; Dense(H->classes) + softmax.

Everything is float64 numpy; training is single-threaded and
deterministic for a fixed (config, data, seed) triple.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError, DataError, FormatError, ShapeError, StateError

_PROB_FLOOR = 1e-12  # clip for log() in the loss


@dataclass(frozen=True)
class NetworkConfig:
    input_dim: int
    conv_channels: int = 32
    kernel_size: int = 3
    n_residual_blocks: int = 1
    dense_hidden: int = 128
    dropout_rate: float = 0.25
    n_classes: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.input_dim, self.conv_channels, self.kernel_size,
               self.dense_hidden, self.n_classes) < 1 or self.n_residual_blocks < 0:
            raise ConfigError("all dimensions must be positive")
        if self.input_dim < self.kernel_size:
            raise ConfigError(
                f"input_dim {self.input_dim} < kernel_size {self.kernel_size}"
            )
        if self.kernel_size % 2 == 0:
            raise ConfigError("kernel_size must be odd for same-padding")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError(f"dropout_rate {self.dropout_rate} outside [0, 1)")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 64
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    optimizer: str = "adam"  # "adam" or "sgd"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be >= 1")
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class TrainHistory:
    losses: list[float] = field(default_factory=list)
    accuracies: list[float] = field(default_factory=list)


class Conv1d:
    """Same-padding 1-D convolution over [B, C_in, L] -> [B, C_out, L]."""

    def __init__(self, in_ch: int, out_ch: int, kernel: int, rng: np.random.Generator):
        limit = np.sqrt(6.0 / (in_ch * kernel))  # He-uniform
        self.w = rng.uniform(-limit, limit, size=(out_ch, in_ch, kernel))
        self.b = np.zeros(out_ch)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self._cols = None

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        k = self.w.shape[2]
        pad = k // 2
        xp = np.pad(x, ((0, 0), (0, 0), (pad, pad)))
        cols = sliding_window_view(xp, k, axis=-1)  # [B, C, L, k]
        self._cols = cols
        out = np.einsum("bctj,ocj->bot", cols, self.w, optimize=True)
        return out + self.b[None, :, None]

    def backward(self, g: np.ndarray) -> np.ndarray:
        k = self.w.shape[2]
        pad = k // 2
        self.gw = np.einsum("bot,bctj->ocj", g, self._cols, optimize=True)
        self.gb = g.sum(axis=(0, 2))
        # dx is the full correlation of g with the kernel-flipped weights
        gp = np.pad(g, ((0, 0), (0, 0), (k - 1, k - 1)))
        gcols = sliding_window_view(gp, k, axis=-1)  # [B, O, L+2*pad, k]
        flipped = self.w[:, :, ::-1]
        dxp = np.einsum("bosj,ocj->bcs", gcols, flipped, optimize=True)
        length = g.shape[2]
        return dxp[:, :, pad : pad + length]

    def parameters(self):
        return [("w", self.w), ("b", self.b)]

    def gradients(self):
        return [("w", self.gw), ("b", self.gb)]


class ReLU:
    def __init__(self):
        self._mask = None

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, g: np.ndarray) -> np.ndarray:
        return g * self._mask

    def parameters(self):
        return []

    def gradients(self):
        return []


class ResidualBlock:
    """conv -> ReLU -> conv, skip add, ReLU; gradient flows to both paths."""

    def __init__(self, channels: int, kernel: int, rng: np.random.Generator):
        self.conv_a = Conv1d(channels, channels, kernel, rng)
        self.relu_a = ReLU()
        self.conv_b = Conv1d(channels, channels, kernel, rng)
        self.relu_out = ReLU()

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        h = self.relu_a.forward(self.conv_a.forward(x, train), train)
        y = self.conv_b.forward(h, train) + x
        return self.relu_out.forward(y, train)

    def backward(self, g: np.ndarray) -> np.ndarray:
        gy = self.relu_out.backward(g)
        branch = self.conv_a.backward(self.relu_a.backward(self.conv_b.backward(gy)))
        return branch + gy

    def parameters(self):
        return [(f"conv_a.{k}", v) for k, v in self.conv_a.parameters()] + [
            (f"conv_b.{k}", v) for k, v in self.conv_b.parameters()
        ]

    def gradients(self):
        return [(f"conv_a.{k}", v) for k, v in self.conv_a.gradients()] + [
            (f"conv_b.{k}", v) for k, v in self.conv_b.gradients()
        ]


class GlobalAvgPool:
    """[B, C, L] -> [B, C] by averaging over length."""

    def __init__(self):
        self._length = None

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        self._length = x.shape[2]
        return x.mean(axis=2)

    def backward(self, g: np.ndarray) -> np.ndarray:
        return np.repeat(g[:, :, None], self._length, axis=2) / self._length

    def parameters(self):
        return []

    def gradients(self):
        return []


class Dense:
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        limit = np.sqrt(6.0 / in_dim)
        self.w = rng.uniform(-limit, limit, size=(in_dim, out_dim))
        self.b = np.zeros(out_dim)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self._x = None

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        self._x = x
        return x @ self.w + self.b

    def backward(self, g: np.ndarray) -> np.ndarray:
        self.gw = self._x.T @ g
        self.gb = g.sum(axis=0)
        return g @ self.w.T

    def parameters(self):
        return [("w", self.w), ("b", self.b)]

    def gradients(self):
        return [("w", self.gw), ("b", self.gb)]


class Dropout:
    """Inverted dropout; identity in eval mode."""

    def __init__(self, rate: float):
        self.rate = rate
        self.rng = np.random.default_rng(0)
        self._mask = None

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        if train and self.rate > 0.0:
            keep = self.rng.random(x.shape) >= self.rate
            self._mask = keep / (1.0 - self.rate)
        else:
            self._mask = np.ones_like(x)
        return x * self._mask

    def backward(self, g: np.ndarray) -> np.ndarray:
        return g * self._mask

    def parameters(self):
        return []

    def gradients(self):
        return []


class Network:
    """Ordered layer graph with cached activations for backprop."""

    def __init__(self, config: NetworkConfig):
        self.config = config
        rng = np.random.default_rng(config.seed)
        self.conv_in = Conv1d(1, config.conv_channels, config.kernel_size, rng)
        self.relu_in = ReLU()
        self.blocks = [
            ResidualBlock(config.conv_channels, config.kernel_size, rng)
            for _ in range(config.n_residual_blocks)
        ]
        self.pool = GlobalAvgPool()
        self.dense_hidden = Dense(config.conv_channels, config.dense_hidden, rng)
        self.relu_hidden = ReLU()
        self.dropout = Dropout(config.dropout_rate)
        self.dense_out = Dense(config.dense_hidden, config.n_classes, rng)
        self._probs = None
        self._batch_rows = None

    def _ordered_layers(self):
        yield "conv_in", self.conv_in
        yield "relu_in", self.relu_in
        for i, block in enumerate(self.blocks):
            yield f"block{i}", block
        yield "pool", self.pool
        yield "dense_hidden", self.dense_hidden
        yield "relu_hidden", self.relu_hidden
        yield "dropout", self.dropout
        yield "dense_out", self.dense_out

    def parameters(self) -> dict[str, np.ndarray]:
        out = {}
        for lname, layer in self._ordered_layers():
            for pname, arr in layer.parameters():
                out[f"{lname}.{pname}"] = arr
        return out

    def gradients(self) -> dict[str, np.ndarray]:
        out = {}
        for lname, layer in self._ordered_layers():
            for pname, arr in layer.gradients():
                out[f"{lname}.{pname}"] = arr
        return out

    def set_parameter(self, name: str, value: np.ndarray) -> None:
        current = self.parameters()[name]
        if current.shape != value.shape:
            raise ShapeError(f"parameter {name}: {value.shape} != {current.shape}")
        current[...] = value


def parameter_count(net: Network) -> int:
    return sum(p.size for p in net.parameters().values())


def build_network(cfg: NetworkConfig) -> Network:
    """Deterministically initialized network (He-uniform weights, zero biases)."""
    return Network(cfg)


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward(net: Network, batch: np.ndarray, train_mode: bool = False) -> np.ndarray:
    """Class probabilities [B, n_classes]; caches activations for backward.

    Raises:
        ShapeError: batch is not [B, input_dim].
    """
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != net.config.input_dim:
        raise ShapeError(
            f"batch shape {x.shape} incompatible with input_dim {net.config.input_dim}"
        )
    h = x[:, None, :]  # one input channel
    for _, layer in net._ordered_layers():
        h = layer.forward(h, train_mode)
    probs = _softmax(h)
    net._probs = probs
    net._batch_rows = x.shape[0]
    return probs


def cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log-likelihood of the true classes."""
    picked = probs[np.arange(len(labels)), labels]
    return float(-np.mean(np.log(np.maximum(picked, _PROB_FLOOR))))


def backward(net: Network, batch: np.ndarray, labels: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of mean cross-entropy w.r.t. every parameter.

    Requires a preceding forward() on the same batch.

    Raises:
        StateError: no cached forward pass (or batch size mismatch).
    """
    labels = np.asarray(labels)
    if net._probs is None:
        raise StateError("backward called before forward")
    if len(labels) != net._batch_rows:
        raise StateError(
            f"cached forward had {net._batch_rows} rows, labels have {len(labels)}"
        )
    onehot = np.zeros_like(net._probs)
    onehot[np.arange(len(labels)), labels] = 1.0
    g = (net._probs - onehot) / len(labels)  # d(mean CE)/d(logits)
    for _, layer in reversed(list(net._ordered_layers())):
        g = layer.backward(g)
    return net.gradients()


def predict(net: Network, batch: np.ndarray) -> np.ndarray:
    """Argmax class per row; ties resolve to the lower class index."""
    probs = forward(net, batch, train_mode=False)
    return np.argmax(probs, axis=1)


class Adam:
    def __init__(self, params: dict[str, np.ndarray], cfg: TrainConfig):
        self.cfg = cfg
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        c = self.cfg
        self.t += 1
        for k, p in params.items():
            g = grads[k]
            self.m[k] = c.beta1 * self.m[k] + (1.0 - c.beta1) * g
            self.v[k] = c.beta2 * self.v[k] + (1.0 - c.beta2) * g * g
            m_hat = self.m[k] / (1.0 - c.beta1 ** self.t)
            v_hat = self.v[k] / (1.0 - c.beta2 ** self.t)
            p -= c.learning_rate * m_hat / (np.sqrt(v_hat) + c.epsilon)


class Sgd:
    def __init__(self, params: dict[str, np.ndarray], cfg: TrainConfig):
        self.cfg = cfg

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        for k, p in params.items():
            p -= self.cfg.learning_rate * grads[k]


def _eval_accuracy(net: Network, matrix: np.ndarray, labels: np.ndarray,
                   chunk: int = 1024) -> float:
    hits = 0
    for start in range(0, len(labels), chunk):
        pred = predict(net, matrix[start : start + chunk])
        hits += int(np.sum(pred == labels[start : start + chunk]))
    return hits / len(labels)


def train(net: Network, features, cfg: TrainConfig | None = None) -> TrainHistory:
    """Mini-batch training; returns per-epoch (loss, accuracy) history.

    Loss is the shuffled-batch mean per epoch; accuracy is an eval-mode
    pass over the full training matrix after the epoch's updates. The
    network is updated in place.

    Raises:
        DataError: fewer than two classes present.
    """
    cfg = cfg or TrainConfig()
    matrix = np.asarray(features.matrix, dtype=np.float64)
    labels = np.asarray(features.labels)
    if matrix.shape[0] == 0 or len(np.unique(labels)) < 2:
        raise DataError("training data must contain both classes")

    shuffle_seed, dropout_seed = np.random.SeedSequence(cfg.seed).spawn(2)
    shuffle_rng = np.random.default_rng(shuffle_seed)
    net.dropout.rng = np.random.default_rng(dropout_seed)

    params = net.parameters()
    optimizer = Adam(params, cfg) if cfg.optimizer == "adam" else Sgd(params, cfg)

    history = TrainHistory()
    n = matrix.shape[0]
    for _ in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        total_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            xb, yb = matrix[idx], labels[idx]
            probs = forward(net, xb, train_mode=True)
            total_loss += cross_entropy(probs, yb) * len(idx)
            grads = backward(net, xb, yb)
            optimizer.step(params, grads)
        history.losses.append(total_loss / n)
        history.accuracies.append(_eval_accuracy(net, matrix, labels))
    return history


@dataclass(frozen=True)
class ColumnStats:
    """Per-column z-score statistics, fitted on the training split only."""

    mean: np.ndarray
    std: np.ndarray


def fit_column_stats(matrix: np.ndarray) -> ColumnStats:
    std = matrix.std(axis=0)
    return ColumnStats(mean=matrix.mean(axis=0), std=np.where(std < 1e-8, 1.0, std))


def apply_column_stats(matrix: np.ndarray, stats: ColumnStats) -> np.ndarray:
    return (matrix - stats.mean) / stats.std


_MODEL_MAGIC = b"EEGB1"


def save_model(net: Network, path: str | Path, column_stats: ColumnStats | None = None) -> None:
    """Checkpoint: EEGB-style container, f32 parameters in layer order."""
    params = net.parameters()
    header = {
        "version": 1,
        "kind": "model",
        "config": asdict(net.config),
        "column_stats": None
        if column_stats is None
        else {"mean": column_stats.mean.tolist(), "std": column_stats.std.tolist()},
        "params": [{"name": k, "shape": list(v.shape)} for k, v in params.items()],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = b"".join(np.ascontiguousarray(v, dtype="<f4").tobytes() for v in params.values())
    Path(path).write_bytes(_MODEL_MAGIC + struct.pack("<I", len(blob)) + blob + payload)


def load_model(path: str | Path) -> tuple[Network, ColumnStats | None]:
    """Rebuild a checkpointed network (parameters come back at f32 precision)."""
    raw = Path(path).read_bytes()
    if raw[:5] != _MODEL_MAGIC:
        raise FormatError(f"{path}: bad magic for a model checkpoint")
    (header_len,) = struct.unpack("<I", raw[5:9])
    header = json.loads(raw[9 : 9 + header_len].decode("utf-8"))
    if header.get("kind") != "model":
        raise FormatError(f"{path}: not a model container")

    net = build_network(NetworkConfig(**header["config"]))
    offset = 9 + header_len
    for entry in header["params"]:
        shape = tuple(entry["shape"])
        size = int(np.prod(shape)) * 4
        arr = np.frombuffer(raw[offset : offset + size], dtype="<f4").reshape(shape)
        net.set_parameter(entry["name"], arr.astype(np.float64))
        offset += size

    stats = None
    if header.get("column_stats"):
        stats = ColumnStats(
            mean=np.asarray(header["column_stats"]["mean"], dtype=np.float64),
            std=np.asarray(header["column_stats"]["std"], dtype=np.float64),
        )
    return net, stats
