"""Dense classifier, synthetic dataset, and flat parameter handling.

The transmission chain is architecture-agnostic: it only ever sees a flat
float32 vector plus a manifest of layer shapes, and flatten/unflatten is
an exact bijection. Training is plain momentum SGD on softmax
cross-entropy, computed in float64 for reproducibility and stored at
float32, the precision everything is transmitted at.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

Manifest = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class ModelArch:
    """Fully-connected ReLU classifier given as layer widths in/hidden.../out."""

    widths: tuple[int, ...]

    def __post_init__(self):
        if len(self.widths) < 2:
            raise ValueError("arch needs at least input and output widths")
        if any(w <= 0 for w in self.widths):
            raise ValueError(f"zero-width layer in arch {self.widths}")

    @property
    def manifest(self) -> Manifest:
        return tuple(zip(self.widths[:-1], self.widths[1:]))

    @property
    def n_params(self) -> int:
        return sum(n_in * n_out + n_out for n_in, n_out in self.manifest)

    @property
    def n_features(self) -> int:
        return self.widths[0]

    @property
    def n_classes(self) -> int:
        return self.widths[-1]


@dataclass
class ParameterVector:
    """Flat float32 parameters plus the layer-shape manifest."""

    values: np.ndarray
    manifest: Manifest

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        expected = sum(i * o + o for i, o in self.manifest)
        if self.values.shape != (expected,):
            raise ValueError(
                f"parameter count {self.values.shape} does not match manifest ({expected},)"
            )

    def copy(self) -> "ParameterVector":
        return ParameterVector(self.values.copy(), self.manifest)

    def __len__(self) -> int:
        return int(self.values.shape[0])


@dataclass
class DataShard:
    """Feature matrix with integer class labels."""

    features: np.ndarray  # (n, d) float64
    labels: np.ndarray  # (n,) int64

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("features and labels disagree on sample count")

    def __len__(self) -> int:
        return int(self.labels.shape[0])


@dataclass
class TrainConfig:
    """Local SGD hyper-parameters."""

    lr: float = 0.1
    momentum: float = 0.9
    weight_decay: float = 5e-4
    batch_size: int = 0  # 0 = full batch


def flatten(layers: list[tuple[np.ndarray, np.ndarray]]) -> ParameterVector:
    """Concatenate per-layer row-major weights then biases into one vector."""
    manifest = []
    parts = []
    for w, b in layers:
        if w.ndim != 2 or b.ndim != 1 or b.shape[0] != w.shape[1]:
            raise ValueError(f"bad layer shapes {w.shape}, {b.shape}")
        manifest.append((w.shape[0], w.shape[1]))
        parts.append(np.asarray(w, dtype=np.float32).ravel(order="C"))
        parts.append(np.asarray(b, dtype=np.float32))
    values = np.concatenate(parts) if parts else np.zeros(0, dtype=np.float32)
    return ParameterVector(values, tuple(manifest))


def unflatten(v: ParameterVector) -> list[tuple[np.ndarray, np.ndarray]]:
    """Inverse of flatten; exact, bit-for-bit."""
    layers = []
    pos = 0
    for n_in, n_out in v.manifest:
        w = v.values[pos : pos + n_in * n_out].reshape(n_in, n_out).copy()
        pos += n_in * n_out
        b = v.values[pos : pos + n_out].copy()
        pos += n_out
        layers.append((w, b))
    if pos != v.values.shape[0]:
        raise ValueError("manifest does not cover the value vector")
    return layers


def build_model(arch: ModelArch, seed: int) -> ParameterVector:
    """Deterministic scaled-uniform init (Glorot); biases start at zero."""
    rng = np.random.default_rng(seed)
    layers = []
    for n_in, n_out in arch.manifest:
        limit = np.sqrt(6.0 / (n_in + n_out))
        w = rng.uniform(-limit, limit, size=(n_in, n_out))
        layers.append((w.astype(np.float32), np.zeros(n_out, dtype=np.float32)))
    return flatten(layers)


def _forward(layers, x):
    """Returns per-layer inputs and final logits (float64)."""
    acts = [x]
    h = x
    last = len(layers) - 1
    for i, (w, b) in enumerate(layers):
        h = h @ w + b
        if i != last:
            h = np.maximum(h, 0.0)
        acts.append(h)
    return acts


def _softmax_ce(logits, labels):
    """Mean cross-entropy and d(loss)/d(logits)."""
    z = logits - logits.max(axis=1, keepdims=True)
    ez = np.exp(z)
    p = ez / ez.sum(axis=1, keepdims=True)
    n = labels.shape[0]
    loss = -np.mean(np.log(p[np.arange(n), labels] + 1e-300))
    grad = p.copy()
    grad[np.arange(n), labels] -= 1.0
    return loss, grad / n


def _split64(params: np.ndarray, manifest: Manifest):
    layers = []
    pos = 0
    for n_in, n_out in manifest:
        w = params[pos : pos + n_in * n_out].reshape(n_in, n_out)
        pos += n_in * n_out
        b = params[pos : pos + n_out]
        pos += n_out
        layers.append((w, b))
    return layers


def loss_and_grad(
    params64: np.ndarray, manifest: Manifest, x: np.ndarray, y: np.ndarray
) -> tuple[float, np.ndarray]:
    """Cross-entropy loss and its flat gradient, computed in float64."""
    params64 = np.asarray(params64, dtype=np.float64)
    layers = _split64(params64, manifest)
    acts = _forward(layers, x)
    loss, dlogits = _softmax_ce(acts[-1], np.asarray(y, dtype=np.int64))
    grads = [None] * len(layers)
    delta = dlogits
    for i in range(len(layers) - 1, -1, -1):
        w, _ = layers[i]
        grads[i] = (acts[i].T @ delta, delta.sum(axis=0))
        if i > 0:
            delta = (delta @ w.T) * (acts[i] > 0.0)
    flat_grad = np.concatenate([np.concatenate([gw.ravel(), gb]) for gw, gb in grads])
    return float(loss), flat_grad


def local_train(
    params: ParameterVector,
    shard: DataShard,
    epochs: int,
    cfg: TrainConfig,
    seed: int | tuple = 0,
) -> ParameterVector:
    """Momentum SGD for the given number of epochs; epochs=0 is the identity."""
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    if epochs == 0:
        return params.copy()
    p = params.values.astype(np.float64)
    vel = np.zeros_like(p)
    n = len(shard)
    bs = cfg.batch_size if cfg.batch_size > 0 else n
    rng = np.random.default_rng(seed)
    for _ in range(epochs):
        order = rng.permutation(n) if bs < n else np.arange(n)
        for start in range(0, n, bs):
            idx = order[start : start + bs]
            _, g = loss_and_grad(p, params.manifest, shard.features[idx], shard.labels[idx])
            g += cfg.weight_decay * p
            vel = cfg.momentum * vel + g
            p -= cfg.lr * vel
    return ParameterVector(p.astype(np.float32), params.manifest)


def predict(params: ParameterVector, features: np.ndarray) -> np.ndarray:
    layers = [(w.astype(np.float64), b.astype(np.float64)) for w, b in unflatten(params)]
    return np.argmax(_forward(layers, np.asarray(features, np.float64))[-1], axis=1)


def evaluate(params: ParameterVector, test: DataShard) -> float:
    """Top-1 accuracy on the shard."""
    if len(test) == 0:
        raise ValueError("empty test set")
    return float(np.mean(predict(params, test.features) == test.labels))


def shard_loss(params: ParameterVector, shard: DataShard) -> float:
    loss, _ = loss_and_grad(
        params.values.astype(np.float64), params.manifest, shard.features, shard.labels
    )
    return loss


def make_blobs(
    n_samples: int,
    n_features: int,
    n_classes: int,
    seed: int,
    spread: float = 0.35,
    clusters_per_class: int = 3,
) -> DataShard:
    """Gaussian mixture classes: each class is a union of isotropic blobs.

    Cluster centers are drawn on the unit sphere, so with several clusters
    per class the decision regions are genuinely nonlinear. spread is the
    per-dimension standard deviation around each center; larger values
    overlap the classes and make the task harder.
    """
    if n_samples <= 0 or n_features <= 0 or n_classes <= 0:
        raise ValueError("n_samples, n_features, n_classes must be positive")
    if clusters_per_class <= 0:
        raise ValueError("clusters_per_class must be positive")
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, 1.0, size=(n_classes, clusters_per_class, n_features))
    centers /= np.linalg.norm(centers, axis=2, keepdims=True)
    counts = np.full(n_classes, n_samples // n_classes)
    counts[: n_samples % n_classes] += 1
    xs, ys = [], []
    for c in range(n_classes):
        which = rng.integers(0, clusters_per_class, size=counts[c])
        xs.append(
            centers[c, which] + rng.normal(0.0, spread, size=(counts[c], n_features))
        )
        ys.append(np.full(counts[c], c, dtype=np.int64))
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    order = rng.permutation(n_samples)
    return DataShard(x[order], y[order])


def make_train_test(
    n_train: int,
    n_test: int,
    n_features: int,
    n_classes: int,
    seed: int,
    spread: float = 0.35,
    clusters_per_class: int = 3,
) -> tuple[DataShard, DataShard]:
    """One blob draw split into train/test so both share the class structure."""
    full = make_blobs(
        n_train + n_test, n_features, n_classes, seed, spread, clusters_per_class
    )
    train = DataShard(full.features[:n_train], full.labels[:n_train])
    test = DataShard(full.features[n_train:], full.labels[n_train:])
    return train, test


def partition_dataset(dataset: DataShard, n_learners: int, seed: int) -> list[DataShard]:
    """Shuffle then split into n_learners shards; the last absorbs the remainder."""
    if n_learners < 1:
        raise ValueError("n_learners must be >= 1")
    n = len(dataset)
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    base = n // n_learners
    shards = []
    for i in range(n_learners):
        lo = i * base
        hi = (i + 1) * base if i < n_learners - 1 else n
        idx = order[lo:hi]
        shards.append(DataShard(dataset.features[idx], dataset.labels[idx]))
    return shards


def save_csv(shard: DataShard, path: str) -> None:
    """One row per sample: features..., label."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row, label in zip(shard.features, shard.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def load_csv(path: str) -> DataShard:
    features, labels = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            features.append([float(v) for v in row[:-1]])
            labels.append(int(row[-1]))
    if not labels:
        raise ValueError(f"no samples in {path}")
    return DataShard(np.array(features), np.array(labels))
