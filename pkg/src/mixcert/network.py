"""Bias-free feed-forward classifiers and their margin losses.

Layers are plain matrices applied right-to-left with 1-Lipschitz activations
fixing 0 (relu, leaky_relu, tanh, identity); no bias terms anywhere, so the
zero input always maps to the zero vector. Labels are 1-indexed. Training
minimizes a softmax cross-entropy surrogate with minibatch SGD; the margin
and ramp-loss functions here are what the certificates consume.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadLabel,
    DimensionMismatch,
    DivergedLoss,
    EmptyDataset,
    NonpositiveGamma,
    WrongKind,
)
from .process import KIND_TARGET, LabeledDataset
from .seeding import substream

_ACTIVATION_KINDS = ("relu", "leaky_relu", "tanh", "identity")
SURROGATE_CE = "softmax_cross_entropy"


@dataclass(frozen=True)
class Activation:
    """Elementwise nonlinearity; slope only meaningful for leaky_relu."""

    kind: str
    slope: float = 0.0

    def __post_init__(self):
        if self.kind not in _ACTIVATION_KINDS:
            raise ValueError(f"unknown activation {self.kind!r}")
        if self.kind == "leaky_relu" and not 0.0 < self.slope < 1.0:
            raise ValueError("leaky_relu slope must lie in (0, 1)")
        object.__setattr__(self, "slope", float(self.slope))

    @classmethod
    def parse(cls, name: str) -> "Activation":
        if name.startswith("leaky_relu"):
            slope = float(name.split(":", 1)[1]) if ":" in name else 0.01
            return cls("leaky_relu", slope)
        return cls(name)

    def name(self) -> str:
        if self.kind == "leaky_relu":
            return f"leaky_relu:{repr(self.slope)}"
        return self.kind

    @property
    def lipschitz(self) -> float:
        return 1.0

    def apply(self, z: np.ndarray) -> np.ndarray:
        if self.kind == "relu":
            return np.maximum(z, 0.0)
        if self.kind == "leaky_relu":
            return np.where(z > 0.0, z, self.slope * z)
        if self.kind == "tanh":
            return np.tanh(z)
        return z

    def derivative(self, z: np.ndarray) -> np.ndarray:
        if self.kind == "relu":
            return (z > 0.0).astype(np.float64)
        if self.kind == "leaky_relu":
            return np.where(z > 0.0, 1.0, self.slope)
        if self.kind == "tanh":
            t = np.tanh(z)
            return 1.0 - t * t
        return np.ones_like(z)


@dataclass(frozen=True, eq=False)
class NetworkParams:
    """Weight matrices applied first-to-last with their activations."""

    layers: tuple
    activations: tuple

    def __post_init__(self):
        layers = tuple(np.asarray(W, dtype=np.float64) for W in self.layers)
        if not layers:
            raise ValueError("need at least one layer")
        acts = tuple(a if isinstance(a, Activation) else Activation.parse(a)
                     for a in self.activations)
        if len(acts) != len(layers):
            raise DimensionMismatch("one activation per layer")
        for i, W in enumerate(layers):
            if W.ndim != 2:
                raise DimensionMismatch(f"layer {i} must be a matrix")
            if not np.all(np.isfinite(W)):
                raise ValueError(f"layer {i} has non-finite entries")
            if i and W.shape[1] != layers[i - 1].shape[0]:
                raise DimensionMismatch(
                    f"layer {i} expects {W.shape[1]} inputs, previous emits "
                    f"{layers[i - 1].shape[0]}")
        frozen = []
        for W in layers:
            W = W.copy()
            W.setflags(write=False)
            frozen.append(W)
        object.__setattr__(self, "layers", tuple(frozen))
        object.__setattr__(self, "activations", acts)

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.layers[-1].shape[0]

    @property
    def width(self) -> int:
        """Largest axis length over every weight matrix (inputs included)."""
        return max(max(W.shape) for W in self.layers)

    def save(self, path) -> None:
        """Text format: "L", then per layer a "rows cols" line followed by
        `rows` lines of repr floats (row-major), then one line with the
        activation names. Bit exact under load()."""
        lines = [str(self.num_layers)]
        for W in self.layers:
            lines.append(f"{W.shape[0]} {W.shape[1]}")
            for row in W:
                lines.append(" ".join(repr(float(v)) for v in row))
        lines.append(" ".join(a.name() for a in self.activations))
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "NetworkParams":
        with open(path, "r", encoding="ascii") as fh:
            raw = fh.read().split("\n")
        L = int(raw[0])
        layers = []
        pos = 1
        for _ in range(L):
            rows, cols = (int(v) for v in raw[pos].split())
            pos += 1
            W = np.zeros((rows, cols))
            for r in range(rows):
                entries = raw[pos].split()
                if len(entries) != cols:
                    raise ValueError(f"layer row at line {pos + 1} has wrong arity")
                W[r] = [float(v) for v in entries]
                pos += 1
            layers.append(W)
        acts = tuple(Activation.parse(name) for name in raw[pos].split())
        return cls(layers=tuple(layers), activations=acts)


@dataclass(frozen=True)
class Architecture:
    """Dimension chain d_0..d_L plus an activation name per layer."""

    dims: tuple
    activations: tuple

    def __post_init__(self):
        dims = tuple(int(v) for v in self.dims)
        if len(dims) < 2 or any(v < 1 for v in dims):
            raise ValueError("dims must list at least input and output sizes, all >= 1")
        acts = tuple(str(a) for a in self.activations)
        if len(acts) != len(dims) - 1:
            raise DimensionMismatch("one activation per layer")
        for a in acts:
            Activation.parse(a)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "activations", acts)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float
    epochs: int
    batch_size: int
    seed: int
    init_scale: float | None = None

    def __post_init__(self):
        if self.learning_rate < 0.0:
            raise ValueError("learning_rate must be >= 0")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.init_scale is not None and self.init_scale <= 0.0:
            raise ValueError("init_scale must be > 0 when given")


@dataclass(frozen=True)
class TrainResult:
    params: NetworkParams
    epoch_losses: tuple


@dataclass(frozen=True)
class PopulationEstimate:
    """Plug-in losses on an iid stationary sample with a two-sided
    Hoeffding half-width sqrt(ln(2/delta_est) / (2m))."""

    ramp_loss: float
    zero_one_loss: float
    halfwidth: float
    sample_size: int
    delta_est: float


def forward(params: NetworkParams, x: np.ndarray) -> np.ndarray:
    """Network output for a single input vector."""
    v = np.asarray(x, dtype=np.float64).reshape(-1)
    if v.shape[0] != params.input_dim:
        raise DimensionMismatch(
            f"input has dim {v.shape[0]}, network expects {params.input_dim}")
    for W, act in zip(params.layers, params.activations):
        v = act.apply(W @ v)
    return v


def forward_batch(params: NetworkParams, X: np.ndarray) -> np.ndarray:
    Z = np.asarray(X, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[1] != params.input_dim:
        raise DimensionMismatch("inputs must be (n, input_dim)")
    for W, act in zip(params.layers, params.activations):
        Z = act.apply(Z @ W.T)
    return Z


def margin(v: np.ndarray, j: int) -> float:
    """Score gap v_j - max_{i != j} v_i for 1-indexed class j."""
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    K = v.shape[0]
    if K < 2:
        raise BadLabel("margins need at least two classes")
    if not 1 <= j <= K:
        raise BadLabel(f"label {j} outside 1..{K}")
    others = np.delete(v, j - 1)
    return float(v[j - 1] - others.max())


def margins_batch(logits: np.ndarray, labels: np.ndarray) -> np.ndarray:
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    K = logits.shape[1]
    if K < 2:
        raise BadLabel("margins need at least two classes")
    if labels.size and (labels.min() < 1 or labels.max() > K):
        raise BadLabel(f"labels must lie in 1..{K}")
    idx = np.arange(logits.shape[0])
    true = logits[idx, labels - 1]
    masked = logits.copy()
    masked[idx, labels - 1] = -np.inf
    return true - masked.max(axis=1)


def ramp_loss(r, gamma: float):
    """Piecewise-linear loss: 1 for r >= 0, 0 for r <= -gamma, linear
    in between; 1/gamma-Lipschitz and confined to [0, 1]."""
    if gamma <= 0.0:
        raise NonpositiveGamma("gamma must be > 0")
    arr = np.asarray(r, dtype=np.float64)
    out = np.clip(1.0 + np.minimum(arr, 0.0) / gamma, 0.0, 1.0)
    if np.isscalar(r) or arr.ndim == 0:
        return float(out)
    return out


def empirical_loss(params: NetworkParams, data: LabeledDataset, gamma: float) -> float:
    """Mean ramp loss of negated margins over the dataset."""
    if data.n == 0:
        raise EmptyDataset("empirical loss needs at least one sample")
    margins = margins_batch(forward_batch(params, data.inputs), data.labels)
    return float(np.mean(ramp_loss(-margins, gamma)))


def zero_one_loss(params: NetworkParams, data: LabeledDataset) -> float:
    """Fraction of samples whose margin is not strictly positive; argmax
    ties therefore count as errors."""
    if data.n == 0:
        raise EmptyDataset("zero-one loss needs at least one sample")
    margins = margins_batch(forward_batch(params, data.inputs), data.labels)
    return float(np.mean(margins <= 0.0))


def population_estimate(params: NetworkParams, target: LabeledDataset,
                        gamma: float, delta_est: float = 0.01) -> PopulationEstimate:
    """Plug-in stationary losses from an iid target sample."""
    if target.kind != KIND_TARGET:
        raise WrongKind(f"population estimates need a {KIND_TARGET!r} dataset")
    if target.n == 0:
        raise EmptyDataset("population estimate needs at least one sample")
    if not 0.0 < delta_est < 1.0:
        raise ValueError("delta_est must lie in (0, 1)")
    margins = margins_batch(forward_batch(params, target.inputs), target.labels)
    halfwidth = math.sqrt(math.log(2.0 / delta_est) / (2.0 * target.n))
    return PopulationEstimate(
        ramp_loss=float(np.mean(ramp_loss(-margins, gamma))),
        zero_one_loss=float(np.mean(margins <= 0.0)),
        halfwidth=halfwidth,
        sample_size=target.n,
        delta_est=delta_est,
    )


def _ce_forward(layers, acts, X):
    pre = []
    post = [X]
    for W, act in zip(layers, acts):
        a = post[-1] @ W.T
        pre.append(a)
        post.append(act.apply(a))
    logits = post[-1]
    shift = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shift).sum(axis=1))
    return pre, post, shift, lse


def surrogate_loss(params: NetworkParams, inputs: np.ndarray, labels: np.ndarray,
                   surrogate: str = SURROGATE_CE) -> float:
    """Mean softmax cross-entropy of the batch (the training objective)."""
    if surrogate != SURROGATE_CE:
        raise ValueError(f"unknown surrogate {surrogate!r}")
    X = np.asarray(inputs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if X.shape[0] == 0:
        raise EmptyDataset("surrogate loss needs at least one sample")
    _, _, shift, lse = _ce_forward(params.layers, params.activations, X)
    true = shift[np.arange(X.shape[0]), y - 1]
    return float(np.mean(lse - true))


def gradient(params: NetworkParams, inputs: np.ndarray, labels: np.ndarray,
             surrogate: str = SURROGATE_CE) -> list:
    """Exact gradient of the mean surrogate loss, one array per layer."""
    if surrogate != SURROGATE_CE:
        raise ValueError(f"unknown surrogate {surrogate!r}")
    X = np.asarray(inputs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    n = X.shape[0]
    if n == 0:
        raise EmptyDataset("gradient needs at least one sample")
    layers, acts = params.layers, params.activations
    pre, post, shift, _ = _ce_forward(layers, acts, X)
    expv = np.exp(shift)
    probs = expv / expv.sum(axis=1, keepdims=True)
    onehot = np.zeros_like(probs)
    onehot[np.arange(n), y - 1] = 1.0
    d_post = (probs - onehot) / n
    grads: list = [None] * len(layers)
    for i in range(len(layers) - 1, -1, -1):
        d_pre = d_post * acts[i].derivative(pre[i])
        grads[i] = d_pre.T @ post[i]
        if i:
            d_post = d_pre @ layers[i]
    return grads


def train_sgd(train_data: LabeledDataset, arch: Architecture,
              config: TrainConfig) -> TrainResult:
    """Minibatch SGD on softmax cross-entropy.

    Weights start uniform in [-a, a] with a = init_scale, or 1/sqrt(fan_in)
    per layer when init_scale is None. Batch order is drawn from the config
    seed, so identical configs give bit-identical weights. Raises
    DivergedLoss the moment any batch loss stops being finite.
    """
    if train_data.n == 0:
        raise EmptyDataset("training needs at least one sample")
    dims = arch.dims
    if dims[0] != train_data.input_dim:
        raise DimensionMismatch(
            f"architecture expects inputs of dim {dims[0]}, data has {train_data.input_dim}")
    if dims[-1] != train_data.num_classes:
        raise DimensionMismatch(
            f"architecture emits {dims[-1]} scores, data has {train_data.num_classes} classes")
    acts = tuple(Activation.parse(a) for a in arch.activations)
    rng = substream(config.seed, 0)
    layers = []
    for d_in, d_out in zip(dims, dims[1:]):
        a = config.init_scale if config.init_scale is not None else 1.0 / math.sqrt(d_in)
        layers.append(rng.uniform(-a, a, size=(d_out, d_in)))

    X, y = train_data.inputs, train_data.labels
    n = train_data.n
    epoch_losses = []
    for _ in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            take = order[start:start + config.batch_size]
            Xb, yb = X[take], y[take]
            pre, post, shift, lse = _ce_forward(layers, acts, Xb)
            true = shift[np.arange(take.size), yb - 1]
            batch_loss = float(np.mean(lse - true))
            if not math.isfinite(batch_loss):
                raise DivergedLoss(f"surrogate loss became {batch_loss}")
            total += batch_loss * take.size
            expv = np.exp(shift)
            probs = expv / expv.sum(axis=1, keepdims=True)
            probs[np.arange(take.size), yb - 1] -= 1.0
            d_post = probs / take.size
            for i in range(len(layers) - 1, -1, -1):
                d_pre = d_post * acts[i].derivative(pre[i])
                if i:
                    d_post = d_pre @ layers[i]
                layers[i] = layers[i] - config.learning_rate * (d_pre.T @ post[i])
        epoch_losses.append(total / n)
    params = NetworkParams(layers=tuple(layers), activations=acts)
    return TrainResult(params=params, epoch_losses=tuple(epoch_losses))
