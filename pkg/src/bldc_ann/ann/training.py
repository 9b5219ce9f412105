"""Dataset split, metrics and the mini-batch SGD training loop."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..errors import DimensionMismatch, NonFiniteLoss, ShapeMismatch, TooFewRows
from .network import LOSSES, Mlp, backward, forward, loss_value

TOLERANCE_FRACTION = 0.02
OPTIMIZERS = ("sgd", "adam")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    split_fraction: float = 0.8
    learning_rate: float = 0.05
    batch_size: int = 32
    loss: str = "mse"
    seed: int = 0
    optimizer: str = "sgd"
    # epoch k (from 1) steps with learning_rate / (1 + lr_decay * (k - 1))
    lr_decay: float = 0.0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not 0.0 < self.split_fraction < 1.0:
            raise ValueError("split_fraction must lie strictly between 0 and 1")
        if self.learning_rate < 0 or not math.isfinite(self.learning_rate):
            raise ValueError("learning_rate must be a finite non-negative number")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}")
        if not self.lr_decay >= 0:
            raise ValueError("lr_decay must be non-negative")

    def rate(self, epoch: int) -> float:
        return self.learning_rate / (1.0 + self.lr_decay * (epoch - 1))


@dataclass(frozen=True)
class ColumnScaler:
    """Per-column affine map ``(x - offset) / span`` into the training scale."""

    offset: np.ndarray
    span: np.ndarray

    @classmethod
    def identity(cls, width):
        return cls(np.zeros(width), np.ones(width))

    @classmethod
    def fit_minmax(cls, values):
        lo = values.min(axis=0)
        span = values.max(axis=0) - lo
        return cls(lo, np.where(span > 0, span, 1.0))

    def transform(self, values):
        return (np.asarray(values, dtype=float) - self.offset) / self.span

    def inverse(self, values):
        return np.asarray(values, dtype=float) * self.span + self.offset


class Partition(NamedTuple):
    train: np.ndarray
    validation: np.ndarray


def split_dataset(rows, split_fraction=0.8, seed=0) -> Partition:
    """Seeded shuffle of row indices, then ceil(f*n) training rows and the rest."""
    n = rows if isinstance(rows, (int, np.integer)) else len(rows)
    if n < 2:
        raise TooFewRows(f"need at least 2 rows to split, got {n}")
    order = np.random.default_rng(seed).permutation(n)
    n_train = min(max(math.ceil(split_fraction * n - 1e-9), 1), n - 1)
    return Partition(np.sort(order[:n_train]), np.sort(order[n_train:]))


@dataclass
class CaseDataset:
    """Inputs and targets already in the training scale, plus the split.

    ``levels`` lists the discrete values a target can take (training scale);
    None marks continuous targets, scored with a tolerance band instead.
    """

    inputs: np.ndarray
    targets: np.ndarray
    partition: Partition
    input_scaler: ColumnScaler = None
    target_scaler: ColumnScaler = None
    levels: tuple | None = None
    tolerance: np.ndarray | None = None
    input_names: tuple = ()
    target_names: tuple = ()
    times: np.ndarray | None = None

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        self.targets = np.asarray(self.targets, dtype=float)
        if self.targets.ndim == 1:
            self.targets = self.targets[:, None]
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise DimensionMismatch("inputs and targets need the same number of rows")
        if self.input_scaler is None:
            self.input_scaler = ColumnScaler.identity(self.inputs.shape[1])
        if self.target_scaler is None:
            self.target_scaler = ColumnScaler.identity(self.targets.shape[1])
        if self.tolerance is None and self.levels is None:
            span = self.targets.max(axis=0) - self.targets.min(axis=0)
            self.tolerance = TOLERANCE_FRACTION * np.where(span > 0, span, 1.0)

    @classmethod
    def from_arrays(cls, inputs, targets, split_fraction=0.8, seed=0, **kwargs):
        inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
        return cls(inputs, targets, split_dataset(len(inputs), split_fraction, seed), **kwargs)

    def train_arrays(self):
        idx = self.partition.train
        return self.inputs[idx], self.targets[idx]

    def validation_arrays(self):
        idx = self.partition.validation
        return self.inputs[idx], self.targets[idx]


class Metrics(NamedTuple):
    loss: float
    accuracy: float
    mse: float
    mae: float


def nearest_level(values, levels):
    levels = np.asarray(levels, dtype=float)
    return levels[np.argmin(np.abs(np.asarray(values)[..., None] - levels), axis=-1)]


def metrics(predictions, targets, loss_kind="mse", levels=None, tolerance=None) -> Metrics:
    """Loss, accuracy, MSE and MAE over every element.

    With ``levels`` accuracy is the share of elements whose prediction rounds
    to the target's level; otherwise the share within ``tolerance`` (scalar
    or per column; default 2% of each target column's range).
    """
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(targets, dtype=float)
    if p.shape != t.shape:
        raise ShapeMismatch(f"predictions {p.shape} vs targets {t.shape}")
    p2 = p.reshape(len(p), -1) if p.ndim else p.reshape(1, 1)
    t2 = t.reshape(p2.shape)
    resid = p2 - t2
    if levels is not None:
        acc = float(np.mean(nearest_level(p2, levels) == nearest_level(t2, levels)))
    else:
        if tolerance is None:
            span = t2.max(axis=0) - t2.min(axis=0)
            tolerance = TOLERANCE_FRACTION * np.where(span > 0, span, 1.0)
        acc = float(np.mean(np.abs(resid) <= tolerance))
    return Metrics(loss_value(p2, t2, loss_kind), acc, float(np.mean(resid ** 2)),
                   float(np.mean(np.abs(resid))))


@dataclass(frozen=True)
class EpochMetrics:
    """One row of the training history.

    ``mse``/``mae`` are validation errors in the original target units.
    """

    epoch: int
    train_loss: float
    val_loss: float
    train_accuracy: float
    val_accuracy: float
    mse: float
    mae: float


def evaluate(mlp: Mlp, data: CaseDataset, loss_kind="mse"):
    """Return (train Metrics, validation Metrics, validation mse, mae in target units)."""
    x_tr, y_tr = data.train_arrays()
    x_va, y_va = data.validation_arrays()
    p_tr, _ = forward(mlp, x_tr)
    p_va, _ = forward(mlp, x_va)
    m_tr = metrics(p_tr, y_tr, loss_kind, data.levels, data.tolerance)
    m_va = metrics(p_va, y_va, loss_kind, data.levels, data.tolerance)
    resid = data.target_scaler.inverse(p_va) - data.target_scaler.inverse(y_va)
    return m_tr, m_va, float(np.mean(resid ** 2)), float(np.mean(np.abs(resid)))


def sgd_step(mlp: Mlp, x, y, learning_rate, loss_kind="mse"):
    """One in-place gradient step on the batch ``(x, y)``."""
    _, acts = forward(mlp, x)
    for l, (dW, db) in enumerate(backward(mlp, acts, y, loss_kind)):
        mlp.weights[l] -= learning_rate * dW
        mlp.biases[l] -= learning_rate * db


class Adam:
    """Adam update rule (beta1 0.9, beta2 0.999, eps 1e-8) over a network's parameters."""

    def __init__(self, mlp: Mlp, learning_rate, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = learning_rate
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in mlp.parameters()]
        self.v = [np.zeros_like(p) for p in mlp.parameters()]
        self.t = 0

    def step(self, mlp: Mlp, x, y, loss_kind="mse"):
        _, acts = forward(mlp, x)
        grads = [g for pair in backward(mlp, acts, y, loss_kind) for g in pair]
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(mlp.parameters(), grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def train(mlp: Mlp, data: CaseDataset, cfg: TrainConfig = TrainConfig(), progress=None):
    """Mini-batch training for ``cfg.epochs`` epochs; returns (trained copy, history).

    Rows are reshuffled every epoch with a generator seeded by ``cfg.seed``;
    metrics on both partitions are recorded after each epoch.
    """
    if data.inputs.shape[1] != mlp.input_width or data.targets.shape[1] != mlp.output_width:
        raise DimensionMismatch(
            f"dataset {data.inputs.shape[1]}->{data.targets.shape[1]} does not fit network "
            f"{mlp.input_width}->{mlp.output_width}")
    net = mlp.copy()
    rng = np.random.default_rng(cfg.seed)
    x_tr, y_tr = data.train_arrays()
    if len(x_tr) == 0:
        raise DimensionMismatch("empty training partition")
    adam = Adam(net, cfg.learning_rate) if cfg.optimizer == "adam" else None
    history = []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(x_tr))
        lr = cfg.rate(epoch)
        if adam is not None:
            adam.lr = lr
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            if adam is None:
                sgd_step(net, x_tr[idx], y_tr[idx], lr, cfg.loss)
            else:
                adam.step(net, x_tr[idx], y_tr[idx], cfg.loss)
        m_tr, m_va, mse, mae = evaluate(net, data, cfg.loss)
        if not (math.isfinite(m_tr.loss) and math.isfinite(m_va.loss)):
            raise NonFiniteLoss(f"loss became non-finite at epoch {epoch}; lower the learning rate")
        row = EpochMetrics(epoch, m_tr.loss, m_va.loss, m_tr.accuracy, m_va.accuracy, mse, mae)
        history.append(row)
        if progress is not None:
            progress(row)
    return net, history
