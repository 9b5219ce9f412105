"""Fully connected network: layer specs, forward pass and backpropagation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ..errors import DimensionMismatch

ACTIVATIONS = ("sigmoid", "softmax", "identity")
LOSSES = ("mse", "binary_cross_entropy")
_EPS = 1e-12
SIGMOID_GAIN = 4.0


@dataclass(frozen=True)
class LayerSpec:
    width: int
    activation: str = "sigmoid"

    def __post_init__(self):
        if int(self.width) != self.width or self.width < 1:
            raise ValueError(f"layer width must be a positive integer, got {self.width!r}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


@dataclass
class Mlp:
    """Weights ``W[l]`` have shape (out, in); biases ``b[l]`` shape (out,)."""

    input_width: int
    layers: list
    weights: list = field(default_factory=list)
    biases: list = field(default_factory=list)

    def __post_init__(self):
        self.layers = [l if isinstance(l, LayerSpec) else LayerSpec(*l) for l in self.layers]
        if not self.layers:
            raise ValueError("network needs at least one layer")
        for spec in self.layers[:-1]:
            if spec.activation == "softmax":
                raise ValueError("softmax is only allowed on the output layer")
        if not self.weights:
            self.weights = [np.zeros((s.width, n)) for s, n in zip(self.layers, self.widths[:-1])]
            self.biases = [np.zeros(s.width) for s in self.layers]
        self._check()

    @property
    def widths(self):
        return [self.input_width] + [s.width for s in self.layers]

    @property
    def output_width(self):
        return self.layers[-1].width

    def _check(self):
        if len(self.weights) != len(self.layers) or len(self.biases) != len(self.layers):
            raise DimensionMismatch("one weight matrix and bias vector per layer required")
        for l, (W, b) in enumerate(zip(self.weights, self.biases)):
            want = (self.widths[l + 1], self.widths[l])
            if W.shape != want or b.shape != (want[0],):
                raise DimensionMismatch(f"layer {l}: W {W.shape}, b {b.shape}, expected {want}")

    @classmethod
    def initialize(cls, input_width, layers, seed=0):
        """Glorot-uniform weights in +/-g*sqrt(6/(fan_in+fan_out)), zero biases.

        g is 4 for sigmoid layers (the sigmoid slope at 0 is 1/4) and 1
        otherwise. Deep narrow sigmoid stacks stall with g = 1.
        """
        rng = np.random.default_rng(seed)
        net = cls(input_width, list(layers))
        for l, W in enumerate(net.weights):
            gain = SIGMOID_GAIN if net.layers[l].activation == "sigmoid" else 1.0
            bound = gain * np.sqrt(6.0 / (W.shape[0] + W.shape[1]))
            net.weights[l] = rng.uniform(-bound, bound, size=W.shape)
        return net

    def copy(self):
        return Mlp(self.input_width, list(self.layers),
                   [W.copy() for W in self.weights], [b.copy() for b in self.biases])

    def parameters(self):
        for W, b in zip(self.weights, self.biases):
            yield W
            yield b


def activate(z, kind):
    if kind == "sigmoid":
        return expit(z)
    if kind == "softmax":
        shifted = z - z.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
        return e / e.sum(axis=-1, keepdims=True)
    if kind == "identity":
        return z
    raise ValueError(f"unknown activation {kind!r}")


def _activation_backward(a, grad, kind):
    """Map dE/da to dE/dz given the layer output ``a``."""
    if kind == "sigmoid":
        return grad * a * (1.0 - a)
    if kind == "softmax":
        return a * (grad - np.sum(grad * a, axis=-1, keepdims=True))
    return grad


def forward(mlp: Mlp, x):
    """Propagate ``x`` (a vector or a batch of row vectors).

    Returns ``(output, activations)`` where ``activations[0]`` is the input
    and ``activations[l + 1]`` the output of layer ``l``.
    """
    a = np.asarray(x, dtype=float)
    if a.shape[-1] != mlp.input_width:
        raise DimensionMismatch(f"input width {a.shape[-1]} != network input {mlp.input_width}")
    acts = [a]
    for spec, W, b in zip(mlp.layers, mlp.weights, mlp.biases):
        a = activate(a @ W.T + b, spec.activation)
        acts.append(a)
    return a, acts


def loss_value(output, target, loss_kind):
    """Batch-mean loss: 0.5*||y - t||^2 per row for mse, summed BCE per row otherwise."""
    y = np.atleast_2d(output)
    t = np.atleast_2d(target)
    if loss_kind == "mse":
        return 0.5 * float(np.mean(np.sum((y - t) ** 2, axis=1)))
    if loss_kind == "binary_cross_entropy":
        y = np.clip(y, _EPS, 1.0 - _EPS)
        return float(np.mean(-np.sum(t * np.log(y) + (1.0 - t) * np.log(1.0 - y), axis=1)))
    raise ValueError(f"unknown loss {loss_kind!r}")


def loss_gradient(output, target, loss_kind):
    y = np.atleast_2d(output)
    t = np.atleast_2d(target)
    n = y.shape[0]
    if loss_kind == "mse":
        return (y - t) / n
    if loss_kind == "binary_cross_entropy":
        y = np.clip(y, _EPS, 1.0 - _EPS)
        return (-t / y + (1.0 - t) / (1.0 - y)) / n
    raise ValueError(f"unknown loss {loss_kind!r}")


def backward(mlp: Mlp, activations, target, loss_kind="mse"):
    """Chain-rule gradients of the batch loss for every layer.

    Returns a list of ``(dW, db)`` aligned with ``mlp.weights``.
    """
    if len(activations) != len(mlp.layers) + 1:
        raise DimensionMismatch("activations do not come from this network")
    out = np.atleast_2d(activations[-1])
    t = np.atleast_2d(np.asarray(target, dtype=float))
    if t.shape != out.shape:
        raise DimensionMismatch(f"target shape {t.shape} != output shape {out.shape}")
    grad = loss_gradient(out, t, loss_kind)
    grads = [None] * len(mlp.layers)
    for l in range(len(mlp.layers) - 1, -1, -1):
        a = np.atleast_2d(activations[l + 1])
        delta = _activation_backward(a, grad, mlp.layers[l].activation)
        a_prev = np.atleast_2d(activations[l])
        grads[l] = (delta.T @ a_prev, delta.sum(axis=0))
        if l:
            grad = delta @ mlp.weights[l]
    return grads
