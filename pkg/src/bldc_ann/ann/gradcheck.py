"""Finite-difference audit of the backpropagation gradients."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .network import LayerSpec, Mlp, backward, forward, loss_value

# below this magnitude gradients are compared in absolute terms
GRAD_FLOOR = 1e-4


def numerical_gradients(mlp: Mlp, x, target, loss_kind="mse", eps=1e-5):
    """Central differences of the batch loss for every weight and bias."""
    net = mlp.copy()
    grads = []
    for W, b in zip(net.weights, net.biases):
        pair = []
        for p in (W, b):
            g = np.zeros_like(p)
            for i in range(p.size):
                old = p.flat[i]
                p.flat[i] = old + eps
                up = loss_value(forward(net, x)[0], target, loss_kind)
                p.flat[i] = old - eps
                down = loss_value(forward(net, x)[0], target, loss_kind)
                p.flat[i] = old
                g.flat[i] = (up - down) / (2.0 * eps)
            pair.append(g)
        grads.append(tuple(pair))
    return grads


def max_relative_error(mlp: Mlp, x, target, loss_kind="mse", eps=1e-5) -> float:
    """Largest ``|analytic - numeric| / max(|analytic|, |numeric|, GRAD_FLOOR)``."""
    _, acts = forward(mlp, x)
    analytic = backward(mlp, acts, target, loss_kind)
    numeric = numerical_gradients(mlp, x, target, loss_kind, eps)
    worst = 0.0
    for pa, pn in zip(analytic, numeric):
        for a, n in zip(pa, pn):
            denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), GRAD_FLOOR)
            worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


class AuditResult(NamedTuple):
    hidden: str
    output: str
    loss: str
    max_rel_error: float


def _random_case(rng, hidden, output, loss_kind):
    n_in, n_out, batch = 3, 3, 4
    layers = [LayerSpec(4, hidden), LayerSpec(4, hidden), LayerSpec(n_out, output)]
    net = Mlp.initialize(n_in, layers, int(rng.integers(2**31)))
    for b in net.biases:
        b[:] = rng.normal(scale=0.3, size=b.shape)
    x = rng.uniform(-1.0, 1.0, size=(batch, n_in))
    if output == "identity" and loss_kind == "binary_cross_entropy":
        # keep the identity outputs inside (0, 1) where cross-entropy is defined
        net.biases[-1][:] = 0.5
        while np.any(np.abs(forward(net, x)[0] - 0.5) > 0.25):
            net.weights[-1] *= 0.5
    if output == "softmax":
        t = rng.dirichlet(np.ones(n_out), size=batch)
    elif loss_kind == "binary_cross_entropy":
        t = rng.uniform(size=(batch, n_out))
    else:
        t = rng.normal(size=(batch, n_out))
    return net, x, t


def audit(seed=0, trials=3, eps=1e-5):
    """Check every hidden/output activation and loss pairing on random 3-layer nets."""
    rng = np.random.default_rng(seed)
    results = []
    for hidden in ("sigmoid", "identity"):
        for output in ("sigmoid", "softmax", "identity"):
            for loss_kind in ("mse", "binary_cross_entropy"):
                worst = 0.0
                for _ in range(trials):
                    net, x, t = _random_case(rng, hidden, output, loss_kind)
                    worst = max(worst, max_relative_error(net, x, t, loss_kind, eps))
                results.append(AuditResult(hidden, output, loss_kind, worst))
    return results
