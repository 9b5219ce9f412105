import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bldc_ann.ann.gradcheck import audit, max_relative_error
from bldc_ann.ann.network import (
    SIGMOID_GAIN,
    LayerSpec,
    Mlp,
    activate,
    backward,
    forward,
    loss_value,
)
from bldc_ann.errors import DimensionMismatch


def test_single_identity_layer_by_hand():
    net = Mlp(2, [LayerSpec(1, "identity")], [np.array([[2.0, -1.0]])], [np.array([0.5])])
    out, acts = forward(net, np.array([1.0, 3.0]))
    assert out == pytest.approx([-0.5])
    assert len(acts) == 2


def test_sigmoid_of_zero_is_half():
    net = Mlp(3, [LayerSpec(2, "sigmoid")])
    out, _ = forward(net, np.ones((4, 3)))
    np.testing.assert_array_equal(out, 0.5)


def test_wrong_input_width():
    net = Mlp.initialize(3, [LayerSpec(2)], 0)
    with pytest.raises(DimensionMismatch):
        forward(net, np.ones(4))


def test_softmax_only_on_output():
    with pytest.raises(ValueError):
        Mlp(2, [LayerSpec(3, "softmax"), LayerSpec(1, "identity")])


def test_mismatched_weights_rejected():
    with pytest.raises(DimensionMismatch):
        Mlp(2, [LayerSpec(3)], [np.zeros((3, 3))], [np.zeros(3)])


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, (4, 5), elements=st.floats(-50, 50)), st.floats(-100, 100))
def test_softmax_rows_sum_to_one_and_ignore_shifts(z, c):
    p = activate(z, "softmax")
    np.testing.assert_allclose(p.sum(axis=1), 1.0, rtol=1e-12)
    np.testing.assert_allclose(activate(z + c, "softmax"), p, atol=1e-12)


def test_loss_values_by_hand():
    assert loss_value(np.array([[1.0, 2.0]]), np.zeros((1, 2)), "mse") == pytest.approx(2.5)
    assert loss_value(np.array([[0.5]]), np.array([[1.0]]), "binary_cross_entropy") == \
        pytest.approx(math.log(2))


def test_glorot_bounds_and_seed():
    layers = [LayerSpec(5, "sigmoid"), LayerSpec(2, "identity")]
    a = Mlp.initialize(3, layers, seed=7)
    b = Mlp.initialize(3, layers, seed=7)
    for Wa, Wb in zip(a.weights, b.weights):
        np.testing.assert_array_equal(Wa, Wb)
    assert np.abs(a.weights[0]).max() <= SIGMOID_GAIN * math.sqrt(6 / 8)
    assert np.abs(a.weights[1]).max() <= math.sqrt(6 / 7)
    assert all(not b.any() for b in a.biases)


def test_backward_two_layer_by_hand():
    # y = w2 * sigmoid(w1 x), E = 0.5 (y - t)^2
    w1, w2, x, t = 0.3, -1.2, 2.0, 0.7
    net = Mlp(1, [LayerSpec(1, "sigmoid"), LayerSpec(1, "identity")],
              [np.array([[w1]]), np.array([[w2]])], [np.zeros(1), np.zeros(1)])
    _, acts = forward(net, np.array([[x]]))
    (dw1, db1), (dw2, db2) = backward(net, acts, np.array([[t]]))
    h = 1 / (1 + math.exp(-w1 * x))
    err = w2 * h - t
    assert dw2[0, 0] == pytest.approx(err * h)
    assert db2[0] == pytest.approx(err)
    assert dw1[0, 0] == pytest.approx(err * w2 * h * (1 - h) * x)
    assert db1[0] == pytest.approx(err * w2 * h * (1 - h))


def test_backward_rejects_bad_target():
    net = Mlp.initialize(2, [LayerSpec(3, "identity")], 0)
    _, acts = forward(net, np.ones((2, 2)))
    with pytest.raises(DimensionMismatch):
        backward(net, acts, np.ones((2, 2)))


def test_gradient_audit_covers_all_pairings():
    results = audit(seed=0)
    combos = {(r.hidden, r.output, r.loss) for r in results}
    assert len(combos) == 12
    assert max(r.max_rel_error for r in results) < 1e-6


@pytest.mark.parametrize("seed", range(5))
def test_deep_case_network_gradients(seed):
    rng = np.random.default_rng(seed)
    layers = [LayerSpec(5, "sigmoid") for _ in range(6)] + [LayerSpec(3, "sigmoid")]
    net = Mlp.initialize(3, layers, seed)
    x = rng.integers(0, 2, size=(6, 3)).astype(float)
    t = rng.choice([0.0, 0.5, 1.0], size=(6, 3))
    assert max_relative_error(net, x, t, "mse") < 1e-6
