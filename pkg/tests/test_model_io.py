import numpy as np
import pytest

from bldc_ann.ann.io import (
    export_metrics_csv,
    import_metrics_csv,
    load_model,
    model_from_text,
    model_to_text,
    save_model,
)
from bldc_ann.ann.network import LayerSpec, Mlp, forward
from bldc_ann.ann.training import EpochMetrics
from bldc_ann.errors import IoFailure, ParseFailure


def _net():
    return Mlp.initialize(3, [LayerSpec(5, "sigmoid"), LayerSpec(2, "softmax")], 4)


def test_model_round_trip_is_exact(tmp_path):
    net = _net()
    path = tmp_path / "m.txt"
    save_model(net, path)
    back = load_model(path)
    assert back.layers == net.layers
    for a, b in zip(net.parameters(), back.parameters()):
        np.testing.assert_array_equal(a, b)
    x = np.random.default_rng(0).normal(size=(4, 3))
    np.testing.assert_array_equal(forward(net, x)[0], forward(back, x)[0])


def test_model_text_is_stable():
    assert model_to_text(_net()) == model_to_text(_net())


@pytest.mark.parametrize("mangle", [
    lambda s: s.replace("mlp 1", "mlp 2"),
    lambda s: s.replace("layer 5 sigmoid", "neuron 5 sigmoid"),
    lambda s: "\n".join(s.splitlines()[:-1]),
    lambda s: s.replace("W 0 5 3", "W 0 5 4"),
])
def test_corrupt_model_text(mangle):
    with pytest.raises(ParseFailure):
        model_from_text(mangle(model_to_text(_net())))


def test_missing_model_file(tmp_path):
    with pytest.raises(IoFailure):
        load_model(tmp_path / "none.txt")


def test_metrics_round_trip(tmp_path):
    hist = [EpochMetrics(1, 0.5, 0.6, 0.7, 0.65, 1.25, 0.9),
            EpochMetrics(2, 0.25, 0.3, 0.8, 0.75, 0.5, 0.6)]
    path = tmp_path / "metrics.csv"
    export_metrics_csv(hist, path)
    assert path.read_text().splitlines()[0] == \
        "epoch,train_loss,val_loss,train_accuracy,val_accuracy,mse,mae"
    assert import_metrics_csv(path) == hist


def test_bad_metrics_file(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("epoch,loss\n1,2\n")
    with pytest.raises(ParseFailure):
        import_metrics_csv(path)
