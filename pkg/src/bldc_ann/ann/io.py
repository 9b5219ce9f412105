"""Plain-text model files and metric-history CSV.

Model file layout::

    mlp 1
    input <width>
    layers <count>
    layer <width> <activation>        (one line per layer)
    W <layer> <rows> <cols>
    <row of W>                        (rows lines, space separated)
    b <layer> <width>
    <bias values>
    ...

Numbers are written with ``repr`` so they round-trip exactly.
"""
from __future__ import annotations

import csv
import io

import numpy as np

from ..errors import IoFailure, ParseFailure
from .network import LayerSpec, Mlp
from .training import EpochMetrics

METRIC_COLUMNS = ("epoch", "train_loss", "val_loss", "train_accuracy", "val_accuracy", "mse", "mae")


def _fmt(values):
    return " ".join(repr(float(v)) for v in values)


def model_to_text(mlp: Mlp) -> str:
    lines = ["mlp 1", f"input {mlp.input_width}", f"layers {len(mlp.layers)}"]
    lines += [f"layer {s.width} {s.activation}" for s in mlp.layers]
    for l, (W, b) in enumerate(zip(mlp.weights, mlp.biases)):
        lines.append(f"W {l} {W.shape[0]} {W.shape[1]}")
        lines += [_fmt(row) for row in W]
        lines.append(f"b {l} {b.shape[0]}")
        lines.append(_fmt(b))
    return "\n".join(lines) + "\n"


def model_from_text(text: str) -> Mlp:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    pos = 0

    def take(prefix):
        nonlocal pos
        if pos >= len(lines):
            raise ParseFailure(f"unexpected end of model file, expected {prefix!r}", row=pos + 1)
        parts = lines[pos].split()
        if parts[0] != prefix:
            raise ParseFailure(f"line {pos + 1}: expected {prefix!r}, got {parts[0]!r}", row=pos + 1)
        pos += 1
        return parts[1:]

    def numbers(count):
        nonlocal pos
        try:
            vals = [float(v) for v in lines[pos].split()]
        except (ValueError, IndexError):
            raise ParseFailure(f"line {pos + 1}: bad number row", row=pos + 1) from None
        if len(vals) != count:
            raise ParseFailure(f"line {pos + 1}: expected {count} values", row=pos + 1)
        pos += 1
        return vals

    if take("mlp") != ["1"]:
        raise ParseFailure("unsupported model format version", row=1)
    input_width = int(take("input")[0])
    n_layers = int(take("layers")[0])
    layers = []
    for _ in range(n_layers):
        width, act = take("layer")
        layers.append(LayerSpec(int(width), act))
    weights, biases = [], []
    for _ in range(n_layers):
        _, rows, cols = (int(v) for v in take("W"))
        weights.append(np.array([numbers(cols) for _ in range(rows)]).reshape(rows, cols))
        _, width = (int(v) for v in take("b"))
        biases.append(np.array(numbers(width)))
    return Mlp(input_width, layers, weights, biases)


def save_model(mlp: Mlp, path) -> None:
    try:
        with open(path, "w") as fh:
            fh.write(model_to_text(mlp))
    except OSError as exc:
        raise IoFailure(f"cannot write model to {path}: {exc}") from exc


def load_model(path) -> Mlp:
    try:
        with open(path) as fh:
            return model_from_text(fh.read())
    except OSError as exc:
        raise IoFailure(f"cannot read model {path}: {exc}") from exc


def metrics_to_csv_text(history) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(METRIC_COLUMNS)
    for m in history:
        writer.writerow([m.epoch] + [f"{getattr(m, c):.9g}" for c in METRIC_COLUMNS[1:]])
    return buf.getvalue()


def export_metrics_csv(history, path) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(metrics_to_csv_text(history))
    except OSError as exc:
        raise IoFailure(f"cannot write metrics to {path}: {exc}") from exc


def import_metrics_csv(path) -> list:
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != METRIC_COLUMNS:
            raise ParseFailure(f"{path}: metrics header mismatch", row=1)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append(EpochMetrics(int(row[0]), *(float(v) for v in row[1:7])))
            except (ValueError, IndexError, TypeError):
                raise ParseFailure(f"{path}: line {lineno} is malformed", row=lineno) from None
    return rows
