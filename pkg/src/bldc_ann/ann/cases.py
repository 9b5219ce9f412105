"""The four trace-to-signal prediction setups.

=====  ===========================================  ============  =======
case   inputs -> targets                            layers total  hidden
=====  ===========================================  ============  =======
1      load torque, Te, speed ref -> actual speed    7             sigmoid
2      phase-a back-EMF -> phase-a current           16            sigmoid
3      Hall a,b,c -> EMF level a,b,c                 8             sigmoid
4      PWM a..f -> EMF level a,b,c                   8             sigmoid
=====  ===========================================  ============  =======

Layer counts include the input and output layers; every hidden layer is 5
wide. Cases 1-2 regress a continuous signal through an identity output
(``softmax_output=True`` swaps in a softmax output layer instead). Cases 3-4
use a sigmoid output and predict the three-level EMF class mapped from
{-1, 0, 1} to {0, 0.5, 1}.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import MissingColumn
from ..trace import EMF_NORM_COLUMNS, HALL_COLUMNS, PWM_COLUMNS, Trace
from .network import LayerSpec, Mlp, forward
from .training import CaseDataset, ColumnScaler, TrainConfig, split_dataset

HIDDEN_WIDTH = 5
EMF_LEVELS = (-1.0, 0.0, 1.0)
FLAT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class CaseSpec:
    inputs: tuple
    targets: tuple
    total_layers: int
    discrete: bool


CASES = {
    1: CaseSpec(("load_torque", "te", "speed_ref"), ("speed_actual",), 7, False),
    2: CaseSpec(("ea",), ("ia",), 16, False),
    3: CaseSpec(HALL_COLUMNS, EMF_NORM_COLUMNS, 8, True),
    4: CaseSpec(PWM_COLUMNS, EMF_NORM_COLUMNS, 8, True),
}


# per-case optimiser settings; every case trains 100 epochs on an 80:20 split.
# The regressions use larger batches and a decaying step so the training
# loss falls smoothly instead of jittering around its floor.
CASE_TRAINING = {
    1: dict(optimizer="adam", learning_rate=1e-3, lr_decay=0.05, batch_size=128),
    2: dict(optimizer="adam", learning_rate=1e-3, lr_decay=0.05, batch_size=128),
    3: dict(optimizer="adam", learning_rate=1e-2),
    4: dict(optimizer="adam", learning_rate=1e-2),
}


def case_train_config(case_id: int, **overrides) -> TrainConfig:
    """Default :class:`TrainConfig` for a case, with keyword overrides."""
    if case_id not in CASES:
        raise ValueError(f"case id must be one of {sorted(CASES)}, got {case_id!r}")
    return TrainConfig(**{**CASE_TRAINING[case_id], **overrides})


def emf_level(shape_values):
    """Three-level EMF class: +1 on the positive flat, -1 on the negative flat, 0 on a ramp."""
    v = np.asarray(shape_values, dtype=float)
    return np.where(v >= 1.0 - FLAT_TOLERANCE, 1.0, np.where(v <= -1.0 + FLAT_TOLERANCE, -1.0, 0.0))


def case_layers(case_id: int, softmax_output: bool = False) -> list:
    spec = CASES[case_id]
    hidden = [LayerSpec(HIDDEN_WIDTH, "sigmoid") for _ in range(spec.total_layers - 2)]
    if spec.discrete:
        out = "sigmoid"
    else:
        out = "softmax" if softmax_output else "identity"
    return hidden + [LayerSpec(len(spec.targets), out)]


def _column(trace, name):
    try:
        return np.asarray(trace[name], dtype=float)
    except KeyError:
        raise MissingColumn(f"trace has no column {name!r}") from None


def build_case(case_id: int, trace: Trace, split_fraction: float = 0.8, seed: int = 0,
               softmax_output: bool = False):
    """Assemble the dataset and layer list for one case.

    Continuous columns are min-max scaled with parameters fitted on the
    training rows only. Returns ``(CaseDataset, layers)``.
    """
    if case_id not in CASES:
        raise ValueError(f"case id must be one of {sorted(CASES)}, got {case_id!r}")
    spec = CASES[case_id]
    x = np.column_stack([_column(trace, c) for c in spec.inputs])
    y = np.column_stack([_column(trace, c) for c in spec.targets])
    part = split_dataset(len(x), split_fraction, seed)
    if spec.discrete:
        x_scaler = ColumnScaler.identity(x.shape[1])
        y = emf_level(y)
        y_scaler = ColumnScaler(np.full(y.shape[1], -1.0), np.full(y.shape[1], 2.0))
        levels = tuple(float(v) for v in (np.array(EMF_LEVELS) + 1.0) / 2.0)
    else:
        x_scaler = ColumnScaler.fit_minmax(x[part.train])
        y_scaler = ColumnScaler.fit_minmax(y[part.train])
        levels = None
    times = np.asarray(trace["t"], dtype=float) if "t" in trace else None
    data = CaseDataset(
        x_scaler.transform(x), y_scaler.transform(y), part, x_scaler, y_scaler, levels,
        input_names=spec.inputs, target_names=spec.targets, times=times,
    )
    return data, case_layers(case_id, softmax_output)


def initial_network(case_id: int, data: CaseDataset, layers, seed: int = 0) -> Mlp:
    return Mlp.initialize(data.inputs.shape[1], layers, seed)


def predict_case(mlp: Mlp, data: CaseDataset) -> dict:
    """Prediction and target series for every row, back in original units."""
    out, _ = forward(mlp, data.inputs)
    series = {"prediction": data.target_scaler.inverse(out),
              "target": data.target_scaler.inverse(data.targets)}
    if data.times is not None:
        series["t"] = data.times
    return series
