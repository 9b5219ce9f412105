# %% [markdown]
# Four prediction cases on the simulator trace
#
# 1. load torque, Te, speed reference -> speed
# 2. phase-a back-EMF -> phase-a current
# 3. Hall bits -> EMF level of each phase
# 4. switch enable bits -> EMF level of each phase
#
# Needs ``demo_out/trace.csv`` from 02_closed_loop_run.py.

# %%
import os
import time

import numpy as np

from bldc_ann import svg
from bldc_ann.ann.cases import build_case, case_train_config, initial_network
from bldc_ann.ann.training import train
from bldc_ann.trace import import_csv

out = "demo_out"
trace = import_csv(os.path.join(out, "trace.csv"))

histories = {}
for case in (1, 2, 3, 4):
    cfg = case_train_config(case)
    data, layers = build_case(case, trace, cfg.split_fraction, cfg.seed)
    net = initial_network(case, data, layers, cfg.seed)
    t0 = time.perf_counter()
    net, hist = train(net, data, cfg)
    histories[case] = hist
    m = hist[-1]
    _, y_va = data.validation_arrays()
    y_va = data.target_scaler.inverse(y_va)
    base = np.mean((y_va - y_va.mean(axis=0)) ** 2)
    print(f"case {case}: {len(layers) + 1} layers, {time.perf_counter() - t0:.1f} s, "
          f"val acc {m.val_accuracy:.4f}, val mse {m.mse:.4g} (mean baseline {base:.4g})")

# %%
panel = svg.Panel("validation accuracy", "")
for case, hist in histories.items():
    panel.add([m.epoch for m in hist], [m.val_accuracy for m in hist], f"case {case}")
with open(os.path.join(out, "accuracy.svg"), "w") as fh:
    fh.write(svg.render([panel], title="validation accuracy per epoch", xlabel="epoch"))
