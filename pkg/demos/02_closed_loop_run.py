# %% [markdown]
# Closed-loop speed control
#
# Default scenario: the reference ramps to 3000 rpm over 20 s while the load
# ramps to 12 N*m over 50 s. The PI loop sets the PWM duty every 200 us and the
# RK4 integrator runs at 20 us. Outputs go to ``demo_out/``.

# %%
import os
import time

import numpy as np

from bldc_ann import svg
from bldc_ann.sim import SimConfig, run_simulation, summarize
from bldc_ann.trace import export_csv

out = "demo_out"
os.makedirs(out, exist_ok=True)

t0 = time.perf_counter()
trace = run_simulation(SimConfig())
print(f"{len(trace)} rows in {time.perf_counter() - t0:.1f} s (first call includes compilation)")

# %%
s = summarize(trace)
print("settled within 1% at", s.settle_time, "s")
print("final speed", round(s.final_speed_rpm, 3), "rpm, load", s.final_load_torque, "N*m")
print("mean Te", round(s.mean_te, 4), "vs TL + B*w", round(s.expected_te, 4))

# %%
export_csv(trace, os.path.join(out, "trace.csv"))
t = trace["t"]
fig = svg.render([
    svg.Panel("speed", "rpm").add(t, trace["speed_ref"], "reference").add(t, trace["speed_actual"], "actual"),
    svg.Panel("torque", "N*m").add(t, trace["te"], "Te").add(t, trace["load_torque"], "load"),
    svg.Panel("duty", "").add(t, trace["duty"]),
], title="default run")
with open(os.path.join(out, "run.svg"), "w") as fh:
    fh.write(fig)

# %% [markdown]
# The trace is logged every 10 ms, much slower than the commutation, so the
# Hall and EMF columns look scrambled over time. A constant-speed run logged
# at every control step shows the real sequence.

# %%
from bldc_ann.sim import Profile, rpm_to_rad

fine = run_simulation(SimConfig(t_end=0.1, log_step=200e-6,
                                reference_profile=Profile(((0, rpm_to_rad(1000)),)),
                                load_profile=Profile(((0, 1.0),))))
hall = np.column_stack([fine[c] for c in ("hall_a", "hall_b", "hall_c")]).astype(int)
print(hall[-40:].T)
