# %% [markdown]
# Motor model and six-step commutation
#
# The back-EMF of each phase is a trapezoid: flat at +1 for 120 electrical
# degrees, flat at -1 for another 120, linear ramps in between. Phases b and c
# lag a by 120 and 240 degrees.

# %%
import numpy as np

from bldc_ann.drive import HALL_CODES, SECTOR_PAIRS, commutation_table, hall_from_angle
from bldc_ann.motor import MotorParams, MotorState, back_emf_shape, electromagnetic_torque

deg = np.arange(0, 360, 15)
f = back_emf_shape(np.radians(deg))
for d, v in zip(deg, f):
    print(f"{d:4d} deg  {v:+.3f}  " + "#" * int(round(10 * (v + 1))))

# %% [markdown]
# Hall sensors split the revolution into six 60 degree sectors. Each sector
# energizes the two windings that sit on their flat tops, so with a fixed
# current the torque is constant over the whole sector.

# %%
params = MotorParams()
for k, code in enumerate(HALL_CODES):
    hi, lo = SECTOR_PAIRS[k]
    theta = np.radians(60 * k + 30)  # middle of the sector
    g = commutation_table(code)
    i = np.array([10.0 * g[2 * p] - 10.0 * g[2 * p + 1] for p in range(3)])
    te = electromagnetic_torque(MotorState(i, theta), params)
    print(f"sector {k}  hall {code}  {'ABC'[hi]}+ {'ABC'[lo]}-  Te {te:.2f} N*m")

# %%
# brute force over the revolution, including the sector edges
theta = np.linspace(0, 2 * np.pi, 3601)
te = []
for th in theta:
    g = commutation_table(hall_from_angle(th))
    i = [10.0 * g[2 * p] - 10.0 * g[2 * p + 1] for p in range(3)]
    te.append(electromagnetic_torque(MotorState(i, th), params))
print("torque range over one revolution:", min(te), max(te))
