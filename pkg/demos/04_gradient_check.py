# %% [markdown]
# Checking backprop against finite differences
#
# Central differences with eps = 1e-5 on small random networks, for every
# hidden/output activation and loss pairing. Gradients smaller than 1e-4 are
# compared in absolute terms.

# %%
import numpy as np

from bldc_ann.ann.gradcheck import audit, max_relative_error
from bldc_ann.ann.network import LayerSpec, Mlp

for r in audit(seed=0):
    print(f"{r.hidden:9s} -> {r.output:9s} {r.loss:21s} {r.max_rel_error:.2e}")

# %%
# the deep narrow stack used for the discrete cases
rng = np.random.default_rng(1)
net = Mlp.initialize(3, [LayerSpec(5) for _ in range(6)] + [LayerSpec(3)], seed=1)
x = rng.integers(0, 2, size=(8, 3)).astype(float)
t = rng.choice([0.0, 0.5, 1.0], size=(8, 3))
print("8-layer net:", max_relative_error(net, x, t))
