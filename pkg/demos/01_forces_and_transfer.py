"""
How the atoms feel each other
=============================

Walks through the interaction schedule and the two transfer functions.
"""
import numpy as np

from asofs.binarize import TransferKind, transfer
from asofs.dynamics import DynamicsParams, depth_eta, drift_g, h_bounds, neighbor_count_K, pair_force_scalar

params = DynamicsParams()  # alpha=50, beta=0.2, T=30
T = params.T

# The attraction depth collapses quickly; the neighbourhood shrinks from N to 2.
for t in (1, 5, 10, 20, 30):
    lo, hi = h_bounds(t, params)
    print(f"t={t:2d}  eta={depth_eta(t, params):9.4f}  g={drift_g(t, T):.4f}  "
          f"h in [{lo:.3f}, {hi:.2f}]  K={neighbor_count_K(t, T, 20)}")

# Pair force as a function of scaled distance: repulsive below h ~ 0.89, attractive above.
for h in np.linspace(0.8, 1.3, 6):
    print(f"h={h:.2f}  force={pair_force_scalar(h, 1.0):+.4f}")

# S-shaped gives a probability near 0.5 for small velocity; V-shaped gives near 0.
v = np.array([-6.0, -1.0, 0.0, 1.0, 6.0])
print("S:", np.round(transfer(TransferKind.S_SHAPED, v), 4))
print("V:", np.round(transfer(TransferKind.V_SHAPED, v), 4))
