"""
Critical velocities
===================

Flow at speed u can shed an excitation k only if that lowers the energy.
The critical velocity is the infimum of (E(k) + k^2/2m) / |k|.
"""

import numpy as np

from stochfluid import (BogoliubovBulk, Free, Polaron, Radiative, critical_velocity,
                        stability_margin)
from stochfluid.landau import unstable_modes

m = 1.0
models = {
    "phonons c=2": Radiative(2.0),
    "free particles": Free(m),
    "bogoliubov": BogoliubovBulk(m, 1.0),
    "polaron w0=2": Polaron(2.0),
}
for name, model in models.items():
    r = critical_velocity(model, m)
    where = "k -> 0" if r.at_zero else f"|k| = {r.argmin_k:.4f}"
    print(f"{name:16s} v_c = {r.v_c:.6f} at {where}")

# for the gapped law the quick sufficient bound sqrt(w0) sits below the true threshold
r = critical_velocity(Polaron(2.0), m)
print(f"polaron: sqrt(w0) = {r.simple_bound:.4f} < v_c = {r.v_c:.4f}")

# a free gas is unstable at any speed: some k always has a negative margin
u = np.array([0.05, 0.0, 0.0])
bad = unstable_modes(u, Free(m), m)
print(f"free gas at |u| = 0.05: {bad.size} unstable magnitudes, e.g. k = {bad[0]:.3g}",
      "margin", stability_margin(u, np.array([bad[0], 0, 0]), Free(m), m))
