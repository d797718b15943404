"""
Condensate weight of an ideal Bose gas
======================================

Below the critical temperature the thermal states can hold only part of the
density; the rest sits in the p = 0 condensate.
"""

import numpy as np

from stochfluid import condensate_fraction, critical_temperature, normal_density

rho, m = 1.0, 1.0

# the critical temperature is where the thermal density alone reaches rho
theta_c = critical_temperature(rho, m)
print(f"theta_c = {theta_c:.8f}")

# sweep the temperature and check that condensate + thermal = rho
print(f"{'theta':>10} {'c':>10} {'thermal':>10} {'sum':>14}")
for theta in np.linspace(0.0, theta_c, 9):
    c = condensate_fraction(theta, rho, m, theta_c).c
    thermal = 0.0 if theta == 0 else normal_density(1.0 / theta, m)
    print(f"{theta:10.5f} {c:10.6f} {thermal:10.6f} {c + thermal:14.11f}")

# above theta_c nothing is condensed
print("c(2 theta_c) =", condensate_fraction(2 * theta_c, rho, m, theta_c).c)
