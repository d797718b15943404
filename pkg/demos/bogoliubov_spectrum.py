"""
Bogoliubov quasiparticles
=========================

A hyperbolic rotation of each (p, -p) mode pair removes the pair-creation
terms of the mean-field Hamiltonian.  What remains is a phonon-like
spectrum that is linear at small momentum.
"""

import numpy as np

from stochfluid import (BogoliubovBulk, InteractionKernel, PhysicalParams,
                        QuadraticHamiltonianPoint, sound_speed)
from stochfluid.bogoliubov import chemical_potential, diagonalize, offdiagonal_residual

params = PhysicalParams(m=1.0, gamma=1.0, g=InteractionKernel("gaussian", 1.0, 2.0))
p = np.geomspace(1e-3, 10.0, 9)

omega = p ** 2 / (2 * params.m)
t = params.gamma * params.g(p[:, None])
point = QuadraticHamiltonianPoint(omega, t)
coeffs, energy = diagonalize(point)

# the off-diagonal coefficient should vanish to rounding
print(f"{'p':>8} {'u':>10} {'v':>10} {'E(p)':>12} {'E/p':>8} {'offdiag':>10}")
for row in zip(p, coeffs.u, coeffs.v, energy, energy / p, offdiagonal_residual(point, coeffs)):
    print("{:8.3g} {:10.5f} {:10.5f} {:12.6g} {:8.5f} {:10.1e}".format(*row))

model = BogoliubovBulk.from_params(params)
print("sound speed:", sound_speed(model))
print("chemical potential mu = gamma g(0):", chemical_potential(params))
