"""Ideal Bose gas in three dimensions: occupations, the thermal (normal)
density, the critical temperature and the condensate weight below it.

Units: hbar = k_B = 1, plain ``d^3p`` measure without ``(2 pi)^-3``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .errors import DivergentOccupationError, InvalidConfigurationError

ZETA_3_2 = float(special.zeta(1.5))


@dataclass(frozen=True)
class CondensateState:
    theta: float
    theta_c: float
    c: float
    rho: float

    @property
    def fraction(self) -> float:
        return self.c / self.rho


def bose_occupation(omega, beta: float, mu: float = 0.0):
    """Bose-Einstein occupation ``1 / (exp(beta (omega - mu)) - 1)``."""
    if mu > 0:
        raise InvalidConfigurationError("condensation: chemical potential must be <= 0")
    gap = np.asarray(omega, dtype=float) - mu
    if np.any(gap <= 0):
        raise DivergentOccupationError("condensation: occupation diverges for omega <= mu")
    with np.errstate(over="ignore"):
        out = 1.0 / np.expm1(beta * gap)
    return out if out.ndim else float(out)


def normal_density(beta: float, m: float = 1.0) -> float:
    """Thermal density ``int d^3p / (exp(beta p^2/2m) - 1)`` by radial quadrature."""
    if not beta > 0:
        raise InvalidConfigurationError("condensation: beta must be positive")
    if np.isinf(beta):
        return 0.0
    scale = np.sqrt(2.0 * m / beta)  # p = scale * s turns the exponent into s^2

    def integrand(s):
        if s == 0.0:
            return 4.0 * np.pi  # limit of 4 pi s^2 / expm1(s^2)
        return 4.0 * np.pi * s * s / np.expm1(s * s)

    # integrand is monotone decreasing with peak 4 pi at s = 0; below 1e-16 of it past s ~ 6.3
    s_max = 1.0
    while integrand(s_max) > 1e-16 * 4.0 * np.pi:
        s_max *= 1.25
    value, _ = integrate.quad(integrand, 0.0, s_max, epsabs=0.0, epsrel=1e-12, limit=200)
    return float(value * scale ** 3)


def normal_density_closed_form(beta: float, m: float = 1.0) -> float:
    return (2.0 * np.pi * m / beta) ** 1.5 * ZETA_3_2


def critical_temperature(rho: float, m: float = 1.0, rtol: float = 1e-10) -> float:
    """Temperature at which the thermal density alone exhausts ``rho``."""
    if not rho > 0:
        raise InvalidConfigurationError("condensation: rho must be positive")
    # normal_density(1/theta) grows like theta^(3/2); bracket the root first
    lo, hi = 1.0, 1.0
    while normal_density(1.0 / lo, m) > rho:
        lo *= 0.5
    while normal_density(1.0 / hi, m) < rho:
        hi *= 2.0
    return float(optimize.bisect(lambda th: normal_density(1.0 / th, m) - rho, lo, hi,
                                 xtol=1e-300, rtol=max(rtol, 4 * np.finfo(float).eps),
                                 maxiter=500))


def condensate_fraction(theta: float, rho: float, m: float = 1.0,
                        theta_c: float | None = None) -> CondensateState:
    """Condensate weight ``c = rho (1 - (theta/theta_c)^(3/2))``, zero above theta_c."""
    if theta < 0:
        raise InvalidConfigurationError("condensation: temperature must be >= 0")
    if theta_c is None:
        theta_c = critical_temperature(rho, m)
    c = rho * (1.0 - (theta / theta_c) ** 1.5) if theta < theta_c else 0.0
    return CondensateState(float(theta), float(theta_c), float(c), float(rho))


def conservation_residual(state: CondensateState, m: float = 1.0) -> float:
    """Relative defect of ``c + normal_density = rho`` (meaningful for theta <= theta_c)."""
    thermal = 0.0 if state.theta == 0 else normal_density(1.0 / state.theta, m)
    return abs(state.c + thermal - state.rho) / state.rho
