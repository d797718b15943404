"""Canonical (u, v) transformation that diagonalises the mean-field
quadratic Hamiltonian of a weakly interacting Bose gas.

At each momentum p != 0 the Hamiltonian has a diagonal weight ``omega + t``
and a pair-creation weight ``t / 2``, where ``omega = p^2/2m`` and
``t = gamma g(p)``.  Everything here is vectorised over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dispersion import PhysicalParams
from .errors import InvalidConfigurationError, SingularModeError


@dataclass(frozen=True)
class QuadraticHamiltonianPoint:
    omega: float | np.ndarray
    t: float | np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.omega) < 0):
            raise InvalidConfigurationError("bogoliubov: omega must be >= 0")


@dataclass(frozen=True)
class BogoliubovCoeffs:
    x: float | np.ndarray
    u: float | np.ndarray
    v: float | np.ndarray


def compensation_x(point: QuadraticHamiltonianPoint):
    """Hyperbolic angle x with ``tanh 2x = t / (omega + t)``.

    Uses ``2x = log(1 + 2t/omega) / 2``, the same quantity written without
    the cancellation in ``1 - tanh 2x``.
    """
    omega = np.asarray(point.omega, dtype=float)
    t = np.asarray(point.t, dtype=float)
    if np.any(t < 0):
        raise InvalidConfigurationError("bogoliubov: coupling t must be >= 0")
    if np.any((omega == 0) & (t > 0)):
        raise SingularModeError("bogoliubov: omega = 0 with t > 0 is the condensate mode")
    with np.errstate(divide="ignore", invalid="ignore"):
        x = 0.25 * np.log1p(np.where(t > 0, 2.0 * t / np.where(omega > 0, omega, 1.0), 0.0))
    return x if x.ndim else float(x)


def coeffs(x) -> BogoliubovCoeffs:
    return BogoliubovCoeffs(x, np.cosh(x), np.sinh(x))


# (u^2 + v^2)/2 - uv = (u - v)^2/2 is used below so that the large, nearly
# equal terms never get subtracted at strong coupling.

def offdiagonal_residual(point: QuadraticHamiltonianPoint, c: BogoliubovCoeffs):
    """Coefficient of ``a*(p) a*(-p)`` after the transformation."""
    u, v = c.u, c.v
    return -u * v * point.omega + 0.5 * (u - v) ** 2 * point.t


def diagonal_coefficient(point: QuadraticHamiltonianPoint, c: BogoliubovCoeffs):
    """Coefficient of ``a*(p) a(p)`` after the transformation."""
    u, v = c.u, c.v
    return (u * u + v * v) * point.omega + (u - v) ** 2 * point.t


def diagonalize(point: QuadraticHamiltonianPoint):
    """Compensated coefficients and the resulting quasiparticle energy."""
    c = coeffs(compensation_x(point))
    return c, diagonal_coefficient(point, c)


def chemical_potential(params: PhysicalParams, g0: float | None = None) -> float:
    """``mu = gamma g(0)``, fixed by stationarity of the condensate energy in N0."""
    if g0 is None:
        g0 = float(params.g(0.0))
    return params.gamma * g0


def ground_state_energy(params: PhysicalParams, N0: float, g0: float | None = None):
    """Return ``(E1, constant)``.

    ``E1 = lambda N0^2 g(0) / 2V - mu N0`` is evaluated at the chemical
    potential above; ``constant = -lambda N0^2 g(0) / 2V`` is the c-number
    left in the diagonal Hamiltonian.  With ``lambda/V = gamma/N0`` both reduce
    to multiples of ``gamma N0 g(0)``.
    """
    if not N0 > 0:
        raise InvalidConfigurationError("bogoliubov: N0 must be positive")
    if g0 is None:
        g0 = float(params.g(0.0))
    half = 0.5 * params.gamma * N0 * g0
    e1 = half - chemical_potential(params, g0) * N0
    return e1, -half
