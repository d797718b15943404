"""Landau stability of a condensate flowing through its own excitations.

A condensate particle moving with velocity ``u`` that emits an excitation of
momentum ``k`` changes the energy by ``E(k) - u.k + k^2/2m``.  Flow is stable
when that balance is positive for every k; the largest such |u| is the
critical velocity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .dispersion import DispersionModel, Polaron, _norm, _norm2
from .errors import InvalidConfigurationError


def stability_margin(u, k, model: DispersionModel, m: float):
    u = np.asarray(u, dtype=float)
    k = np.asarray(k, dtype=float)
    dot = u * k if u.ndim == 0 and k.ndim == 0 else np.sum(u * k, axis=-1)
    return model.energy(k) - dot + _norm2(k) / (2.0 * m)


@dataclass(frozen=True)
class StabilityReport:
    v_c: float
    argmin_k: float | None  # None: infimum approached as k -> 0
    simple_bound: float | None = None  # cruder closed-form sufficient threshold, if any

    @property
    def at_zero(self) -> bool:
        return self.argmin_k is None

    def is_superfluid_at(self, u) -> bool:
        return bool(_norm(u) < self.v_c)


def _threshold(model, m, kabs):
    kabs = np.asarray(kabs, dtype=float)
    return (model.radial(kabs) + kabs * kabs / (2.0 * m)) / kabs


def default_k_grid(k_min: float = 1e-4, k_max: float = 1e2, count: int = 2000) -> np.ndarray:
    return np.geomspace(k_min, k_max, count)


def critical_velocity(model: DispersionModel, m: float, k_grid=None) -> StabilityReport:
    """Infimum over |k| of ``(E(k) + k^2/2m) / |k|``.

    By isotropy the worst direction is k parallel to u, so a scan over
    magnitudes suffices.  An interior grid minimum is polished with a
    golden-section search; a minimum at the smallest magnitude is taken to
    be the k -> 0 limit and extrapolated (Richardson, even powers dropped
    after the linear term).
    """
    k_grid = default_k_grid() if k_grid is None else np.sort(np.asarray(k_grid, dtype=float))
    if k_grid.size == 0:
        raise InvalidConfigurationError("landau: empty k grid")
    if np.any(k_grid <= 0):
        raise InvalidConfigurationError("landau: k grid must hold positive magnitudes")
    values = _threshold(model, m, k_grid)
    i = int(np.argmin(values))
    simple = float(np.sqrt(model.omega0)) if isinstance(model, Polaron) else None

    if i == 0:
        h = k_grid[0]
        v = _threshold(model, m, [h, h / 2.0, h / 4.0])
        # v(k) = v0 + a k + b k^2 + ...; kill the two leading corrections
        r1 = 2.0 * v[1] - v[0]
        r2 = 2.0 * v[2] - v[1]
        v0 = (4.0 * r2 - r1) / 3.0
        return StabilityReport(max(float(v0), 0.0), None, simple)
    if i == k_grid.size - 1:
        return StabilityReport(float(values[i]), float(k_grid[i]), simple)

    res = optimize.minimize_scalar(
        lambda s: float(_threshold(model, m, s)),
        bracket=(k_grid[i - 1], k_grid[i], k_grid[i + 1]),
        method="golden", tol=1e-12)
    v_c = min(float(res.fun), float(values[i]))
    k_star = float(res.x) if res.fun <= values[i] else float(k_grid[i])
    return StabilityReport(v_c, k_star, simple)


def unstable_modes(u, model: DispersionModel, m: float, k_grid=None) -> np.ndarray:
    """Magnitudes on ``k_grid`` where emission along u lowers the energy."""
    k_grid = default_k_grid() if k_grid is None else np.asarray(k_grid, dtype=float)
    speed = float(_norm(u))
    margin = model.radial(k_grid) - speed * k_grid + k_grid ** 2 / (2.0 * m)
    return k_grid[margin < 0]
