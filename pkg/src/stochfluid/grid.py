"""Uniform cell-centred momentum grids, densities on them, and the
Gaussian-regularised energy delta."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import GridMismatchError, InvalidConfigurationError

_SQRT_2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class MomentumGrid:
    """Cartesian box ``[-q_max, q_max]^d`` split into ``n_points`` cells per axis.

    Nodes sit at cell centres, so the grid is exactly symmetric under
    ``q -> -q`` and differences of two nodes are integer multiples of the
    spacing.
    """

    dim: int
    q_max: float
    n_points: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise InvalidConfigurationError(f"grid: dimension d must be 1, 2 or 3, got {self.dim}")
        if not np.isfinite(self.q_max) or self.q_max <= 0:
            raise InvalidConfigurationError(f"grid: q_max must be positive, got {self.q_max}")
        if int(self.n_points) != self.n_points or self.n_points < 2 or self.n_points % 2:
            raise InvalidConfigurationError(
                f"grid: points per axis N must be an even integer >= 2, got {self.n_points}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.q_max / self.n_points

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_points,) * self.dim

    @property
    def size(self) -> int:
        return self.n_points ** self.dim

    @cached_property
    def axis(self) -> np.ndarray:
        # (i - (N-1)/2) is an exact half-integer, so the axis is exactly antisymmetric
        return (np.arange(self.n_points) - (self.n_points - 1) / 2.0) * self.spacing

    @cached_property
    def nodes(self) -> np.ndarray:
        """Node coordinates, shape ``grid.shape + (dim,)``."""
        mesh = np.meshgrid(*([self.axis] * self.dim), indexing="ij")
        return np.stack(mesh, axis=-1)

    @property
    def flat_nodes(self) -> np.ndarray:
        return self.nodes.reshape(-1, self.dim)

    @cached_property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.nodes, axis=-1)

    def to_dict(self) -> dict:
        return {"d": self.dim, "q_max": float(self.q_max), "N": int(self.n_points)}


def make_grid(d: int, q_max: float, N: int) -> MomentumGrid:
    return MomentumGrid(d, float(q_max), N)


@dataclass(frozen=True, eq=False)
class DensityField:
    """Nonnegative condensate density ``n(q)`` sampled on a grid."""

    grid: MomentumGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise GridMismatchError(
                f"density shape {values.shape} does not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidConfigurationError("density contains NaN or inf")
        if np.any(values < 0):
            raise InvalidConfigurationError(f"density is negative (min {values.min():.3g})")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: MomentumGrid, func) -> "DensityField":
        """Sample ``func(q)``, where ``q`` has shape ``(..., dim)``."""
        return cls(grid, func(grid.nodes))

    @classmethod
    def zeros(cls, grid: MomentumGrid) -> "DensityField":
        return cls(grid, np.zeros(grid.shape))

    def with_values(self, values) -> "DensityField":
        return DensityField(self.grid, values)

    @property
    def max(self) -> float:
        return float(self.values.max())


def integrate(field: DensityField) -> float:
    """Midpoint rule: sum of values times the cell volume."""
    return float(field.values.sum() * field.grid.cell_volume)


def mollified_delta(x, sigma: float):
    """Normalised Gaussian approximation of the Dirac delta, width ``sigma``."""
    if not sigma > 0:
        raise InvalidConfigurationError(f"mollifier width sigma must be positive, got {sigma}")
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * (x / sigma) ** 2) / (sigma * _SQRT_2PI)


def default_sigma(grid: MomentumGrid, m: float) -> float:
    """Four times the kinetic energy carried by one cell width, ``4 * dq^2 / 2m``."""
    return 4.0 * grid.spacing ** 2 / (2.0 * m)


def check_same_grid(*grids: MomentumGrid) -> MomentumGrid:
    first = grids[0]
    for g in grids[1:]:
        if g != first:
            raise GridMismatchError(f"grids differ: {first} vs {g}")
    return first
