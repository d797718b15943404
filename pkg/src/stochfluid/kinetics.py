"""Master equations for the condensate density n(q) coupled to a bath of
quasiparticles, and the quadratic kinetic equation obtained when the
condensate is used as its own background occupation.

Discretisation
--------------
Momentum transfers k run over the lattice ``s * dq`` (s integer, s != 0), so
``q - k`` and ``q + k`` are grid nodes whenever they lie in the box; terms
whose partner falls outside contribute nothing.  The energy delta is the
Gaussian of width ``sigma``.  Every collision couples an ordered pair
``(q, q - k)``: the particle at ``q`` emits an excitation ``k`` and lands at
``q - k``.  With

    W(q, q-k) = 2 pi |f(k, q)|^2 delta_sigma(E(k) + eps(q-k) - eps(q)) dq^d

both master equations are sums of pair fluxes ``F`` added at ``q`` and
subtracted at ``q - k``; the two integral terms of the continuum equation
are the two ends of the same flux, which makes total number conservation
exact up to rounding.

Small grids (``size <= DENSE_LIMIT``) keep W as a dense matrix; larger ones
evaluate it block by block for each lattice shift.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from .dispersion import (BogoliubovBulk, DispersionModel, FormFactor, PhysicalParams,
                         epsilon, sound_speed)
from .errors import (DivergenceError, GridMismatchError, InvalidConfigurationError,
                     ModelInconsistencyError, NoSoundSpeedError, StepSizeError)
from .grid import DensityField, MomentumGrid, default_sigma, integrate, mollified_delta

DENSE_LIMIT = 1024
BLOCK_CACHE_LIMIT = 2 ** 24  # weights kept in memory between evaluations (128 MB)
TWO_PI = 2.0 * np.pi


class _SelfConsistent:
    def __repr__(self):
        return "SELF_CONSISTENT"


#: Occupation placeholder meaning "use the evolving density itself".
SELF_CONSISTENT = _SelfConsistent()


def _default_model(params: PhysicalParams) -> DispersionModel:
    return BogoliubovBulk.from_params(params)


# -- rate kernel ------------------------------------------------------------

def _thermal(energy, beta):
    """Return ``(n+, 1 + n+)`` for excitation energies (zero-temperature safe)."""
    energy = np.asarray(energy, dtype=float)
    if np.isfinite(beta) and np.any(energy <= 0):
        raise ModelInconsistencyError("kinetics: E(k) must be positive for k != 0 at finite temperature")
    with np.errstate(over="ignore", divide="ignore"):
        nplus = 1.0 / np.expm1(beta * energy)
    return nplus, 1.0 + nplus


class RateKernel:
    """Transition weights W(q, q-k) and thermal factors for one configuration.

    ``W``, ``nplus`` and ``offshell`` are dense ``(M, M)`` matrices indexed
    ``[destination q, source q - k]`` when the grid is small enough; otherwise
    ``blocks()`` yields the same quantities per lattice shift.
    """

    def __init__(self, grid: MomentumGrid, model: DispersionModel, m: float,
                 form_factor: FormFactor, sigma: float, beta: float = np.inf,
                 dense: bool | None = None):
        if not sigma > 0:
            raise InvalidConfigurationError(f"kinetics: mollifier width sigma_E must be positive, got {sigma}")
        self.grid = grid
        self.model = model
        self.m = float(m)
        self.form_factor = form_factor
        self.sigma = float(sigma)
        self.beta = float(beta)
        self.dense = grid.size <= DENSE_LIMIT if dense is None else dense
        self.W = self.nplus = self.offshell = None
        self._cached_blocks = None
        if self.dense:
            self._build_dense()

    def _build_dense(self):
        q = self.grid.flat_nodes
        k = q[:, None, :] - q[None, :, :]
        energy = self.model.energy(k)
        eps = epsilon(q, self.m)
        x = energy + eps[None, :] - eps[:, None]
        W = TWO_PI * self.form_factor.weight(k, q[:, None, :]) * mollified_delta(x, self.sigma)
        W *= self.grid.cell_volume
        np.fill_diagonal(W, 0.0)
        np.fill_diagonal(energy, 1.0)  # k = 0 is excluded; keeps the thermal factor finite
        nplus, _ = _thermal(energy, self.beta)
        np.fill_diagonal(nplus, 0.0)
        np.fill_diagonal(x, np.inf)
        self.W, self.nplus, self.offshell = W, nplus, x
        self.antisym = W.T - W

    def blocks(self, offshell: bool = True):
        """Yield ``(dst, src, W, nplus, offshell)`` for every lattice shift s != 0
        with a nonzero weight somewhere.

        ``dst`` and ``src`` are tuples of slices into the grid-shaped arrays
        such that ``nodes[src] = nodes[dst] - k``.  Without ``offshell`` the
        energy mismatch is replaced by None, and the weights are computed once
        and kept if they fit in ``BLOCK_CACHE_LIMIT`` entries.
        """
        if offshell or self._cached_blocks is False:
            return self._generate_blocks()
        if self._cached_blocks is None:
            return self._fill_cache()
        return iter(self._cached_blocks)

    def _fill_cache(self):
        kept, size = [], 0
        for dst, src, W, nplus, _ in self._generate_blocks():
            size += W.size
            if size > BLOCK_CACHE_LIMIT:
                self._cached_blocks, kept = False, None
            elif kept is not None:
                kept.append((dst, src, W, nplus, None))
            yield dst, src, W, nplus, None
        if kept is not None:
            self._cached_blocks = kept

    def _generate_blocks(self):
        grid = self.grid
        N, dq = grid.n_points, grid.spacing
        nodes, axis = grid.nodes, grid.axis
        eps = epsilon(nodes, self.m)
        shifts = np.array(list(itertools.product(range(-(N - 1), N), repeat=grid.dim)))
        shifts = shifts[np.any(shifts != 0, axis=1)]
        ks = shifts * dq
        energies = np.asarray(self.model.energy(ks), dtype=float)
        nplus_all, _ = _thermal(energies, self.beta)

        # x = E(k) + k^2/2m - q.k/m on a block, and q.k ranges over a box whose
        # corners are the first and last destination nodes along each axis
        first = np.where(shifts >= 0, axis[np.clip(shifts, 0, None)], axis[0])
        last = np.where(shifts >= 0, axis[-1], axis[N - 1 + np.clip(shifts, None, 0)])
        lo = np.minimum(first * ks, last * ks).sum(axis=1) / self.m
        hi = np.maximum(first * ks, last * ks).sum(axis=1) / self.m
        base = energies + np.sum(ks * ks, axis=1) / (2.0 * self.m)
        # beyond 39 sigma the Gaussian underflows to exactly zero
        reach = 39.0 * self.sigma + 1e-9 * (np.abs(base) + np.abs(lo) + np.abs(hi))
        live = (base - hi <= reach) & (base - lo >= -reach)

        scale = TWO_PI * grid.cell_volume
        constant = self.form_factor.kind == "constant"
        if constant:
            scale *= abs(self.form_factor.amplitude) ** 2
        for s, k, energy, nplus in zip(shifts[live], ks[live], energies[live], nplus_all[live]):
            dst = tuple(slice(a, N) if a >= 0 else slice(0, N + a) for a in s)
            src = tuple(slice(0, N - a) if a >= 0 else slice(-a, N) for a in s)
            x = energy + eps[src] - eps[dst]
            delta = mollified_delta(x, self.sigma)
            if not delta.any():
                continue
            W = scale * delta if constant else scale * self.form_factor.weight(k, nodes[dst]) * delta
            yield dst, src, W, float(nplus), x

    def row(self, index: int):
        """Weights, thermal factors and energy mismatch for destination node ``index``.

        Returns flat arrays over source nodes; the ``index`` entry itself is zero.
        """
        q = self.grid.flat_nodes
        k = q[index] - q
        energy = self.model.energy(k)
        x = energy + epsilon(q, self.m) - epsilon(q[index], self.m)
        W = TWO_PI * self.grid.cell_volume * self.form_factor.weight(k, q[index]) \
            * mollified_delta(x, self.sigma)
        W[index] = 0.0
        energy[index] = 1.0
        nplus, _ = _thermal(energy, self.beta)
        nplus[index] = 0.0
        x[index] = np.inf
        return W, nplus, x


@lru_cache(maxsize=4)
def _cached_kernel(grid, model, m, form_factor, sigma, beta):
    return RateKernel(grid, model, m, form_factor, sigma, beta)


def rate_kernel(grid: MomentumGrid, model: DispersionModel, m: float, form_factor: FormFactor,
                sigma: float, beta: float = np.inf) -> RateKernel:
    """Memoised ``RateKernel`` constructor (all inputs are immutable)."""
    return _cached_kernel(grid, model, float(m), form_factor, float(sigma), float(beta))


# -- reservoir and the linear equation --------------------------------------

@dataclass(frozen=True)
class ReservoirSpec:
    """Bath description for the linear equation.

    ``occupation`` is the background condensate occupation N(p): ``None``
    (empty), a number, a grid-shaped array, a ``DensityField``, a callable of
    momenta, or ``SELF_CONSISTENT``.  ``unity`` is the 1 in ``N + 1``.
    ``dispersion`` defaults to the Bogoliubov law of the physical params.
    """

    beta: float
    occupation: object = None
    dispersion: DispersionModel | None = None
    unity: float = 1.0

    def __post_init__(self):
        if not self.beta > 0:
            raise InvalidConfigurationError(f"kinetics: reservoir beta must be positive, got {self.beta}")

    def resolve(self, n: DensityField) -> np.ndarray:
        """Grid values of ``N(p) + unity``."""
        occ = self.occupation
        grid = n.grid
        if occ is None:
            values = np.zeros(grid.shape)
        elif occ is SELF_CONSISTENT:
            values = n.values
        elif isinstance(occ, DensityField):
            if occ.grid != grid:
                raise GridMismatchError("kinetics: reservoir occupation lives on another grid")
            values = occ.values
        elif callable(occ):
            values = np.asarray(occ(grid.nodes), dtype=float)
        else:
            values = np.asarray(occ, dtype=float)
            if values.ndim == 0:
                values = np.full(grid.shape, float(values))
        if values.shape != grid.shape:
            raise GridMismatchError("kinetics: reservoir occupation does not match the grid")
        if np.any(values < 0):
            raise InvalidConfigurationError("kinetics: reservoir occupation must be >= 0")
        return values + self.unity


def apply_identification(reservoir: ReservoirSpec, drop_unity: bool = True) -> ReservoirSpec:
    """Replace the background occupation by the condensate density itself.

    With ``drop_unity`` the ``N + 1`` factors become ``N`` as well (large
    occupation), which turns the linear equation into the quadratic one.
    """
    return replace(reservoir, occupation=SELF_CONSISTENT,
                   unity=0.0 if drop_unity else reservoir.unity)


def _kernel_for(n, model, params, sigma, beta, kernel):
    if kernel is not None:
        if kernel.grid != n.grid:
            raise GridMismatchError("kinetics: kernel and density live on different grids")
        return kernel
    return rate_kernel(n.grid, model, params.m, params.f, sigma, beta)


def _linear_flux_sum(kernel: RateKernel, n: np.ndarray, a: np.ndarray) -> np.ndarray:
    if kernel.dense:
        nf, af = n.ravel(), a.ravel()
        G = kernel.W * kernel.nplus
        L = kernel.W + G
        out = af * (G @ nf) - nf * (L @ af) - nf * (G.T @ af) + af * (L.T @ nf)
        return out.reshape(n.shape)
    out = np.zeros(n.shape)
    for dst, src, W, nplus, _ in kernel.blocks(offshell=False):
        F = W * (n[src] * a[dst] * nplus - n[dst] * a[src] * (1.0 + nplus))
        out[dst] += F
        out[src] -= F
    return out


def linear_rhs(n: DensityField, reservoir: ReservoirSpec, params: PhysicalParams,
               sigma: float | None = None, kernel: RateKernel | None = None) -> np.ndarray:
    """Rate of change of n(q) with the bath held at occupation N(p).

    Gain from q - k with stimulated factor ``(N(q) + 1) n+(k)``, loss by
    emission with ``(N(q-k) + 1)(1 + n+(k))``, and the mirror terms with
    q + k.  Returns a grid-shaped array.
    """
    sigma = default_sigma(n.grid, params.m) if sigma is None else sigma
    model = reservoir.dispersion or _default_model(params)
    kernel = _kernel_for(n, model, params, sigma, reservoir.beta, kernel)
    return _linear_flux_sum(kernel, n.values, reservoir.resolve(n))


def nonlinear_rhs(n: DensityField, params: PhysicalParams, sigma: float | None = None,
                  model: DispersionModel | None = None, *, bose_factors: bool = False,
                  kernel: RateKernel | None = None) -> np.ndarray:
    """Quadratic kinetic equation ``dn(q)/dt``.

        -2 pi sum_k [ |f(k,q)|^2 d(E(k)+eps(q-k)-eps(q)) n(q) n(q-k)
                    - |f(k,q+k)|^2 d(E(k)+eps(q)-eps(q+k)) n(q) n(q+k) ] dk

    With ``bose_factors`` the +1 of the occupation factors is kept, i.e. the
    linear equation with N := n; thermal factors then no longer cancel.
    """
    sigma = default_sigma(n.grid, params.m) if sigma is None else sigma
    model = model or _default_model(params)
    if bose_factors:
        kernel = _kernel_for(n, model, params, sigma, params.beta, kernel)
        return _linear_flux_sum(kernel, n.values, n.values + 1.0)
    kernel = _kernel_for(n, model, params, sigma, np.inf, kernel)
    return _quadratic_flux_sum(kernel, n.values)


def _quadratic_flux_sum(kernel: RateKernel, v: np.ndarray) -> np.ndarray:
    if kernel.dense:
        nf = v.ravel()
        return (nf * (kernel.antisym @ nf)).reshape(v.shape)
    out = np.zeros(v.shape)
    for dst, src, W, _, _ in kernel.blocks(offshell=False):
        F = W * v[dst] * v[src]
        out[dst] -= F
        out[src] += F
    return out


def emission_loss_rate(n: DensityField, reservoir: ReservoirSpec, params: PhysicalParams,
                       sigma: float, indices) -> np.ndarray:
    """Coefficient of -n(p) in the emission (q -> q - k) term of the linear
    equation, ``2 pi sum_k |f|^2 d(...) (N(p-k) + 1)(1 + n+(k)) dk``, at the
    given flat node indices."""
    model = reservoir.dispersion or _default_model(params)
    kernel = RateKernel(n.grid, model, params.m, params.f, sigma, reservoir.beta, dense=False)
    a = reservoir.resolve(n).ravel()
    out = []
    for i in np.atleast_1d(indices):
        W, nplus, _ = kernel.row(int(i))
        out.append(np.sum(W * a * (1.0 + nplus)))
    return np.array(out)


# -- superfluidity ----------------------------------------------------------

@dataclass(frozen=True)
class SuperfluidityReport:
    applicable: bool
    sigma: float
    sound_speed: float = float("nan")
    support_radius: float = float("nan")  # m c
    support_extent: float = 0.0  # largest |q| with n above threshold
    support_ok: bool = False
    prod1_residual: float = 0.0  # max n(q) d(E(k)+eps(q-k)-eps(q)) / (max n * d(0))
    prod2_residual: float = 0.0  # same with n(q - k)
    nonlinear_residual: float = 0.0  # max|rhs| / max n
    linear_residual: float = 0.0
    leakage_bound: float = float("inf")
    form_factor: dict = field(default_factory=dict)
    note: str = ""

    @property
    def stationary(self) -> bool:
        return self.nonlinear_residual <= self.leakage_bound

    @property
    def superfluid(self) -> bool:
        return self.applicable and self.support_ok and self.stationary

    def as_dict(self) -> dict:
        d = {name: getattr(self, name) for name in self.__dataclass_fields__}
        d["stationary"] = self.stationary
        d["superfluid"] = self.superfluid
        return d


def leakage_bound(grid: MomentumGrid, c: float, m: float, extent: float, sigma: float,
                  sup_weight: float, n_max: float, tol: float = 0.0) -> float:
    """A priori bound on ``max|nonlinear rhs| / max n`` for a state inside ``|q| <= extent < m c``.

    Every pair of occupied cells is off shell by at least
    ``(c - extent/m)|k| + k^2/2m``, so each lattice transfer contributes at most
    the mollifier evaluated there; cells below the support threshold ``tol``
    are charged at the delta's peak.
    """
    N = grid.n_points
    s = np.arange(-(N - 1), N, dtype=float) * grid.spacing
    mesh = np.meshgrid(*([s] * grid.dim), indexing="ij")
    kabs = np.sqrt(sum(c_ * c_ for c_ in mesh)).ravel()
    kabs = kabs[kabs > 0]
    gap = max(c - extent / m, 0.0) * kabs + kabs ** 2 / (2.0 * m)
    per_k = mollified_delta(gap, sigma) + tol * mollified_delta(0.0, sigma)
    return float(2.0 * TWO_PI * sup_weight * n_max * grid.cell_volume * per_k.sum())


def _product_residuals(kernel: RateKernel, n: np.ndarray) -> tuple[float, float]:
    peak = float(mollified_delta(0.0, kernel.sigma))
    if kernel.dense:
        nf = n.ravel()
        delta = mollified_delta(kernel.offshell, kernel.sigma)
        p1 = np.max(nf[:, None] * delta)
        p2 = np.max(nf[None, :] * delta)
    else:
        p1 = p2 = 0.0
        for dst, src, _, _, x in kernel.blocks():
            delta = mollified_delta(x, kernel.sigma)
            p1 = max(p1, float(np.max(n[dst] * delta)))
            p2 = max(p2, float(np.max(n[src] * delta)))
    return float(p1) / peak, float(p2) / peak


def superfluidity_check(n: DensityField, params: PhysicalParams, sigma: float | None = None,
                        model: DispersionModel | None = None, tol: float = 1e-12,
                        reservoir: ReservoirSpec | None = None) -> SuperfluidityReport:
    """Test the support condition ``supp n in {|q| <= m c}`` and measure how
    close both master equations are to stationarity on ``n``.

    The linear comparison uses ``reservoir`` (default: empty background at
    the params' temperature).
    """
    sigma = default_sigma(n.grid, params.m) if sigma is None else sigma
    model = model or _default_model(params)
    ff = params.f.to_dict()
    try:
        c = sound_speed(model)
    except NoSoundSpeedError as exc:
        return SuperfluidityReport(False, sigma, form_factor=ff, note=f"not applicable: {exc}")

    n_max = n.max
    radius = params.m * c
    if n_max == 0:
        return SuperfluidityReport(True, sigma, c, radius, 0.0, True, leakage_bound=0.0,
                                   form_factor=ff)
    occupied = n.values > tol * n_max
    extent = float(n.grid.norms[occupied].max())
    support_ok = extent <= radius * (1.0 + 1e-12)

    kernel = rate_kernel(n.grid, model, params.m, params.f, sigma, params.beta)
    p1, p2 = _product_residuals(kernel, n.values)
    nl = float(np.max(np.abs(nonlinear_rhs(n, params, sigma, model, kernel=kernel)))) / n_max
    reservoir = _with_model(reservoir or ReservoirSpec(params.beta), model)
    lin = float(np.max(np.abs(linear_rhs(n, reservoir, params, sigma)))) / n_max
    bound = (leakage_bound(n.grid, c, params.m, extent, sigma, params.f.sup_weight, n_max, tol)
             if support_ok else float("inf"))
    return SuperfluidityReport(True, sigma, c, radius, extent, support_ok, p1, p2, nl, lin,
                               bound, ff)


# -- time evolution ---------------------------------------------------------

@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    t_end: float
    sigma_E: float | None = None  # None: grid default
    mode: str = "nonlinear"
    record_every: int = 1
    bose_factors: bool = False
    clip_tolerance: float = 1e-8

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidConfigurationError(f"kinetics: dt must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise InvalidConfigurationError(f"kinetics: t_end must be >= 0, got {self.t_end}")
        if self.sigma_E is not None and not self.sigma_E > 0:
            raise InvalidConfigurationError(f"kinetics: mollifier width sigma_E must be positive, got {self.sigma_E}")
        if self.mode not in ("linear", "nonlinear"):
            raise InvalidConfigurationError(f"kinetics: mode must be linear or nonlinear, got {self.mode!r}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise InvalidConfigurationError("kinetics: record_every must be a positive integer")

    def to_dict(self) -> dict:
        return {"dt": self.dt, "t_end": self.t_end, "sigma_E": self.sigma_E, "mode": self.mode,
                "record_every": self.record_every, "bose_factors": self.bose_factors}


@dataclass(frozen=True)
class SnapshotLog:
    t: float
    total_number: float
    max_residual: float  # max |dn/dt| at the snapshot
    min_value: float
    positive: bool


@dataclass
class Trajectory:
    grid: MomentumGrid
    times: list = field(default_factory=list)
    fields: list = field(default_factory=list)
    logs: list = field(default_factory=list)
    clipped_mass: float = 0.0
    sigma: float = float("nan")

    def append(self, t: float, n: DensityField, rhs_values: np.ndarray):
        if self.times and t <= self.times[-1]:
            raise InvalidConfigurationError("kinetics: snapshot times must increase")
        if n.grid != self.grid:
            raise GridMismatchError("kinetics: snapshot on a different grid")
        self.times.append(float(t))
        self.fields.append(n)
        self.logs.append(SnapshotLog(float(t), integrate(n), float(np.max(np.abs(rhs_values))),
                                     float(n.values.min()), bool(np.all(n.values >= 0))))

    @property
    def final(self) -> DensityField:
        return self.fields[-1]

    def __len__(self):
        return len(self.times)


def step(n: DensityField, rhs: Callable[[np.ndarray], np.ndarray], dt: float
         ) -> tuple[DensityField, float]:
    """One classical Runge-Kutta step of order four, then clipping at zero.

    Returns the new density and the clipped (negative) mass.
    """
    y = n.values
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * dt * k1)
    k3 = rhs(y + 0.5 * dt * k2)
    k4 = rhs(y + dt * k3)
    y_new = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(y_new)):
        raise DivergenceError("kinetics: state became non-finite")
    negative = y_new < 0
    clipped = float(-y_new[negative].sum() * n.grid.cell_volume)
    y_new[negative] = 0.0
    return DensityField(n.grid, y_new), clipped


def make_rhs(grid: MomentumGrid, config: EvolutionConfig, params: PhysicalParams,
             model: DispersionModel | None = None, reservoir: ReservoirSpec | None = None
             ) -> Callable[[np.ndarray], np.ndarray]:
    """Array-to-array right-hand side with its kernel built once."""
    sigma = config.sigma_E or default_sigma(grid, params.m)
    model = model or _default_model(params)
    if config.mode == "nonlinear":
        if config.bose_factors:
            kernel = rate_kernel(grid, model, params.m, params.f, sigma, params.beta)
            return lambda y: _linear_flux_sum(kernel, y, y + 1.0)
        kernel = rate_kernel(grid, model, params.m, params.f, sigma, np.inf)
        return lambda y: _quadratic_flux_sum(kernel, y)

    reservoir = _with_model(reservoir or ReservoirSpec(params.beta), model)
    if reservoir.occupation is SELF_CONSISTENT:
        kernel = rate_kernel(grid, reservoir.dispersion, params.m, params.f, sigma, reservoir.beta)
        return lambda y: _linear_flux_sum(kernel, y, y + reservoir.unity)
    kernel = rate_kernel(grid, reservoir.dispersion, params.m, params.f, sigma, reservoir.beta)
    a = reservoir.resolve(DensityField.zeros(grid))
    return lambda y: _linear_flux_sum(kernel, y, a)


def _with_model(reservoir: ReservoirSpec, model: DispersionModel) -> ReservoirSpec:
    return reservoir if reservoir.dispersion is not None else replace(reservoir, dispersion=model)


def evolve(n0: DensityField, config: EvolutionConfig, params: PhysicalParams,
           model: DispersionModel | None = None, reservoir: ReservoirSpec | None = None
           ) -> Trajectory:
    """Integrate from 0 to ``config.t_end`` with fixed steps, recording snapshots.

    The last step is shortened to land on ``t_end``.  Clipping more than
    ``clip_tolerance`` of the total number in one step raises ``StepSizeError``;
    a non-finite state raises ``DivergenceError``.  Both carry the trajectory
    recorded so far as ``last_good``.
    """
    grid = n0.grid
    rhs = make_rhs(grid, config, params, model, reservoir)
    traj = Trajectory(grid, sigma=config.sigma_E or default_sigma(grid, params.m))
    traj.append(0.0, n0, rhs(n0.values))
    n_steps = int(np.ceil(config.t_end / config.dt - 1e-9))
    n, t = n0, 0.0
    for i in range(1, n_steps + 1):
        t_next = config.t_end if i == n_steps else i * config.dt
        total = integrate(n)
        try:
            n_new, clipped = step(n, rhs, t_next - t)
        except DivergenceError as exc:
            _record(traj, t, n, rhs)
            raise DivergenceError(f"{exc} at t = {t_next:.6g}", last_good=traj) from None
        if clipped > config.clip_tolerance * max(total, np.finfo(float).tiny):
            _record(traj, t, n, rhs)
            raise StepSizeError(
                f"kinetics: clipped {clipped:.3g} of {total:.3g} at t = {t_next:.6g}; reduce dt",
                last_good=traj)
        traj.clipped_mass += clipped
        n, t = n_new, t_next
        if i % config.record_every == 0 or i == n_steps:
            traj.append(t, n, rhs(n.values))
    return traj


def _record(traj, t, n, rhs):
    if not traj.times or t > traj.times[-1]:
        traj.append(t, n, rhs(n.values))


# -- susceptibilities -------------------------------------------------------

@dataclass(frozen=True)
class Susceptibility:
    """Complex coefficients ``(f|f)_-`` and ``(f|f)_+`` at selected nodes.

    ``resolvent_minus`` / ``resolvent_plus`` are the k-integrals with the
    ``1/(x - i eps)`` factor but without the ``-i n(p)`` / ``-i (N(p)+1)``
    prefactors; their imaginary parts carry the on-shell rates.
    """

    indices: np.ndarray
    minus: np.ndarray
    plus: np.ndarray
    resolvent_minus: np.ndarray
    resolvent_plus: np.ndarray
    epsilon_reg: float


def susceptibility(n: DensityField, reservoir: ReservoirSpec, params: PhysicalParams,
                   epsilon_reg: float, indices=None) -> Susceptibility:
    """Second-order coefficients of the stochastic evolution at fixed p.

        (f|f)_-(p) = sum_k |f(k,p)|^2 (-i n(p)(N(p-k)+1)) / (x - i eps) (1 + n+(k)) dk
        (f|f)_+(p) = sum_k |f(k,p)|^2 (-i n(p-k)(N(p)+1)) / (x - i eps) n+(k) dk

    with ``x = E(k) + eps(p-k) - eps(p)``.  The finite ``eps`` is the
    Lorentzian regularisation ``1/(x - i eps) = (x + i eps)/(x^2 + eps^2)``
    of the ``-i0`` prescription: the real part of the resolvent tends to the
    principal value and its imaginary part to ``pi delta(x)``.
    """
    if not epsilon_reg > 0:
        raise InvalidConfigurationError("kinetics: epsilon_reg must be positive")
    grid = n.grid
    model = reservoir.dispersion or _default_model(params)
    q = grid.flat_nodes
    a = reservoir.resolve(n).ravel()
    nv = n.values.ravel()
    eps_q = epsilon(q, params.m)
    idx = np.arange(grid.size) if indices is None else np.atleast_1d(np.asarray(indices, dtype=int))
    res_m = np.empty(idx.size, dtype=complex)
    res_p = np.empty(idx.size, dtype=complex)
    for r, i in enumerate(idx):
        k = q[i] - q
        energy = model.energy(k)
        x = energy + eps_q - eps_q[i]
        energy[i] = 1.0
        nplus, one_plus = _thermal(energy, reservoir.beta)
        weight = params.f.weight(k, q[i]) * grid.cell_volume
        weight[i] = 0.0
        resolvent = (x + 1j * epsilon_reg) / (x * x + epsilon_reg ** 2)
        res_m[r] = np.sum(weight * a * one_plus * resolvent)
        res_p[r] = np.sum(weight * nv * nplus * resolvent)
    minus = -1j * nv[idx] * res_m
    plus = -1j * a[idx] * res_p
    return Susceptibility(idx, minus, plus, res_m, res_p, float(epsilon_reg))
