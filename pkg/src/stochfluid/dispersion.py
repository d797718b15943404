"""Particle and quasiparticle energy laws, interaction kernels, form factors.

Momenta are arrays whose last axis holds Cartesian components; a bare
scalar is read as a one-dimensional momentum.  All built-in laws are
isotropic, so each model only implements its radial profile ``E(|k|)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (InvalidConfigurationError, ModelInconsistencyError,
                     NoSoundSpeedError)


def _norm(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim == 0:
        return np.abs(p)
    return np.sqrt(np.sum(p * p, axis=-1))


def _norm2(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim == 0:
        return p * p
    return np.sum(p * p, axis=-1)


def epsilon(p, m: float):
    """Free-particle energy ``|p|^2 / 2m``."""
    return _norm2(p) / (2.0 * m)


# -- interaction kernels and form factors -----------------------------------

@dataclass(frozen=True)
class InteractionKernel:
    """Even pair potential ``g(p)``: ``constant`` (g0) or ``gaussian`` (g0 exp(-|p|^2/L^2))."""

    kind: str = "constant"
    g0: float = 1.0
    cutoff: float | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "gaussian"):
            raise InvalidConfigurationError(f"dispersion: unknown interaction kernel {self.kind!r}")
        if self.kind == "gaussian" and not (self.cutoff and self.cutoff > 0):
            raise InvalidConfigurationError("dispersion: gaussian kernel needs a positive cutoff")

    def __call__(self, p):
        if self.kind == "constant":
            return np.full(np.shape(_norm(p)), float(self.g0))
        return self.g0 * np.exp(-_norm2(p) / self.cutoff ** 2)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "g0": self.g0, "cutoff": self.cutoff}


@dataclass(frozen=True)
class FormFactor:
    """Complex coupling ``f(k, p)``: ``constant`` or ``gaussian`` cutoff
    ``A exp(-(|k|^2 + |p|^2) / (2 L^2))``."""

    kind: str = "constant"
    amplitude: complex = 1.0
    cutoff: float | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "gaussian"):
            raise InvalidConfigurationError(f"dispersion: unknown form factor {self.kind!r}")
        if self.kind == "gaussian" and not (self.cutoff and self.cutoff > 0):
            raise InvalidConfigurationError("dispersion: gaussian form factor needs a positive cutoff")
        if not np.isfinite(self.amplitude):
            raise InvalidConfigurationError("dispersion: form factor amplitude must be finite")

    def __call__(self, k, p):
        shape = np.broadcast_shapes(np.shape(_norm(k)), np.shape(_norm(p)))
        if self.kind == "constant":
            return np.full(shape, complex(self.amplitude))
        return self.amplitude * np.exp(-(_norm2(k) + _norm2(p)) / (2.0 * self.cutoff ** 2))

    def weight(self, k, p):
        """``|f(k, p)|^2``."""
        if self.kind == "constant":
            shape = np.broadcast_shapes(np.shape(_norm(k)), np.shape(_norm(p)))
            return np.full(shape, abs(self.amplitude) ** 2)
        return np.abs(self(k, p)) ** 2

    @property
    def sup_weight(self) -> float:
        return abs(self.amplitude) ** 2

    def to_dict(self) -> dict:
        amp = complex(self.amplitude)
        return {"kind": self.kind, "amplitude": [amp.real, amp.imag], "cutoff": self.cutoff}


@dataclass(frozen=True)
class PhysicalParams:
    """Mass, inverse temperature, mean-field coupling ``gamma = lambda N0 / V``,
    total density, pair potential and form factor."""

    m: float = 1.0
    beta: float = 1.0
    gamma: float = 0.0
    rho: float = 1.0
    g: InteractionKernel = field(default_factory=InteractionKernel)
    f: FormFactor = field(default_factory=FormFactor)

    def __post_init__(self):
        if not self.m > 0:
            raise InvalidConfigurationError(f"dispersion: mass must be positive, got {self.m}")
        if not self.beta > 0:
            raise InvalidConfigurationError(f"dispersion: beta must be positive, got {self.beta}")
        if not self.gamma >= 0:
            raise InvalidConfigurationError(f"dispersion: gamma must be >= 0, got {self.gamma}")
        if not self.rho > 0:
            raise InvalidConfigurationError(f"dispersion: rho must be positive, got {self.rho}")
        if self.gamma > 0 and not self.g(0.0) > 0:
            raise ModelInconsistencyError("dispersion: g(0) must be positive when gamma > 0")

    def to_dict(self) -> dict:
        return {"m": self.m, "beta": self.beta, "gamma": self.gamma, "rho": self.rho,
                "interaction": self.g.to_dict(), "form_factor": self.f.to_dict()}


# -- excitation laws --------------------------------------------------------

class DispersionModel:
    """Isotropic excitation energy ``E(k)``.  Subclasses define ``radial``."""

    kind = "abstract"

    def radial(self, kabs):
        raise NotImplementedError

    def energy(self, k):
        return self.radial(_norm(k))

    __call__ = energy

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Free(DispersionModel):
    m: float = 1.0
    kind = "free"

    def radial(self, kabs):
        kabs = np.asarray(kabs, dtype=float)
        return kabs * kabs / (2.0 * self.m)

    def to_dict(self):
        return {"kind": self.kind, "m": self.m}


@dataclass(frozen=True)
class Radiative(DispersionModel):
    c: float = 1.0
    kind = "radiative"

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidConfigurationError(f"dispersion: sound speed must be positive, got {self.c}")

    def radial(self, kabs):
        return self.c * np.asarray(kabs, dtype=float)

    def to_dict(self):
        return {"kind": self.kind, "c": self.c}


@dataclass(frozen=True)
class Polaron(DispersionModel):
    omega0: float = 1.0
    kind = "polaron"

    def __post_init__(self):
        if not self.omega0 > 0:
            raise InvalidConfigurationError(f"dispersion: omega0 must be positive, got {self.omega0}")

    def radial(self, kabs):
        return np.full(np.shape(kabs), float(self.omega0))

    def to_dict(self):
        return {"kind": self.kind, "omega0": self.omega0}


@dataclass(frozen=True)
class BogoliubovBulk(DispersionModel):
    """``E(p) = sqrt(w^2 + 2 gamma w g(p))`` with ``w = p^2 / 2m``."""

    m: float = 1.0
    gamma: float = 1.0
    g: InteractionKernel = field(default_factory=InteractionKernel)
    kind = "bogoliubov"

    def radial(self, kabs):
        kabs = np.asarray(kabs, dtype=float)
        w = kabs * kabs / (2.0 * self.m)
        # sqrt(w) sqrt(w + 2 gamma g) rather than sqrt(w^2 + ...): w^2 underflows first
        shifted = w + 2.0 * self.gamma * self.g(kabs[..., None])
        if np.any((shifted < 0) & (w > 0)):
            raise ModelInconsistencyError(
                "dispersion: negative radicand in Bogoliubov energy (attractive interaction)")
        return np.sqrt(w) * np.sqrt(np.maximum(shifted, 0.0))

    @classmethod
    def from_params(cls, params: PhysicalParams) -> "BogoliubovBulk":
        return cls(params.m, params.gamma, params.g)

    def to_dict(self):
        return {"kind": self.kind, "m": self.m, "gamma": self.gamma, "interaction": self.g.to_dict()}


@dataclass(frozen=True, eq=False)
class Tabulated(DispersionModel):
    """Piecewise-linear ``E(|k|)`` through samples; held constant past the last one."""

    k: np.ndarray
    e: np.ndarray
    source: str | None = None
    kind = "tabulated"

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        e = np.asarray(self.e, dtype=float)
        if k.ndim != 1 or k.shape != e.shape or k.size < 2:
            raise InvalidConfigurationError("dispersion: table needs two equal-length columns, >= 2 rows")
        if np.any(np.diff(k) <= 0) or k[0] < 0:
            raise InvalidConfigurationError("dispersion: |k| column must be nonnegative and strictly increasing")
        if np.any(e < 0) or not np.all(np.isfinite(e)):
            raise InvalidConfigurationError("dispersion: tabulated energies must be finite and >= 0")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "e", e)

    def radial(self, kabs):
        return np.interp(kabs, self.k, self.e)

    @classmethod
    def from_csv(cls, path) -> "Tabulated":
        rows = []
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except (ValueError, IndexError):
                    if rows:
                        raise InvalidConfigurationError(f"dispersion: {path}:{lineno}: bad row {row!r}")
                    # header line
        data = np.array(rows, dtype=float).reshape(-1, 2)
        return cls(data[:, 0], data[:, 1], source=str(Path(path)))

    def to_dict(self):
        out = {"kind": self.kind}
        if self.source:
            out["path"] = self.source
        else:
            out["k"] = self.k.tolist()
            out["E"] = self.e.tolist()
        return out


def bogoliubov_dispersion(p, params: PhysicalParams):
    """Quasiparticle energy of the diagonalised mean-field Hamiltonian."""
    return BogoliubovBulk.from_params(params).energy(p)


def energy_difference(p, k, model: DispersionModel, m: float):
    """``E(k) + eps(p - k) - eps(p)``: energy balance of the transition p -> p - k."""
    p = np.asarray(p, dtype=float)
    k = np.asarray(k, dtype=float)
    return model.energy(k) + epsilon(p - k, m) - epsilon(p, m)


def sound_speed(model: DispersionModel, h: float = 1e-2) -> float:
    """``lim E(k)/|k|`` at k -> 0, by Richardson extrapolation over h, h/2, h/4.

    Assumes the ratio has an expansion in even powers of k, which holds for
    every analytic isotropic law.  Divergent (gapped) and vanishing (free)
    limits are detected from the apparent power law between samples.
    """
    ks = np.array([h, h / 2.0, h / 4.0])
    r = model.radial(ks) / ks
    if np.any(r <= 0) or not np.all(np.isfinite(r)):
        raise NoSoundSpeedError(f"{model.kind}: E(k)/|k| is not positive near k = 0")
    exponent = np.log2(r[0] / r[1])
    if abs(exponent) > 0.5:
        trend = "diverges" if exponent < 0 else "vanishes"
        raise NoSoundSpeedError(f"{model.kind}: E(k)/|k| {trend} as k -> 0")
    r1 = (4.0 * r[1] - r[0]) / 3.0
    r2 = (4.0 * r[2] - r[1]) / 3.0
    return float((16.0 * r2 - r1) / 15.0)


def model_from_dict(spec: dict, params: PhysicalParams | None = None, base: Path | None = None
                    ) -> DispersionModel:
    """Build a model from its config mapping (``kind`` plus parameters)."""
    kind = spec.get("kind")
    if kind == "free":
        return Free(float(spec.get("m", params.m if params else 1.0)))
    if kind == "radiative":
        return Radiative(float(spec["c"]))
    if kind == "polaron":
        return Polaron(float(spec["omega0"]))
    if kind == "bogoliubov":
        if params is None:
            raise InvalidConfigurationError("dispersion: bogoliubov model needs physical params")
        return BogoliubovBulk.from_params(params)
    if kind == "tabulated":
        if "path" in spec:
            path = Path(spec["path"])
            if base is not None and not path.is_absolute():
                path = base / path
            return Tabulated.from_csv(path)
        return Tabulated(np.asarray(spec["k"]), np.asarray(spec["E"]))
    raise InvalidConfigurationError(f"dispersion: unknown model kind {kind!r}")

