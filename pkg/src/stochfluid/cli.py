"""Config-driven command line front end.

    stochfluid validate config.json
    stochfluid run config.json

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure.
See ``configs/`` for one example file per experiment kind.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bogoliubov, condensation, io, kinetics, landau
from .dispersion import (DispersionModel, FormFactor, InteractionKernel, PhysicalParams,
                         epsilon, model_from_dict, sound_speed)
from .errors import ModelInconsistencyError, NoSoundSpeedError, NumericalFailure, StochfluidError
from .grid import DensityField, MomentumGrid, default_sigma, make_grid

EXPERIMENTS = ("dispersion-sweep", "bogoliubov-sweep", "condense", "landau", "evolve",
               "check-superfluid")
NEEDS_GRID = ("evolve", "check-superfluid")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


@dataclass(frozen=True)
class Diagnostic:
    module: str
    message: str
    line: int | None = None

    def format(self, source: str) -> str:
        where = f"{source}:{self.line}" if self.line else source
        return f"{where}: [{self.module}] {self.message}"


@dataclass
class RunConfig:
    experiment: str
    output_dir: Path
    raw: dict
    params: PhysicalParams | None = None
    model: DispersionModel | None = None
    grid: MomentumGrid | None = None
    evolution: kinetics.EvolutionConfig | None = None
    reservoir: kinetics.ReservoirSpec | None = None
    initial: DensityField | None = None
    options: dict = field(default_factory=dict)


def _locate(text: str, path: tuple[str, ...]) -> int | None:
    """Line number of the innermost key in ``path`` (searching after its parents)."""
    pos, line = 0, None
    for key in path:
        match = re.compile(r'"%s"\s*:' % re.escape(key)).search(text, pos)
        if not match:
            break
        pos = match.end()
        line = text.count("\n", 0, match.start()) + 1
    return line


class _Collector:
    def __init__(self, text: str):
        self.text = text
        self.items: list[Diagnostic] = []

    def add(self, module, message, path=()):
        self.items.append(Diagnostic(module, message, _locate(self.text, path) if path else None))

    def guard(self, module, path, func, *args, keys=(), **kwargs):
        """Call ``func``; on failure record a diagnostic at ``path``, refined to
        the first of ``keys`` named in the error message."""
        try:
            return func(*args, **kwargs)
        except (StochfluidError, KeyError, TypeError, ValueError) as exc:
            msg = f"missing key {exc}" if isinstance(exc, KeyError) else str(exc)
            for key in keys:
                if re.search(r"\b%s\b" % re.escape(key), msg):
                    path = path + (key,)
                    break
            self.add(module, msg, path)
            return None


def _build_params(spec: dict) -> PhysicalParams:
    inter = spec.get("interaction", {})
    ff = spec.get("form_factor", {})
    amp = ff.get("amplitude", 1.0)
    amp = complex(*amp) if isinstance(amp, list) else complex(amp)
    return PhysicalParams(
        m=float(spec.get("m", 1.0)),
        beta=float(spec.get("beta", 1.0)),
        gamma=float(spec.get("gamma", 0.0)),
        rho=float(spec.get("rho", 1.0)),
        g=InteractionKernel(inter.get("kind", "constant"), float(inter.get("g0", 1.0)),
                            inter.get("cutoff")),
        f=FormFactor(ff.get("kind", "constant"), amp, ff.get("cutoff")))


def _initial_state(spec: dict, grid: MomentumGrid, base: Path) -> DensityField:
    kind = spec.get("kind", "gaussian")
    amplitude = float(spec.get("amplitude", 1.0))
    q = grid.nodes
    if kind == "gaussian":
        center = np.broadcast_to(np.asarray(spec.get("center", 0.0), dtype=float), (grid.dim,))
        width = float(spec["width"])
        values = amplitude * np.exp(-np.sum((q - center) ** 2, axis=-1) / (2.0 * width ** 2))
    elif kind == "shell":
        r0, width = float(spec["radius"]), float(spec["width"])
        values = amplitude * np.exp(-(grid.norms - r0) ** 2 / (2.0 * width ** 2))
        spec = {k: v for k, v in spec.items() if k != "radius"}
    elif kind == "file":
        path = Path(spec["path"])
        return io.read_density_csv(path if path.is_absolute() else base / path, grid)
    else:
        raise ValueError(f"unknown initial state kind {kind!r}")
    if spec.get("radius") is not None:
        values = np.where(grid.norms <= float(spec["radius"]), values, 0.0)
    return DensityField(grid, values)


def load_config(path) -> tuple[RunConfig | None, list[Diagnostic]]:
    """Parse and validate a config file, collecting every violation found."""
    path = Path(path)
    text = path.read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        return None, [Diagnostic("cli", f"JSON parse error: {exc.msg} (column {exc.colno})", exc.lineno)]
    if not isinstance(raw, dict):
        return None, [Diagnostic("cli", "top level must be a JSON object", 1)]
    col = _Collector(text)
    base = path.parent

    experiment = raw.get("experiment")
    if experiment not in EXPERIMENTS:
        col.add("cli", f"experiment must be one of {', '.join(EXPERIMENTS)}; got {experiment!r}",
                ("experiment",))
    out = raw.get("output_dir")
    if not isinstance(out, str) or not out:
        col.add("cli", "output_dir must be a non-empty string", ("output_dir",))
        out = "."
    out_path = Path(out) if Path(out).is_absolute() else base / out

    cfg = RunConfig(experiment, out_path, raw)
    cfg.params = col.guard("dispersion", ("physics",), _build_params, raw.get("physics", {}))
    if "dispersion" in raw:
        cfg.model = col.guard("dispersion", ("dispersion",), model_from_dict, raw["dispersion"],
                              cfg.params, base)
    elif cfg.params is not None:
        cfg.model = model_from_dict({"kind": "bogoliubov"}, cfg.params)

    if experiment in NEEDS_GRID:
        g = raw.get("grid", {})
        cfg.grid = col.guard("grid", ("grid",), lambda: make_grid(int(g["d"]), float(g["q_max"]), g["N"]),
                             keys=("N", "q_max", "d"))
        if cfg.grid is not None:
            cfg.initial = col.guard("kinetics", ("initial_state",), _initial_state,
                                    raw.get("initial_state", {}), cfg.grid, base)

    ev = raw.get("evolution")
    if experiment == "evolve" or ev is not None:
        ev = ev or {}
        cfg.evolution = col.guard("kinetics", ("evolution",), lambda: kinetics.EvolutionConfig(
            dt=float(ev.get("dt", 0.01)), t_end=float(ev.get("t_end", 1.0)),
            sigma_E=None if ev.get("sigma_E") is None else float(ev["sigma_E"]),
            mode=ev.get("mode", "nonlinear"), record_every=ev.get("record_every", 1),
            bose_factors=bool(ev.get("bose_factors", False))),
            keys=("sigma_E", "dt", "t_end", "mode", "record_every"))

    check = raw.get("check", {})
    if check.get("sigma_E") is not None and not float(check["sigma_E"]) > 0:
        col.add("kinetics", "mollifier width sigma_E must be positive", ("check", "sigma_E"))

    if "reservoir" in raw and cfg.params is not None:
        r = raw["reservoir"]
        occ = r.get("occupation")
        if occ == "self":
            occ = kinetics.SELF_CONSISTENT
        cfg.reservoir = col.guard("kinetics", ("reservoir",), kinetics.ReservoirSpec,
                                  float(r.get("beta", cfg.params.beta)), occ, None,
                                  float(r.get("unity", 1.0)))

    for key in ("sweep", "condense", "landau", "check"):
        cfg.options[key] = raw.get(key, {})
    return cfg, col.items


# -- experiments ------------------------------------------------------------

def _manifest(cfg: RunConfig, **extra) -> dict:
    return {"experiment": cfg.experiment, "config": cfg.raw, **extra}


def _dispersion_sweep(cfg: RunConfig) -> list[Path]:
    s = cfg.options["sweep"]
    k = np.geomspace(float(s.get("k_min", 1e-3)), float(s.get("k_max", 10.0)), int(s.get("count", 200)))
    m = cfg.params.m
    E = cfg.model.radial(k)
    rows = zip(k, epsilon(k[:, None], m), E, E / k)
    files = [io.write_csv(cfg.output_dir / "dispersion.csv", ("k", "epsilon", "E", "E_over_k"), rows)]
    try:
        c = sound_speed(cfg.model)
    except NoSoundSpeedError:
        c = None
    files.append(io.write_json(_manifest(cfg, model=cfg.model.to_dict(), sound_speed=c),
                               cfg.output_dir / "manifest.json"))
    return files


def _bogoliubov_sweep(cfg: RunConfig) -> list[Path]:
    s = cfg.options["sweep"]
    p = np.geomspace(float(s.get("k_min", 1e-3)), float(s.get("k_max", 10.0)), int(s.get("count", 200)))
    omega = epsilon(p[:, None], cfg.params.m)
    t = cfg.params.gamma * cfg.params.g(p[:, None])
    point = bogoliubov.QuadraticHamiltonianPoint(omega, t)
    c, diag = bogoliubov.diagonalize(point)
    off = bogoliubov.offdiagonal_residual(point, c)
    closed = np.sqrt(omega ** 2 + 2.0 * omega * t)
    rows = zip(p, omega, t, np.broadcast_to(c.x, p.shape), c.u, c.v, off, diag, closed,
               np.abs(diag - closed) / closed)
    header = ("p", "omega", "t", "x", "u", "v", "offdiag_residual", "diag", "E_closed", "rel_error")
    files = [io.write_csv(cfg.output_dir / "bogoliubov.csv", header, rows)]
    mu = bogoliubov.chemical_potential(cfg.params)
    files.append(io.write_json(_manifest(cfg, chemical_potential=mu,
                                         max_offdiag=float(np.max(np.abs(off))),
                                         max_rel_error=float(np.max(np.abs(diag - closed) / closed))),
                               cfg.output_dir / "manifest.json"))
    return files


def _condense(cfg: RunConfig) -> list[Path]:
    opts = cfg.options["condense"]
    rho, m = cfg.params.rho, cfg.params.m
    theta_c = condensation.critical_temperature(rho, m)
    rows = []
    for theta in np.linspace(0.0, theta_c, int(opts.get("temperatures", 16))):
        state = condensation.condensate_fraction(theta, rho, m, theta_c)
        thermal = 0.0 if theta == 0 else condensation.normal_density(1.0 / theta, m)
        rows.append((theta, state.c, thermal, state.c + thermal))
    files = [io.write_csv(cfg.output_dir / "condensation.csv",
                          ("theta", "c", "normal_density", "rho_check"), rows)]
    files.append(io.write_json(_manifest(cfg, theta_c=theta_c), cfg.output_dir / "manifest.json"))
    return files


def _landau(cfg: RunConfig) -> list[Path]:
    opts = cfg.options["landau"]
    k_grid = landau.default_k_grid(float(opts.get("k_min", 1e-4)), float(opts.get("k_max", 1e2)),
                                   int(opts.get("count", 2000)))
    m = cfg.params.m
    report = landau.critical_velocity(cfg.model, m, k_grid)
    lines = [f"model = {cfg.model.kind}", f"m = {io.fmt(m)}", f"v_c = {report.v_c:.6f}",
             f"v_c_exact = {io.fmt(report.v_c)}",
             "argmin_k = k->0" if report.at_zero else f"argmin_k = {io.fmt(report.argmin_k)}"]
    if report.simple_bound is not None:
        lines.append(f"simple_bound = {io.fmt(report.simple_bound)} (sufficient, weaker than v_c)")
    report_path = cfg.output_dir / "landau_report.txt"
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text("\n".join(lines) + "\n")
    threshold = (cfg.model.radial(k_grid) + k_grid ** 2 / (2.0 * m)) / k_grid
    files = [report_path, io.write_csv(cfg.output_dir / "landau_threshold.csv", ("k", "threshold"),
                                       zip(k_grid, threshold))]
    files.append(io.write_json(_manifest(cfg, v_c=report.v_c), cfg.output_dir / "manifest.json"))
    return files


def _evolve(cfg: RunConfig) -> list[Path]:
    ev = cfg.evolution
    manifest = _manifest(cfg, params=cfg.params.to_dict(), model=cfg.model.to_dict(),
                         evolution=ev.to_dict())
    try:
        traj = kinetics.evolve(cfg.initial, ev, cfg.params, cfg.model, cfg.reservoir)
    except NumericalFailure as exc:
        if exc.last_good is not None:
            io.write_snapshots(exc.last_good, cfg.output_dir,
                               dict(manifest, failure=str(exc)))
        raise
    return [io.write_snapshots(traj, cfg.output_dir, manifest)]


def _check_superfluid(cfg: RunConfig) -> list[Path]:
    opts = cfg.options["check"]
    sigma = opts.get("sigma_E")
    sigma = default_sigma(cfg.grid, cfg.params.m) if sigma is None else float(sigma)
    report = kinetics.superfluidity_check(cfg.initial, cfg.params, sigma, cfg.model,
                                          float(opts.get("tol", 1e-12)), cfg.reservoir)
    files = [io.write_json(report.as_dict(), cfg.output_dir / "superfluidity.json"),
             io.write_density_csv(cfg.initial, cfg.output_dir / "density.csv")]
    files.append(io.write_json(_manifest(cfg, params=cfg.params.to_dict(), model=cfg.model.to_dict(),
                                         grid=cfg.grid.to_dict(), sigma_E=sigma),
                               cfg.output_dir / "manifest.json"))
    return files


RUNNERS = {
    "dispersion-sweep": _dispersion_sweep,
    "bogoliubov-sweep": _bogoliubov_sweep,
    "condense": _condense,
    "landau": _landau,
    "evolve": _evolve,
    "check-superfluid": _check_superfluid,
}


def validate(path, stream=sys.stdout) -> int:
    path = Path(path)
    try:
        _, diags = load_config(path)
    except OSError as exc:
        print(f"{path}: [cli] cannot read config: {exc}", file=stream)
        return EXIT_INVALID
    for d in diags:
        print(d.format(str(path)), file=stream)
    return EXIT_OK if not diags else EXIT_INVALID


def run(path, stream=sys.stdout) -> int:
    path = Path(path)
    try:
        cfg, diags = load_config(path)
    except OSError as exc:
        print(f"{path}: [cli] cannot read config: {exc}", file=stream)
        return EXIT_INVALID
    if diags:
        for d in diags:
            print(d.format(str(path)), file=stream)
        return EXIT_INVALID
    try:
        files = RUNNERS[cfg.experiment](cfg)
    except NumericalFailure as exc:
        print(f"{path}: [kinetics] numerical failure: {exc}", file=stream)
        return EXIT_NUMERICAL
    except (ModelInconsistencyError, FloatingPointError) as exc:
        print(f"{path}: [{cfg.experiment}] numerical failure: {exc}", file=stream)
        return EXIT_NUMERICAL
    for f in files:
        print(f, file=stream)
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="stochfluid", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run the experiment described by a config file"),
                        ("validate", "check a config file and list every violated invariant")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", type=Path)
    args = parser.parse_args(argv)
    return run(args.config) if args.command == "run" else validate(args.config)


if __name__ == "__main__":
    sys.exit(main())
