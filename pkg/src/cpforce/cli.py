"""Batch front end: config-driven sweeps and trajectories.

A run is described by a single TOML file with nested sections; unknown
keys anywhere in the file are rejected so that typos in physics
parameters cannot pass silently.  Results are written as plain
tab-separated tables with a commented header naming each column and its
units, so any external plotting tool can consume them.

Exit codes: 0 success, 2 configuration error, 3 numeric failure in at
least one row, 4 validity-window violation in strict mode.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import List, Optional, Sequence, Tuple

import numpy as np
import tomli

from . import __version__
from .atom import AtomSpec, dipole_vector
from .dynamics import DensityMatrix, evolve_offdiagonal, evolve_populations, force_trajectory
from .errors import ConfigError, CPForceError
from .force import (
    force_component_general,
    perturbative_force,
    two_level_offresonant_force,
    two_level_resonant_force,
    vdw_potential_offres,
    vdw_potential_res,
)
from .greens import green_scatter, green_scatter_iu
from .material import DrudeLorentzParams, MaterialModel
from .spectra import (
    SHORT_DISTANCE_WARN,
    check_offresonant_bound,
    short_distance_validity,
    solve_two_level_shift,
    two_level_perturbative,
)
from .units import coupling_C_from_dipole

OK = "ok"


# --------------------------------------------------------------------------
# configuration schema
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MaterialConfig:
    omega_p: float
    gamma: float
    mu_omega_p: Optional[float] = None
    mu_gamma: Optional[float] = None

    def build(self) -> MaterialModel:
        mu = None
        if self.mu_omega_p is not None:
            mu = DrudeLorentzParams(self.mu_omega_p, self.mu_gamma)
        if self.omega_p == 0.0 and mu is None:
            return MaterialModel.vacuum()
        return MaterialModel.drude_lorentz(self.omega_p, self.gamma, mu)


@dataclass(frozen=True)
class AtomConfig:
    kind: str
    g: float = 0.0
    omega10: float = 1.0
    theta: float = 0.0
    phi: float = 0.0
    levels: Tuple[float, ...] = ()
    transitions: Tuple[Tuple[int, int, float, float, float], ...] = ()

    def build(self, omega10_override: Optional[float] = None) -> AtomSpec:
        if self.kind == "two_level":
            w = self.omega10 if omega10_override is None else omega10_override
            return AtomSpec.two_level(self.g, w, self.theta, self.phi)
        dipoles = {
            (m, n): dipole_vector(g, th, ph)
            for (m, n, g, th, ph) in self.transitions
        }
        return AtomSpec(energies=tuple(self.levels), dipoles=dipoles)


@dataclass(frozen=True)
class SweepConfig:
    variable: str
    vmin: float
    vmax: float
    points: int
    scale: str = "lin"

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.logspace(math.log10(self.vmin), math.log10(self.vmax), self.points)
        return np.linspace(self.vmin, self.vmax, self.points)


@dataclass(frozen=True)
class DynamicsConfig:
    t_max: float
    points: int
    populations: Tuple[float, ...]
    coherences: Tuple[Tuple[int, int, float, float], ...] = ()


@dataclass(frozen=True)
class RunConfig:
    material: MaterialConfig
    atom: AtomConfig
    z: float
    task: str
    sweep: Optional[SweepConfig]
    out_path: str
    precision: int
    state: int = 0
    greens_omega: float = 1.0
    greens_imaginary: bool = False
    dynamics: Optional[DynamicsConfig] = None


_SCHEMA = {
    "material": {"omega_p", "gamma", "mu"},
    "material.mu": {"omega_p", "gamma"},
    "atom": {"type", "g", "omega10", "theta", "phi", "levels", "transitions"},
    "atom.transitions": {"m", "n", "g", "theta", "phi"},
    "geometry": {"z"},
    "task": {"kind", "state", "omega", "imaginary"},
    "sweep": {"variable", "min", "max", "points", "scale"},
    "output": {"path", "precision"},
    "dynamics": {"t_max", "points", "populations", "coherences"},
}
_TASKS = ("shift", "force", "potential", "dynamics", "greens")
_SWEEP_VARS = ("omega10", "z", "u", "omega")
_TASK_SWEEP_VARS = {
    "shift": ("omega10", "z"),
    "force": ("omega10", "z"),
    "potential": ("omega10", "z"),
    "greens": ("z", "u", "omega"),
}


def _check_keys(table: dict, section: str):
    allowed = _SCHEMA[section]
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(
            "unknown key(s) %s in [%s]; allowed: %s"
            % (sorted(unknown), section, sorted(allowed))
        )


def _need(table: dict, section: str, key: str):
    if key not in table:
        raise ConfigError("missing key '%s' in [%s]" % (key, section))
    return table[key]


def parse_config(data: dict) -> RunConfig:
    unknown = set(data) - set(
        s for s in _SCHEMA if "." not in s
    )
    if unknown:
        raise ConfigError("unknown section(s): %s" % sorted(unknown))

    mat_tbl = _need(data, "<root>", "material")
    _check_keys(mat_tbl, "material")
    mu_tbl = mat_tbl.get("mu")
    if mu_tbl is not None:
        _check_keys(mu_tbl, "material.mu")
    material = MaterialConfig(
        omega_p=float(_need(mat_tbl, "material", "omega_p")),
        gamma=float(_need(mat_tbl, "material", "gamma")),
        mu_omega_p=float(_need(mu_tbl, "material.mu", "omega_p")) if mu_tbl else None,
        mu_gamma=float(_need(mu_tbl, "material.mu", "gamma")) if mu_tbl else None,
    )
    if material.omega_p < 0.0:
        raise ConfigError("material omega_p must be non-negative")
    if material.omega_p > 0.0 and material.gamma <= 0.0:
        raise ConfigError(
            "a dispersive medium must be absorbing: gamma must be positive"
        )
    if material.mu_omega_p is not None and material.mu_gamma <= 0.0:
        raise ConfigError("magnetic response needs a positive linewidth")

    atom_tbl = _need(data, "<root>", "atom")
    _check_keys(atom_tbl, "atom")
    kind = atom_tbl.get("type", "two_level")
    if kind not in ("two_level", "multilevel"):
        raise ConfigError("atom type must be 'two_level' or 'multilevel'")
    transitions = []
    for tr in atom_tbl.get("transitions", []):
        _check_keys(tr, "atom.transitions")
        transitions.append(
            (
                int(_need(tr, "atom.transitions", "m")),
                int(_need(tr, "atom.transitions", "n")),
                float(_need(tr, "atom.transitions", "g")),
                float(tr.get("theta", 0.0)),
                float(tr.get("phi", 0.0)),
            )
        )
    atom = AtomConfig(
        kind=kind,
        g=float(atom_tbl.get("g", 0.0)),
        omega10=float(atom_tbl.get("omega10", 1.0)),
        theta=float(atom_tbl.get("theta", 0.0)),
        phi=float(atom_tbl.get("phi", 0.0)),
        levels=tuple(float(x) for x in atom_tbl.get("levels", ())),
        transitions=tuple(transitions),
    )
    if kind == "multilevel" and len(atom.levels) < 2:
        raise ConfigError("multilevel atom needs a 'levels' list")

    geo_tbl = _need(data, "<root>", "geometry")
    _check_keys(geo_tbl, "geometry")
    z = float(_need(geo_tbl, "geometry", "z"))

    task_tbl = _need(data, "<root>", "task")
    _check_keys(task_tbl, "task")
    task = _need(task_tbl, "task", "kind")
    if task not in _TASKS:
        raise ConfigError("task kind must be one of %s" % (_TASKS,))

    sweep = None
    if "sweep" in data:
        sw = data["sweep"]
        _check_keys(sw, "sweep")
        variable = _need(sw, "sweep", "variable")
        allowed_vars = _TASK_SWEEP_VARS.get(task, _SWEEP_VARS)
        if variable not in allowed_vars:
            raise ConfigError(
                "sweep variable for task '%s' must be one of %s"
                % (task, allowed_vars)
            )
        vmin = float(_need(sw, "sweep", "min"))
        vmax = float(_need(sw, "sweep", "max"))
        points = int(_need(sw, "sweep", "points"))
        scale = sw.get("scale", "lin")
        if scale not in ("lin", "log"):
            raise ConfigError("sweep scale must be 'lin' or 'log'")
        if not vmin < vmax:
            raise ConfigError("sweep bounds must satisfy min < max")
        if points < 2:
            raise ConfigError("sweep needs at least 2 points")
        if scale == "log" and vmin <= 0.0:
            raise ConfigError("log sweeps need positive bounds")
        sweep = SweepConfig(variable, vmin, vmax, points, scale)
    elif task in ("shift", "force", "potential", "greens"):
        raise ConfigError("task '%s' requires a [sweep] section" % task)

    out_tbl = _need(data, "<root>", "output")
    _check_keys(out_tbl, "output")
    out_path = str(_need(out_tbl, "output", "path"))
    precision = int(out_tbl.get("precision", 9))
    if not 1 <= precision <= 17:
        raise ConfigError("precision must be between 1 and 17")

    dyn = None
    if task == "dynamics":
        dyn_tbl = _need(data, "<root>", "dynamics")
        _check_keys(dyn_tbl, "dynamics")
        coh = []
        for entry in dyn_tbl.get("coherences", ()):
            if len(entry) != 4:
                raise ConfigError("coherences entries are [m, n, re, im]")
            coh.append((int(entry[0]), int(entry[1]), float(entry[2]), float(entry[3])))
        dyn = DynamicsConfig(
            t_max=float(_need(dyn_tbl, "dynamics", "t_max")),
            points=int(_need(dyn_tbl, "dynamics", "points")),
            populations=tuple(float(x) for x in _need(dyn_tbl, "dynamics", "populations")),
            coherences=tuple(coh),
        )
        if dyn.t_max <= 0.0 or dyn.points < 2:
            raise ConfigError("dynamics needs t_max > 0 and points >= 2")

    return RunConfig(
        material=material,
        atom=atom,
        z=z,
        task=task,
        sweep=sweep,
        out_path=out_path,
        precision=precision,
        state=int(task_tbl.get("state", 0)),
        greens_omega=float(task_tbl.get("omega", 1.0)),
        greens_imaginary=bool(task_tbl.get("imaginary", False)),
        dynamics=dyn,
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except OSError as exc:
        raise ConfigError("cannot read config file: %s" % exc) from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError("malformed config file: %s" % exc) from exc
    return parse_config(data)


# --------------------------------------------------------------------------
# tables
# --------------------------------------------------------------------------

@dataclass
class Table:
    title: str
    columns: List[Tuple[str, str]]  # (name, description)
    rows: List[list] = field(default_factory=list)

    @property
    def statuses(self) -> List[str]:
        return [row[-1] for row in self.rows]

    def any_failure(self) -> bool:
        return any(s.startswith("error") for s in self.statuses)

    def any_validity_warning(self) -> bool:
        return any("validity" in s for s in self.statuses)

    def column(self, name: str) -> list:
        idx = [c[0] for c in self.columns].index(name)
        return [row[idx] for row in self.rows]


def write_table(table: Table, path: str, precision: int):
    fmt = "%%.%de" % precision
    lines = ["# %s" % table.title, "# columns:"]
    for i, (name, desc) in enumerate(table.columns, start=1):
        lines.append("#   %d %s  %s" % (i, name, desc))
    lines.append("\t".join(name for name, _ in table.columns))
    for row in table.rows:
        cells = []
        for v in row:
            if isinstance(v, str):
                cells.append(v)
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append(fmt % v)
        lines.append("\t".join(cells))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _finite_or_flag(values: list, status: str) -> str:
    if status == OK and any(
        isinstance(v, float) and not math.isfinite(v) for v in values
    ):
        return "error-nan"
    return status


# --------------------------------------------------------------------------
# row evaluators (module level so they pickle for worker pools)
# --------------------------------------------------------------------------

def _point(cfg: RunConfig, value: float) -> Tuple[AtomSpec, float]:
    if cfg.sweep is not None and cfg.sweep.variable == "omega10":
        return cfg.atom.build(omega10_override=value), cfg.z
    if cfg.sweep is not None and cfg.sweep.variable == "z":
        return cfg.atom.build(), value
    return cfg.atom.build(), cfg.z


def _shift_row(cfg: RunConfig, tol: Optional[float], value: float) -> list:
    atom, z = _point(cfg, value)
    model = cfg.material.build()
    status = OK
    out = [value] + [math.nan] * 7
    try:
        spectrum = solve_two_level_shift(atom, model, z)
        d_pert, g_pert = two_level_perturbative(atom, model, z)
        ratio = check_offresonant_bound(spectrum, model, z)
        out = [
            value,
            spectrum.level_shifts[1],
            d_pert,
            spectrum.widths[1],
            g_pert,
            spectrum.delta_or,
            ratio,
            spectrum.iterations,
        ]
        if not model.is_vacuum:
            val = short_distance_validity(model, z, spectrum.omega_tilde(1, 0))
            if val > SHORT_DISTANCE_WARN:
                status = "warn-validity"
    except CPForceError as exc:
        status = "error-%s" % type(exc).__name__
    return out + [_finite_or_flag(out, status)]


def _force_row(cfg: RunConfig, tol: Optional[float], value: float) -> list:
    atom, z = _point(cfg, value)
    model = cfg.material.build()
    rtol = tol if tol is not None else 1e-9
    status = OK
    out = [value] + [math.nan] * 9
    try:
        spectrum = solve_two_level_shift(atom, model, z)
        c3 = coupling_C_from_dipole(atom.dipole(1, 0))
        norm = 1.0 / (3.0 * c3) if c3 > 0.0 else 0.0
        f_r = two_level_resonant_force(atom, model, spectrum, z)
        f_r_pert = two_level_resonant_force(
            atom, model, spectrum, z, perturbative=True
        )
        f_r_shift = two_level_resonant_force(
            atom, model, spectrum, z, use_shift=True, use_broadening=False
        )
        f_r_broad = two_level_resonant_force(
            atom, model, spectrum, z, use_shift=False, use_broadening=True
        )
        f_or = two_level_offresonant_force(
            atom, model, spectrum, z, state=1, rtol=rtol
        )
        f_or_pert = two_level_offresonant_force(
            atom, model, spectrum, z, state=1, perturbative=True, rtol=rtol
        )
        f00_or = -f_or
        out = [
            value,
            f_r * norm,
            f_r_pert * norm,
            f_r_shift * norm,
            f_r_broad * norm,
            f_or * norm,
            f_or_pert * norm,
            f00_or * norm,
            f_r,
            f_or,
        ]
        if not model.is_vacuum:
            val = short_distance_validity(model, z, spectrum.omega_tilde(1, 0))
            if val > SHORT_DISTANCE_WARN:
                status = "warn-validity"
    except CPForceError as exc:
        status = "error-%s" % type(exc).__name__
    return out + [_finite_or_flag(out, status)]


def _potential_row(cfg: RunConfig, tol: Optional[float], value: float) -> list:
    atom, z = _point(cfg, value)
    model = cfg.material.build()
    rtol = tol if tol is not None else 1e-8
    status = OK
    out = [value] + [math.nan] * 4
    try:
        u_or = vdw_potential_offres(atom, model, cfg.state, z, rtol=rtol)
        u_r = vdw_potential_res(atom, model, cfg.state, z, rtol=rtol)
        f = perturbative_force(atom, model, cfg.state, z, rtol=rtol)
        out = [value, u_or, u_r, u_or + u_r, f[2]]
    except CPForceError as exc:
        status = "error-%s" % type(exc).__name__
    return out + [_finite_or_flag(out, status)]


def _greens_row(cfg: RunConfig, tol: Optional[float], value: float) -> list:
    model = cfg.material.build()
    rtol = tol if tol is not None else 1e-9
    status = OK
    out = [value] + [math.nan] * 8
    try:
        if cfg.sweep.variable == "z":
            z = value
            if cfg.greens_imaginary:
                g = green_scatter_iu(model, z, cfg.greens_omega, rtol=rtol)
            else:
                g = green_scatter(model, z, cfg.greens_omega, rtol=rtol)
        elif cfg.sweep.variable == "u":
            g = green_scatter_iu(model, cfg.z, value, rtol=rtol)
        else:  # omega
            g = green_scatter(model, cfg.z, value, rtol=rtol)
        out = [
            value,
            g.tensor[0, 0].real,
            g.tensor[0, 0].imag,
            g.tensor[2, 2].real,
            g.tensor[2, 2].imag,
            g.dz_tensor[0, 0].real,
            g.dz_tensor[0, 0].imag,
            g.dz_tensor[2, 2].real,
            g.dz_tensor[2, 2].imag,
        ]
    except CPForceError as exc:
        status = "error-%s" % type(exc).__name__
    return out + [_finite_or_flag(out, status)]


_ROW_FUNCS = {
    "shift": _shift_row,
    "force": _force_row,
    "potential": _potential_row,
    "greens": _greens_row,
}

_SWEEP_COLUMNS = {
    "shift": [
        ("delta_nonpert", "self-consistent transition shift [omega_T]"),
        ("delta_pert", "bare-frequency transition shift [omega_T]"),
        ("gamma_nonpert", "width at the shifted frequency [omega_T]"),
        ("gamma_pert", "width at the bare frequency [omega_T]"),
        ("delta_offres", "off-resonant transition shift [omega_T]"),
        ("offres_ratio", "off-resonant shift over shifted frequency"),
        ("iterations", "fixed-point iterations"),
    ],
    "force": [
        ("F_r_norm", "resonant force, lambda_T^4/(3C) units"),
        ("F_r_pert_norm", "resonant force, bare frequency and medium linewidth"),
        ("F_r_shift_norm", "resonant force, shift only (no atomic broadening)"),
        ("F_r_broad_norm", "resonant force, broadening only (bare frequency)"),
        ("F_or_norm", "off-resonant force on the excited state"),
        ("F_or_pert_norm", "off-resonant force, bare frequency, zero width"),
        ("F00_or_norm", "off-resonant force on the ground state"),
        ("F_r_raw", "resonant force [hbar omega_T / lambda_T]"),
        ("F_or_raw", "off-resonant force [hbar omega_T / lambda_T]"),
    ],
    "potential": [
        ("U_or", "off-resonant potential [hbar omega_T]"),
        ("U_r", "resonant potential [hbar omega_T]"),
        ("U_total", "total potential [hbar omega_T]"),
        ("F_z", "perturbative force [hbar omega_T / lambda_T]"),
    ],
    "greens": [
        ("Re_Gxx", "Re G_xx [1/lambda_T]"),
        ("Im_Gxx", "Im G_xx [1/lambda_T]"),
        ("Re_Gzz", "Re G_zz [1/lambda_T]"),
        ("Im_Gzz", "Im G_zz [1/lambda_T]"),
        ("Re_dzGxx", "Re dG_xx/dz [1/lambda_T^2]"),
        ("Im_dzGxx", "Im dG_xx/dz [1/lambda_T^2]"),
        ("Re_dzGzz", "Re dG_zz/dz [1/lambda_T^2]"),
        ("Im_dzGzz", "Im dG_zz/dz [1/lambda_T^2]"),
    ],
}

_SWEEP_VAR_DESC = {
    "omega10": "bare transition frequency [omega_T]",
    "z": "atom-surface distance [lambda_T]",
    "u": "imaginary-frequency coordinate [omega_T]",
    "omega": "frequency [omega_T]",
}


def run_sweep(cfg: RunConfig, tolerance: Optional[float] = None, workers: int = 1) -> Table:
    """Evaluate a sweep task row by row; failures are recorded in the
    status column and do not interrupt the remaining rows."""
    row_func = _ROW_FUNCS[cfg.task]
    values = cfg.sweep.values()
    work = partial(row_func, cfg, tolerance)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(work, values))
    else:
        rows = [work(v) for v in values]
    columns = [(cfg.sweep.variable, _SWEEP_VAR_DESC[cfg.sweep.variable])]
    columns += _SWEEP_COLUMNS[cfg.task]
    columns.append(("status", "ok / warn-* / error-*"))
    return Table(title="cpforce %s sweep" % cfg.task, columns=columns, rows=rows)


def run_shift_sweep(cfg: RunConfig, tolerance=None, workers: int = 1) -> Table:
    if cfg.task != "shift":
        raise ConfigError("config task is not 'shift'")
    return run_sweep(cfg, tolerance, workers)


def run_force_sweep(cfg: RunConfig, tolerance=None, workers: int = 1) -> Table:
    if cfg.task != "force":
        raise ConfigError("config task is not 'force'")
    return run_sweep(cfg, tolerance, workers)


def run_dynamics(cfg: RunConfig, tolerance: Optional[float] = None) -> Table:
    """Trajectory task: populations, coherences and force versus time."""
    if cfg.task != "dynamics" or cfg.dynamics is None:
        raise ConfigError("config task is not 'dynamics'")
    atom = cfg.atom.build()
    model = cfg.material.build()
    dyn = cfg.dynamics
    n = atom.n_levels
    if len(dyn.populations) != n:
        raise ConfigError(
            "populations list must have one entry per level (%d)" % n
        )
    try:
        sigma0 = DensityMatrix.from_entries(
            n,
            {i: p for i, p in enumerate(dyn.populations)},
            {(m, nn): re + 1j * im for (m, nn, re, im) in dyn.coherences},
        )
    except CPForceError as exc:
        raise ConfigError("invalid initial density matrix: %s" % exc) from exc
    if atom.n_levels == 2:
        spectrum = solve_two_level_shift(atom, model, cfg.z)
    else:
        from .spectra import build_spectrum_general

        spectrum = build_spectrum_general(atom, model, cfg.z)

    rtol = tolerance if tolerance is not None else 1e-8
    pairs = [(m, m) for m in range(n)]
    for (m, nn, re, im) in dyn.coherences:
        if re != 0.0 or im != 0.0:
            pairs.append((m, nn))
            pairs.append((nn, m))
    table = {
        p: force_component_general(atom, model, spectrum, p[0], p[1], cfg.z, rtol=rtol)
        for p in dict.fromkeys(pairs)
    }
    t_grid = np.linspace(0.0, dyn.t_max, dyn.points)
    traj = force_trajectory(atom, model, spectrum, table, sigma0, t_grid)
    pops = evolve_populations(spectrum, sigma0, t_grid)

    coh_pairs = [(m, nn) for (m, nn, _re, _im) in dyn.coherences]
    columns = [("t", "time [1/omega_T]")]
    columns += [("p%d" % m, "population of level %d" % m) for m in range(n)]
    for (m, nn) in coh_pairs:
        columns.append(("Re_s%d%d" % (nn, m), "Re sigma_%d%d" % (nn, m)))
        columns.append(("Im_s%d%d" % (nn, m), "Im sigma_%d%d" % (nn, m)))
    columns += [
        ("F_z", "total force [hbar omega_T / lambda_T]"),
        ("F_el_or_z", "electric off-resonant part"),
        ("F_el_r_z", "electric resonant part"),
        ("F_mag_or_z", "magnetic off-resonant part"),
        ("F_mag_r_z", "magnetic resonant part"),
        ("status", "ok / error-*"),
    ]
    rows = []
    for i, t in enumerate(t_grid):
        row = [t] + [pops[i, m] for m in range(n)]
        for (m, nn) in coh_pairs:
            s = evolve_offdiagonal(spectrum, sigma0, m, nn, t)
            row += [s.real, s.imag]
        row += [
            traj.totals[i, 2],
            traj.per_part["el_or"][i, 2].real,
            traj.per_part["el_r"][i, 2].real,
            traj.per_part["mag_or"][i, 2].real,
            traj.per_part["mag_r"][i, 2].real,
        ]
        rows.append(row + [_finite_or_flag(row, OK)])
    return Table(title="cpforce dynamics trajectory", columns=columns, rows=rows)


def run_task(cfg: RunConfig, tolerance=None, workers: int = 1) -> Table:
    if cfg.task == "dynamics":
        return run_dynamics(cfg, tolerance)
    return run_sweep(cfg, tolerance, workers)


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpforce",
        description="Casimir-Polder forces on an atom near an absorbing "
        "half space: shifts, widths, force sweeps, Green-tensor dumps and "
        "internal-state dynamics.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("shift", "frequency shift and width sweep"),
        ("force", "resonant/off-resonant force sweep"),
        ("potential", "perturbative potential and force sweep"),
        ("dynamics", "density-matrix trajectory and time-dependent force"),
        ("greens", "raw Green-tensor dump"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="TOML run configuration")
        p.add_argument("--out", default=None, help="output path (overrides config)")
        p.add_argument(
            "--strict",
            action="store_true",
            help="treat validity-window violations as fatal (exit 4)",
        )
        p.add_argument("--workers", type=int, default=1, help="parallel sweep rows")
        p.add_argument(
            "--tolerance",
            type=float,
            default=None,
            help="override the default quadrature tolerance",
        )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if cfg.task != args.command:
            raise ConfigError(
                "config task '%s' does not match subcommand '%s'"
                % (cfg.task, args.command)
            )
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2

    try:
        table = run_task(cfg, tolerance=args.tolerance, workers=args.workers)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except CPForceError as exc:
        print("numeric failure: %s" % exc, file=sys.stderr)
        return 3

    if table.any_validity_warning():
        print(
            "warning: some rows are outside the short-distance validity "
            "window (see status column)",
            file=sys.stderr,
        )
        if args.strict:
            print("strict mode: aborting without output", file=sys.stderr)
            return 4

    out_path = args.out if args.out is not None else cfg.out_path
    write_table(table, out_path, cfg.precision)
    if table.any_failure():
        print("numeric failure in at least one row", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
