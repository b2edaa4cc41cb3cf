import math
import textwrap

import numpy as np
import pytest

from cpforce.cli import load_config, main, run_dynamics, run_shift_sweep, run_sweep
from cpforce.errors import ConfigError


BASE = """
[material]
omega_p = 0.75
gamma = 0.01

[atom]
type = "two_level"
g = 1e-7
omega10 = 1.0
theta = 0.0

[geometry]
z = 0.0075

[task]
kind = "%(kind)s"
%(task_extra)s

%(sweep)s

[output]
path = "%(out)s"
precision = 9

%(extra)s
"""

SWEEP_OMEGA = """
[sweep]
variable = "omega10"
min = %(lo)s
max = %(hi)s
points = %(points)d
scale = "lin"
"""


def _write(tmp_path, name, kind, sweep="", extra="", task_extra="", out=None):
    out = out or str(tmp_path / ("%s.tsv" % kind))
    cfg = BASE % {
        "kind": kind,
        "sweep": sweep,
        "extra": extra,
        "task_extra": task_extra,
        "out": out,
    }
    path = tmp_path / ("%s.toml" % name)
    path.write_text(textwrap.dedent(cfg))
    return str(path), out


def _sweep(lo, hi, points):
    return SWEEP_OMEGA % {"lo": lo, "hi": hi, "points": points}


class TestConfig:
    def test_roundtrip(self, tmp_path):
        path, _ = _write(tmp_path, "ok", "shift", sweep=_sweep(0.9, 1.2, 5))
        cfg = load_config(path)
        assert cfg.task == "shift"
        assert cfg.sweep.points == 5
        assert cfg.material.omega_p == 0.75

    def test_unknown_key_rejected(self, tmp_path):
        path, _ = _write(
            tmp_path,
            "bad",
            "shift",
            sweep=_sweep(0.9, 1.2, 5),
            extra="[dynamics]\nt_max = 1.0\npoints = 5\npopulations = [0,1]\n",
        )
        # dynamics section is fine; an unknown material key is not
        txt = open(path).read().replace("omega_p = 0.75", "omega_pp = 0.75")
        open(path, "w").write(txt)
        with pytest.raises(ConfigError):
            load_config(path)

    def test_missing_sweep_rejected(self, tmp_path):
        path, _ = _write(tmp_path, "nosweep", "shift")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_bad_bounds_rejected(self, tmp_path):
        path, _ = _write(tmp_path, "bounds", "shift", sweep=_sweep(1.2, 0.9, 5))
        with pytest.raises(ConfigError):
            load_config(path)

    def test_single_point_rejected(self, tmp_path):
        path, _ = _write(tmp_path, "pts", "shift", sweep=_sweep(0.9, 1.2, 1))
        with pytest.raises(ConfigError):
            load_config(path)


class TestShiftSweep:
    def test_sweep_sign_structure(self, tmp_path):
        path, _ = _write(tmp_path, "sweep1", "shift", sweep=_sweep(0.8, 1.4, 41))
        cfg = load_config(path)
        table = run_shift_sweep(cfg)
        deltas = np.array(table.column("delta_nonpert"))
        omegas = np.array(table.column("omega10"))
        ws = math.sqrt(1.28125)
        assert np.all(deltas[omegas < ws - 0.1] < 0.0)
        assert np.all(deltas[omegas > ws + 0.1] > 0.0)
        assert all(s in ("ok", "warn-validity") for s in table.statuses)

    def test_zero_coupling_all_zero(self, tmp_path):
        path, _ = _write(tmp_path, "g0", "shift", sweep=_sweep(0.9, 1.2, 5))
        txt = open(path).read().replace("g = 1e-7", "g = 0.0")
        open(path, "w").write(txt)
        cfg = load_config(path)
        table = run_shift_sweep(cfg)
        assert all(v == 0.0 for v in table.column("delta_nonpert"))
        assert all(v == 0.0 for v in table.column("gamma_nonpert"))

    def test_distance_scaling_between_runs(self, tmp_path):
        # far from resonance the shift scales as 1/z^3
        vals = {}
        for z in (0.0075, 0.009):
            path, _ = _write(tmp_path, "z%g" % z, "shift", sweep=_sweep(0.5, 0.6, 3))
            txt = open(path).read().replace("z = 0.0075", "z = %r" % z)
            open(path, "w").write(txt)
            table = run_shift_sweep(load_config(path))
            vals[z] = np.array(table.column("delta_nonpert"))
        ratio = vals[0.0075] / vals[0.009]
        assert np.allclose(ratio, (0.009 / 0.0075) ** 3, rtol=2e-3)

    def test_workers_match_serial(self, tmp_path):
        path, _ = _write(tmp_path, "par", "shift", sweep=_sweep(0.9, 1.2, 6))
        cfg = load_config(path)
        serial = run_sweep(cfg, workers=1)
        parallel = run_sweep(cfg, workers=2)
        assert serial.rows == parallel.rows


class TestForceSweep:
    def test_antisymmetry_rowwise(self, tmp_path):
        path, _ = _write(tmp_path, "f", "force", sweep=_sweep(1.0, 1.3, 7))
        cfg = load_config(path)
        table = run_sweep(cfg)
        f_or = np.array(table.column("F_or_norm"))
        f00 = np.array(table.column("F00_or_norm"))
        assert np.all(f00 == -f_or)

    def test_vacuum_zero_columns(self, tmp_path):
        path, _ = _write(tmp_path, "vac", "force", sweep=_sweep(1.0, 1.3, 4))
        txt = open(path).read().replace("omega_p = 0.75", "omega_p = 0.0")
        open(path, "w").write(txt)
        table = run_sweep(load_config(path))
        for col in ("F_r_norm", "F_or_norm", "F_r_raw"):
            assert all(v == 0.0 for v in table.column(col))

    def test_resonant_curve_shape(self, tmp_path):
        path, _ = _write(tmp_path, "shape", "force", sweep=_sweep(0.95, 1.35, 41))
        table = run_sweep(load_config(path))
        f = np.array(table.column("F_r_norm"))
        w = np.array(table.column("omega10"))
        ws = math.sqrt(1.28125)
        i_min, i_max = np.argmin(f), np.argmax(f)
        assert w[i_min] < ws < w[i_max]
        assert f[i_min] < 0.0 < f[i_max]


class TestDynamicsRun:
    def test_excited_decay_endpoints(self, tmp_path):
        extra = textwrap.dedent(
            """
            [dynamics]
            t_max = 1.2e6
            points = 40
            populations = [0.0, 1.0]
            """
        )
        path, _ = _write(tmp_path, "dyn", "dynamics", extra=extra)
        cfg = load_config(path)
        table = run_dynamics(cfg)
        fz = np.array(table.column("F_z"))
        p1 = np.array(table.column("p1"))
        assert p1[0] == pytest.approx(1.0)
        assert p1[-1] < 1e-6
        # settles at the ground-state (off-resonant) force
        assert fz[-1] == pytest.approx(
            np.array(table.column("F_el_or_z"))[-1], rel=1e-4
        )
        assert all(s == "ok" for s in table.statuses)

    def test_ground_state_constant(self, tmp_path):
        extra = textwrap.dedent(
            """
            [dynamics]
            t_max = 1e5
            points = 9
            populations = [1.0, 0.0]
            """
        )
        path, _ = _write(tmp_path, "dyng", "dynamics", extra=extra)
        table = run_dynamics(load_config(path))
        fz = np.array(table.column("F_z"))
        assert np.allclose(fz, fz[0], rtol=1e-12)

    def test_qubit_oscillation_period(self, tmp_path):
        # three-level ladder so the 0-1 coherence carries a force; the
        # period is read off the emitted magnetic column by zero
        # crossings and must match 2 pi / w~_10
        extra = textwrap.dedent(
            """
            [dynamics]
            t_max = 40.0
            points = 400
            populations = [0.5, 0.5, 0.0]
            coherences = [[0, 1, 0.5, 0.0]]
            """
        )
        atom_block = textwrap.dedent(
            """
            type = "multilevel"
            levels = [0.0, 1.0, 2.3]
            transitions = [
              {m = 1, n = 0, g = 1e-7, theta = 1.5707963267948966},
              {m = 2, n = 0, g = 5e-8, theta = 1.5707963267948966},
              {m = 2, n = 1, g = 8e-8, theta = 1.5707963267948966},
            ]
            """
        )
        path, _ = _write(tmp_path, "qubit", "dynamics", extra=extra)
        txt = open(path).read()
        txt = txt.replace(
            'type = "two_level"\ng = 1e-7\nomega10 = 1.0\ntheta = 0.0',
            atom_block.strip(),
        )
        open(path, "w").write(txt)
        cfg = load_config(path)
        table = run_dynamics(cfg)
        t = np.array(table.column("t"))
        osc = np.array(table.column("F_mag_or_z"))
        assert np.max(np.abs(osc)) > 0.0
        signs = np.sign(osc)
        crossings = t[np.where(np.diff(signs) != 0)[0]]
        period = 2.0 * np.mean(np.diff(crossings))
        # shifted frequency is within a couple of 1e-4 of bare 1.0 here
        assert period == pytest.approx(2.0 * math.pi, rel=0.01)


class TestMainEntry:
    def test_end_to_end_and_determinism(self, tmp_path):
        path, out = _write(tmp_path, "e2e", "shift", sweep=_sweep(0.9, 1.2, 5))
        assert main(["shift", "--config", path]) == 0
        first = open(out, "rb").read()
        assert main(["shift", "--config", path]) == 0
        assert open(out, "rb").read() == first
        assert b"status" in first

    def test_config_error_exit_code(self, tmp_path):
        path, _ = _write(tmp_path, "bad2", "shift", sweep=_sweep(0.9, 1.2, 5))
        txt = open(path).read().replace("omega_p", "omega_plasma")
        open(path, "w").write(txt)
        assert main(["shift", "--config", path]) == 2

    def test_subcommand_mismatch(self, tmp_path):
        path, _ = _write(tmp_path, "mism", "shift", sweep=_sweep(0.9, 1.2, 5))
        assert main(["force", "--config", path]) == 2

    def test_strict_validity_exit_code(self, tmp_path):
        # z far outside the short-distance window trips the validity
        # check; strict mode turns it into exit code 4
        path, out = _write(tmp_path, "far", "shift", sweep=_sweep(0.98, 1.02, 3))
        txt = open(path).read().replace("z = 0.0075", "z = 0.1")
        open(path, "w").write(txt)
        assert main(["shift", "--config", path, "--strict"]) == 4
        assert main(["shift", "--config", path]) == 0

    def test_numeric_failure_exit_code(self, tmp_path):
        # an absurd coupling drives the solver into the unphysical
        # regime on part of the sweep; those rows are flagged, the rest
        # still computes, and the run exits 3
        path, out = _write(tmp_path, "fail", "shift", sweep=_sweep(0.02, 1.2, 6))
        txt = open(path).read().replace("g = 1e-7", "g = 3e-2")
        txt = txt.replace("z = 0.0075", "z = 0.003")
        open(path, "w").write(txt)
        assert main(["shift", "--config", path]) == 3
        rows = [l.split() for l in open(out) if not l.startswith("#")][1:]
        statuses = [r[-1] for r in rows]
        assert any(s.startswith("error") for s in statuses)
        assert any(s == "ok" for s in statuses)
        for r, s in zip(rows, statuses):
            if s.startswith("error"):
                assert "nan" in " ".join(r[:-1])

    def test_out_override(self, tmp_path):
        path, _ = _write(tmp_path, "ov", "shift", sweep=_sweep(0.9, 1.2, 4))
        target = str(tmp_path / "custom.tsv")
        assert main(["shift", "--config", path, "--out", target]) == 0
        assert open(target).readline().startswith("#")

    def test_greens_dump(self, tmp_path):
        sweep = textwrap.dedent(
            """
            [sweep]
            variable = "u"
            min = 0.5
            max = 2.0
            points = 4
            """
        )
        path, out = _write(
            tmp_path, "green", "greens", sweep=sweep, task_extra=""
        )
        assert main(["greens", "--config", path]) == 0
        lines = [l for l in open(out) if not l.startswith("#")]
        header = lines[0].split()
        assert "Re_Gxx" in header and "Re_dzGzz" in header
        row = lines[1].split()
        assert float(row[header.index("Im_Gxx")]) == 0.0

    def test_potential_sweep(self, tmp_path):
        sweep = textwrap.dedent(
            """
            [sweep]
            variable = "z"
            min = 0.005
            max = 0.01
            points = 3
            scale = "log"
            """
        )
        path, out = _write(
            tmp_path, "pot", "potential", sweep=sweep, task_extra="state = 0"
        )
        assert main(["potential", "--config", path]) == 0
        lines = [l for l in open(out) if not l.startswith("#")]
        header = lines[0].split()
        u_idx = header.index("U_total")
        vals = [float(l.split()[u_idx]) for l in lines[1:]]
        assert all(v < 0.0 for v in vals)
        # attractive and weakening with distance
        assert vals[0] < vals[-1]
