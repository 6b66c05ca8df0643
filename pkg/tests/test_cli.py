"""End-to-end tests of the command-line drivers and CSV plumbing."""

import numpy as np
import pytest

from vfks import cli
from vfks.model import CellState, Grid


def write_config(tmp_path, name="run.cfg", **overrides):
    path = tmp_path / name
    lines = ["# test configuration"]
    lines += [f"{key}={value}" for key, value in overrides.items()]
    path.write_text("\n".join(lines) + "\n")
    return path


class TestParseConfig:
    def test_defaults_from_empty_file(self, tmp_path):
        cfg = cli.parse_config(write_config(tmp_path))
        assert cfg == cli.RunConfig()

    def test_round_trip_all_fields(self, tmp_path):
        path = write_config(tmp_path, m=3, chi=0.4, tau=0.5, eta=2.0, dt=1e-4,
                            newton_tol=1e-10, newton_max_iter=30,
                            c_update_mode="explicit", n_cells=50, t_end=1.5,
                            sample_interval=0.5, ic_kind="step", ic_amplitude=0.2,
                            ic_mass=0.3, output_dir="results", seed=7)
        cfg = cli.parse_config(path)
        assert cfg.m == 3.0 and cfg.chi == 0.4 and cfg.n_cells == 50
        assert cfg.c_update_mode == "explicit" and cfg.seed == 7
        assert cfg.ic_kind == "step" and cfg.output_dir == "results"

    def test_comments_and_blank_lines(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("# full line comment\n\nchi = 2.5  # trailing comment\n")
        assert cli.parse_config(path).chi == 2.5

    def test_unknown_key(self, tmp_path):
        with pytest.raises(cli.ConfigError):
            cli.parse_config(write_config(tmp_path, wavelength=5))

    def test_bad_value(self, tmp_path):
        with pytest.raises(cli.ConfigError):
            cli.parse_config(write_config(tmp_path, dt="fast"))

    def test_missing_equals(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("just words\n")
        with pytest.raises(cli.ConfigError):
            cli.parse_config(path)

    def test_bad_mass(self, tmp_path):
        with pytest.raises(cli.ConfigError):
            cli.parse_config(write_config(tmp_path, ic_mass=1.5))


class TestInitialConditions:
    def test_constant(self):
        cfg = cli.RunConfig(ic_kind="constant", ic_mass=0.3)
        s = cli.make_initial_condition(cfg, Grid(10))
        np.testing.assert_array_equal(s.rho, 0.3)
        np.testing.assert_array_equal(s.c, 0.3)

    def test_cosine_mass(self):
        cfg = cli.RunConfig(ic_kind="perturbed_cosine", ic_mass=0.5, ic_amplitude=0.01)
        g = Grid(100)
        s = cli.make_initial_condition(cfg, g)
        assert g.dx * np.sum(s.rho) == pytest.approx(0.5, abs=1e-14)

    def test_step_values(self):
        cfg = cli.RunConfig(ic_kind="step", ic_mass=0.5, ic_amplitude=0.3)
        g = Grid(10)
        s = cli.make_initial_condition(cfg, g)
        assert set(np.round(s.rho, 12)) == {0.8, 0.2}
        assert g.dx * np.sum(s.rho) == pytest.approx(0.5, abs=1e-14)

    def test_amplitude_too_large(self):
        cfg = cli.RunConfig(ic_kind="perturbed_cosine", ic_mass=0.2, ic_amplitude=0.3)
        with pytest.raises(cli.AmplitudeTooLarge):
            cli.make_initial_condition(cfg, Grid(10))

    def test_unknown_kind(self):
        cfg = cli.RunConfig(ic_kind="chirp")
        with pytest.raises(cli.ConfigError):
            cli.make_initial_condition(cfg, Grid(10))

    def test_from_file_round_trip(self, tmp_path):
        g = Grid(20)
        rng = np.random.default_rng(3)
        state = CellState(rng.uniform(0.1, 0.9, 20), rng.uniform(0.1, 0.9, 20), 0.0)
        path = tmp_path / "snap.csv"
        cli.write_snapshot(path, state, g, cli.RunConfig(n_cells=20))
        cfg = cli.RunConfig(ic_kind="from_file", ic_file=str(path), n_cells=20)
        loaded = cli.make_initial_condition(cfg, g)
        np.testing.assert_array_equal(loaded.rho, state.rho)
        np.testing.assert_array_equal(loaded.c, state.c)

    def test_from_file_wrong_size(self, tmp_path):
        g = Grid(20)
        state = CellState(np.full(20, 0.5), np.full(20, 0.5), 0.0)
        path = tmp_path / "snap.csv"
        cli.write_snapshot(path, state, g, cli.RunConfig(n_cells=20))
        cfg = cli.RunConfig(ic_kind="from_file", ic_file=str(path), n_cells=40)
        with pytest.raises(cli.ConfigError):
            cli.make_initial_condition(cfg, Grid(40))


class TestSimulateCommand:
    def test_zero_horizon(self, tmp_path):
        cfgfile = write_config(tmp_path, t_end=0, output_dir=str(tmp_path / "out"))
        assert cli.main(["simulate", "--config", str(cfgfile)]) == cli.EXIT_OK
        assert (tmp_path / "out" / "snapshot_initial.csv").exists()
        assert (tmp_path / "out" / "snapshot_final.csv").exists()
        series = (tmp_path / "out" / "series.csv").read_text()
        data_rows = [l for l in series.splitlines()
                     if l and not l.startswith("#") and not l.startswith("t,")]
        assert len(data_rows) == 1

    def test_reproducible_output(self, tmp_path):
        for run in ("a", "b"):
            cfgfile = write_config(tmp_path, name=f"{run}.cfg", t_end=0.05,
                                   output_dir=str(tmp_path / run))
            assert cli.main(["simulate", "--config", str(cfgfile)]) == cli.EXIT_OK
        for fname in ("series.csv", "snapshot_final.csv"):
            a = (tmp_path / "a" / fname).read_bytes()
            b = (tmp_path / "b" / fname).read_bytes()
            # strip the header line holding output_dir, which differs by design
            a = b"\n".join(l for l in a.split(b"\n") if not l.startswith(b"# output_dir"))
            b = b"\n".join(l for l in b.split(b"\n") if not l.startswith(b"# output_dir"))
            assert a == b

    def test_config_header_embedded(self, tmp_path):
        cfgfile = write_config(tmp_path, t_end=0, chi=2.0,
                               output_dir=str(tmp_path / "out"))
        cli.main(["simulate", "--config", str(cfgfile)])
        text = (tmp_path / "out" / "series.csv").read_text()
        assert "# chi=2.0" in text and "# m=2.0" in text

    def test_missing_config_is_config_error(self, tmp_path):
        code = cli.main(["simulate", "--config", str(tmp_path / "nope.cfg")])
        assert code == cli.EXIT_CONFIG

    def test_solver_failure_exit_code(self, tmp_path):
        cfgfile = write_config(tmp_path, chi=5.0, newton_max_iter=1, t_end=0.01,
                               output_dir=str(tmp_path / "out"))
        assert cli.main(["simulate", "--config", str(cfgfile)]) == cli.EXIT_SOLVER

    def test_output_flag_overrides(self, tmp_path):
        cfgfile = write_config(tmp_path, t_end=0)
        out = tmp_path / "elsewhere"
        assert cli.main(["simulate", "--config", str(cfgfile),
                         "--output", str(out)]) == cli.EXIT_OK
        assert (out / "series.csv").exists()


class TestSteadyCommand:
    def test_pattern_found(self, tmp_path):
        cfgfile = write_config(tmp_path, m=3, chi=0.4,
                               output_dir=str(tmp_path / "out"))
        assert cli.main(["steady", "--config", str(cfgfile)]) == cli.EXIT_OK
        x, rho, c = cli.read_snapshot(tmp_path / "out" / "steady_profile.csv")
        assert np.all(np.diff(c) > 0.0)
        assert np.all((rho > 0.0) & (rho < 1.0))

    def test_invalid_parameters(self, tmp_path):
        cfgfile = write_config(tmp_path, m=2, chi=0.5,
                               output_dir=str(tmp_path / "out"))
        assert cli.main(["steady", "--config", str(cfgfile)]) == cli.EXIT_CONFIG

    def test_no_solution_is_success(self, tmp_path, capsys):
        cfgfile = write_config(tmp_path, m=2.5, chi=0.05,
                               output_dir=str(tmp_path / "out"))
        assert cli.main(["steady", "--config", str(cfgfile)]) == cli.EXIT_OK
        assert "no nonconstant steady state" in capsys.readouterr().out


class TestSweepCommands:
    def test_tau_sweep(self, tmp_path):
        cfgfile = write_config(tmp_path, t_end=0.5, output_dir=str(tmp_path / "out"))
        code = cli.main(["sweep-tau", "--config", str(cfgfile),
                         "--values", "1,0.5"])
        assert code == cli.EXIT_OK
        text = (tmp_path / "out" / "sweep_tau.csv").read_text()
        rows = [l for l in text.splitlines() if l and not l.startswith("#")]
        assert rows[0] == "param,l2_space_time_dist"
        assert len(rows) == 3

    def test_eta_sweep(self, tmp_path):
        cfgfile = write_config(tmp_path, t_end=0.5, output_dir=str(tmp_path / "out"))
        code = cli.main(["sweep-eta", "--config", str(cfgfile),
                         "--values", "2,0.5"])
        assert code == cli.EXIT_OK
        assert (tmp_path / "out" / "sweep_eta.csv").exists()


class TestDecayCommand:
    def test_proven_regime_passes(self, tmp_path):
        cfgfile = write_config(tmp_path, t_end=20, output_dir=str(tmp_path / "out"))
        assert cli.main(["decay", "--config", str(cfgfile)]) == cli.EXIT_OK
        assert (tmp_path / "out" / "decay_series.csv").exists()

    def test_constant_ic_already_at_equilibrium(self, tmp_path, capsys):
        cfgfile = write_config(tmp_path, ic_kind="constant", t_end=5,
                               output_dir=str(tmp_path / "out"))
        assert cli.main(["decay", "--config", str(cfgfile)]) == cli.EXIT_OK
        assert "equilibrium" in capsys.readouterr().out

    def test_outside_regime_warns_but_succeeds(self, tmp_path, capsys):
        cfgfile = write_config(tmp_path, chi=10, t_end=2,
                               output_dir=str(tmp_path / "out"))
        assert cli.main(["decay", "--config", str(cfgfile)]) == cli.EXIT_OK
        assert "outside proven" in capsys.readouterr().out


class TestSnapshotIO:
    def test_float_round_trip(self, tmp_path):
        g = Grid(30)
        rng = np.random.default_rng(17)
        state = CellState(rng.uniform(0.0, 1.0, 30), rng.uniform(0.0, 1.0, 30), 1.25)
        path = tmp_path / "s.csv"
        cli.write_snapshot(path, state, g, cli.RunConfig(n_cells=30))
        x, rho, c = cli.read_snapshot(path)
        np.testing.assert_array_equal(x, g.cell_centers)
        np.testing.assert_array_equal(rho, state.rho)
        np.testing.assert_array_equal(c, state.c)

    def test_paper_fidelity_flag(self):
        cfg = cli._apply_paper_fidelity(cli.RunConfig())
        assert cfg.c_update_mode == "explicit"
        assert cfg.dt == 1e-6
        assert cfg.n_cells == 100
