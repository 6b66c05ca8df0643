"""Command-line entry point: config parsing, initial data, experiment drivers.

All output is CSV with a comment-prefixed header block embedding the full
configuration, so every file regenerates its own run.  Floats are written
with 17 significant digits to round-trip doubles bit-exactly.

Exit codes: 0 success, 2 config error, 3 solver non-convergence,
4 acceptance-check failure (decay command).
"""

import argparse
import dataclasses
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import diagnostics, limits, scheme, steady
from .model import CellState, Grid, ModelParams, SolverConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_CHECK = 4

_FMT = "%.17g"


class ConfigError(ValueError):
    pass


class AmplitudeTooLarge(ConfigError):
    pass


@dataclass
class RunConfig:
    m: float = 2.0
    chi: float = 1.0
    tau: float = 1.0
    eta: float = 1.0
    dt: float = 1e-3
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    c_update_mode: str = "implicit"
    bound_tolerance: float = 1e-10
    n_cells: int = 100
    t_end: float = 100.0
    sample_interval: float = 0.1
    ic_kind: str = "perturbed_cosine"
    ic_amplitude: float = 0.05
    ic_mass: float = 0.5
    ic_file: str = ""
    output_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.ic_mass < 1.0:
            raise ConfigError(f"ic_mass must lie in (0,1), got {self.ic_mass}")

    def model_params(self) -> ModelParams:
        return ModelParams(self.m, self.chi, self.tau, self.eta)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(self.dt, self.newton_tol, self.newton_max_iter,
                            self.c_update_mode, self.bound_tolerance)

    def grid(self) -> Grid:
        return Grid(self.n_cells)


def parse_config(path) -> RunConfig:
    """Read a key=value file (one pair per line, # comments) into a RunConfig."""
    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in fields:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        typ = fields[key].type
        try:
            if typ in (int, "int"):
                values[key] = int(val)
            elif typ in (float, "float"):
                values[key] = float(val)
            else:
                values[key] = val
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    try:
        return RunConfig(**values)
    except (ConfigError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def config_header_lines(config: RunConfig) -> list[str]:
    return [f"# {f.name}={getattr(config, f.name)}"
            for f in dataclasses.fields(RunConfig)]


def make_initial_condition(config: RunConfig, grid: Grid) -> CellState:
    """Build the initial state; all built-in choices keep data inside [0,1]."""
    mass, amp = config.ic_mass, config.ic_amplitude
    x = grid.cell_centers
    if config.ic_kind == "constant":
        rho = np.full(grid.n_cells, mass)
    elif config.ic_kind == "perturbed_cosine":
        if amp > min(mass, 1.0 - mass):
            raise AmplitudeTooLarge(
                f"amplitude {amp} exceeds min(M, 1-M) = {min(mass, 1.0 - mass)}")
        rho = mass + amp * np.cos(np.pi * x)
    elif config.ic_kind == "step":
        if amp > min(mass, 1.0 - mass):
            raise AmplitudeTooLarge(
                f"amplitude {amp} exceeds min(M, 1-M) = {min(mass, 1.0 - mass)}")
        rho = np.where(x < 0.5, mass + amp, mass - amp)
    elif config.ic_kind == "from_file":
        _, rho, c = read_snapshot(config.ic_file)
        if len(rho) != grid.n_cells:
            raise ConfigError(
                f"snapshot has {len(rho)} cells, grid has {grid.n_cells}")
        return CellState(rho, c, 0.0)
    else:
        raise ConfigError(f"unknown ic_kind {config.ic_kind!r}")
    c = np.full(grid.n_cells, mass)
    return CellState(rho, c, 0.0)


def write_snapshot(path, state: CellState, grid: Grid, config: RunConfig):
    with open(path, "w") as fh:
        for line in config_header_lines(config):
            fh.write(line + "\n")
        fh.write(f"# t={_FMT % state.t}\n")
        fh.write("x,rho,c\n")
        for x, r, c in zip(grid.cell_centers, state.rho, state.c):
            fh.write(f"{_FMT % x},{_FMT % r},{_FMT % c}\n")


def read_snapshot(path):
    xs, rhos, cs = [], [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("x,"):
                continue
            x, r, c = line.split(",")
            xs.append(float(x))
            rhos.append(float(r))
            cs.append(float(c))
    return np.array(xs), np.array(rhos), np.array(cs)


def write_series(path, records, config: RunConfig):
    with open(path, "w") as fh:
        for line in config_header_lines(config):
            fh.write(line + "\n")
        fh.write("t,mass_rho,mass_c,energy,h1,rho_min,rho_max,c_min,c_max,"
                 "l2_dist_const\n")
        for r in records:
            row = (r.t, r.mass_rho, r.mass_c, r.energy, r.rel_entropy_h1,
                   r.rho_min, r.rho_max, r.c_min, r.c_max, r.l2_dist_const)
            fh.write(",".join(_FMT % v for v in row) + "\n")


def write_sweep(path, result: limits.SweepResult, config: RunConfig):
    with open(path, "w") as fh:
        for line in config_header_lines(config):
            fh.write(line + "\n")
        fh.write("param,l2_space_time_dist\n")
        for p, d in zip(result.parameter_values, result.distances):
            fh.write(f"{_FMT % p},{_FMT % d}\n")


def _apply_paper_fidelity(config: RunConfig) -> RunConfig:
    """Reference-fidelity preset: explicit c-update, dt=1e-6, 100 cells."""
    return dataclasses.replace(config, c_update_mode="explicit", dt=1e-6,
                               n_cells=100)


def cmd_simulate(config: RunConfig) -> int:
    params = config.model_params()
    solver = config.solver_config()
    grid = config.grid()
    initial = make_initial_condition(config, grid)
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)

    worst_violation = 0.0
    snapshots = []

    def observer(state, report):
        nonlocal worst_violation
        worst_violation = max(worst_violation, report.bound_violation)
        snapshots.append(state.copy())

    try:
        final, records = scheme.run(
            initial, config.t_end, params, solver, grid,
            observers=(observer,), sample_interval=config.sample_interval)
    except scheme.NonConvergence as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    write_series(outdir / "series.csv", records, config)
    write_snapshot(outdir / "snapshot_initial.csv", initial, grid, config)
    write_snapshot(outdir / "snapshot_final.csv", final, grid, config)
    mass0 = records[0].mass_rho
    drift = abs(records[-1].mass_rho - mass0) / abs(mass0) if mass0 else 0.0
    flagged = worst_violation > config.bound_tolerance
    print(f"final t={final.t:g}  mass_drift={drift:.3e}  "
          f"max_bound_violation={worst_violation:.3e}"
          + ("  (FLAGGED)" if flagged else ""))
    return EXIT_OK


def cmd_steady(config: RunConfig) -> int:
    grid = config.grid()
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        profile = steady.find_pattern(config.m, config.chi, grid)
    except ValueError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except steady.NoSolution as exc:
        print(f"no nonconstant steady state found: {exc}")
        return EXIT_OK
    state = CellState(profile.rho_values, profile.c_values, 0.0)
    write_snapshot(outdir / "steady_profile.csv", state, grid, config)
    residual = profile_ode_residual(profile, config.chi)
    print(f"lambda*={profile.lambda_star:.12g}  mu*={profile.mu_star:.12g}  "
          f"mass={profile.mass:.12g}  c_range=({profile.c_minus:.6g},"
          f"{profile.c_plus:.6g})  ode_residual={residual:.3e}")
    return EXIT_OK


def profile_ode_residual(profile: steady.SteadyProfile, chi: float,
                         m: float | None = None) -> float:
    """Max-norm second-difference residual of the steady ODE for c."""
    c = profile.c_values
    rho = profile.rho_values
    n = len(c)
    dx = 1.0 / n
    cpp = (c[2:] - 2.0 * c[1:-1] + c[:-2]) / dx**2
    res = -cpp + c[1:-1] - rho[1:-1]
    return float(np.max(np.abs(res)))


def cmd_sweep(which: str, config: RunConfig, values) -> int:
    params = config.model_params()
    solver = config.solver_config()
    grid = config.grid()
    initial = make_initial_condition(config, grid)
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        result = limits.sweep(which, values, initial, params, solver, grid,
                              config.t_end, config.sample_interval)
    except scheme.NonConvergence as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    tag = "tau" if which == "tau_zero" else "eta"
    write_sweep(outdir / f"sweep_{tag}.csv", result, config)
    for v, dist in zip(result.parameter_values, result.distances):
        print(f"{tag}={v:g}  L2(Omega_T) distance to limit = {dist:.6e}")
    return EXIT_OK


def cmd_decay(config: RunConfig) -> int:
    params = config.model_params()
    solver = config.solver_config()
    grid = config.grid()
    initial = make_initial_condition(config, grid)
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)

    in_regime = 1.0 < config.m <= 2.0 and config.chi <= 1.0
    if not in_regime:
        print("warning: outside proven decay regime (needs 1 < m <= 2 and "
              "chi <= 1); series emitted without rate check")

    try:
        final, records = scheme.run(
            initial, config.t_end, params, solver, grid,
            sample_interval=config.sample_interval)
    except scheme.NonConvergence as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    write_series(outdir / "decay_series.csv", records, config)

    h1_series = [(r.t, r.rel_entropy_h1) for r in records]
    l2_series = [(r.t, r.l2_dist_const**2) for r in records]
    window = (min(1.0, config.t_end / 2), config.t_end)
    try:
        fit_h1 = diagnostics.fit_decay(h1_series, window)
        fit_l2 = diagnostics.fit_decay(l2_series, window)
    except diagnostics.InsufficientData:
        print("already at equilibrium (series at the noise floor)")
        return EXIT_OK
    # the squared L2 distance decays at the same rate as H1
    print(f"H1 decay: mu={fit_h1.mu:.6g}  r^2={fit_h1.r_squared:.6f}")
    print(f"L2^2 decay: mu={fit_l2.mu:.6g}  r^2={fit_l2.r_squared:.6f}")
    if not in_regime:
        return EXIT_OK
    if fit_h1.mu > 0.0 and fit_h1.r_squared >= 0.99:
        return EXIT_OK
    print("decay check failed: expected positive rate with r^2 >= 0.99",
          file=sys.stderr)
    return EXIT_CHECK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vfks",
        description="Finite-volume laboratory for a degenerate volume-filling "
                    "chemotaxis system")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("simulate", "time-evolve the coupled system and record diagnostics"),
        ("steady", "search for an increasing nonconstant steady state"),
        ("sweep-tau", "convergence sweep towards the elliptic regime"),
        ("sweep-eta", "convergence sweep towards the diffusionless regime"),
        ("decay", "fit the exponential decay rate of the relative entropy"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="key=value config file")
        p.add_argument("--output", type=Path, help="output directory")
        p.add_argument("--paper-fidelity", action="store_true",
                       help="explicit c-update with dt=1e-6 and 100 cells")
        if name.startswith("sweep"):
            p.add_argument("--values", type=str, default=None,
                           help="comma-separated decreasing parameter values")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = parse_config(args.config) if args.config else RunConfig()
        if args.output:
            config = dataclasses.replace(config, output_dir=str(args.output))
        if args.paper_fidelity:
            config = _apply_paper_fidelity(config)
        if args.command == "simulate":
            return cmd_simulate(config)
        if args.command == "steady":
            return cmd_steady(config)
        if args.command in ("sweep-tau", "sweep-eta"):
            which = "tau_zero" if args.command == "sweep-tau" else "eta_zero"
            if args.values:
                values = [float(v) for v in args.values.split(",")]
            else:
                values = [1.0, 0.1, 0.01] if which == "tau_zero" else [5.0, 0.5, 0.05]
            return cmd_sweep(which, config, values)
        if args.command == "decay":
            return cmd_decay(config)
        raise AssertionError(args.command)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
