"""Reference solvers for the reduced regimes and singular-limit sweeps.

Two reductions of the chemoattractant equation are supported: the elliptic
regime (characteristic time tau -> 0, c solves a screened Poisson equation
driven by rho) and the diffusionless regime (eta -> 0, c relaxes towards
rho through a pointwise ODE).  Sweep drivers run the full system at a
decreasing sequence of parameter values and measure the discrete
space-time L2 distance to the limit trajectory; both trajectories share
the grid, time step, and rho-stepper so the distances isolate the
parameter limit.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded

from . import scheme
from .model import CellState, Grid, ModelParams, SolverConfig


class MismatchedSampling(ValueError):
    """Trajectories do not share sampling times or grid size."""


@dataclass
class Trajectory:
    times: np.ndarray
    rho: np.ndarray       # shape (n_samples, n_cells)
    c: np.ndarray


@dataclass
class SweepResult:
    parameter_values: np.ndarray
    distances: np.ndarray
    snapshot_distances: list  # one array of per-time L2 distances per value

    def __post_init__(self):
        if len(self.parameter_values) != len(self.distances):
            raise ValueError("parameter and distance sequences must match")


def solve_elliptic_c(rho: np.ndarray, eta: float, grid: Grid) -> np.ndarray:
    """Solve c - eta*Lap(c) = rho with reflected ghost cells.

    The system is symmetric positive definite and tridiagonal; mass of c
    equals mass of rho exactly because the Laplacian telescopes.
    """
    if eta <= 0:
        raise ValueError("solve_elliptic_c requires eta > 0")
    n = grid.n_cells
    r = eta / grid.dx**2
    ab = np.zeros((2, n))
    ab[0, 1:] = -r
    ab[1, :] = 1.0 + 2.0 * r
    ab[1, 0] -= r
    ab[1, -1] -= r
    return solveh_banded(ab, rho)


def step_ode_c(c: np.ndarray, rho: np.ndarray, tau: float, dt: float,
               mode: str = "implicit") -> np.ndarray:
    """One Euler step of the pointwise relaxation tau*dc/dt = rho - c."""
    if tau <= 0:
        raise ValueError("step_ode_c requires tau > 0")
    if mode == "explicit":
        return c + (dt / tau) * (rho - c)
    a = tau / dt
    return (a * c + rho) / (a + 1.0)


def _c_updater(which: str, params: ModelParams, config: SolverConfig, grid: Grid):
    if which == "tau_zero":
        return lambda rho_old, c_old, dt: solve_elliptic_c(rho_old, params.eta, grid)
    if which == "eta_zero":
        return lambda rho_old, c_old, dt: step_ode_c(
            c_old, rho_old, params.tau, dt, mode=config.c_update_mode)
    raise ValueError(f"unknown limit system {which!r}")


def _record_trajectory(initial, t_end, params, config, grid, sample_interval,
                       c_update=None) -> Trajectory:
    times, rhos, cs = [], [], []

    def observer(state, report):
        times.append(state.t)
        rhos.append(state.rho.copy())
        cs.append(state.c.copy())

    scheme.run(initial, t_end, params, config, grid, observers=(observer,),
               sample_interval=sample_interval, c_update=c_update)
    return Trajectory(np.array(times), np.array(rhos), np.array(cs))


def run_limit_system(which: str, initial: CellState, params: ModelParams,
                     config: SolverConfig, grid: Grid, t_end: float,
                     sample_interval: float = 0.1) -> Trajectory:
    """Evolve the reduced system with the same rho-stepper as the full one.

    For tau_zero the chemoattractant is the elliptic solve of the current
    density before every rho-step (the initial c is replaced as well); for
    eta_zero the pointwise ODE update substitutes for the diffusion step.
    """
    start = initial.copy()
    if which == "tau_zero":
        start.c = solve_elliptic_c(start.rho, params.eta, grid)
    updater = _c_updater(which, params, config, grid)
    return _record_trajectory(start, t_end, params, config, grid,
                              sample_interval, c_update=updater)


def run_full_system(initial: CellState, params: ModelParams,
                    config: SolverConfig, grid: Grid, t_end: float,
                    sample_interval: float = 0.1) -> Trajectory:
    return _record_trajectory(initial.copy(), t_end, params, config, grid,
                              sample_interval)


def snapshot_l2_distances(traj_a: Trajectory, traj_b: Trajectory,
                          grid: Grid) -> np.ndarray:
    """Per-sample-time discrete L2(Omega) distances between rho fields."""
    if traj_a.rho.shape != traj_b.rho.shape or not np.allclose(
            traj_a.times, traj_b.times, atol=1e-9):
        raise MismatchedSampling("trajectories must share sampling times and grid")
    return np.sqrt(grid.dx * np.sum((traj_a.rho - traj_b.rho) ** 2, axis=1))


def l2_space_time_distance(traj_a: Trajectory, traj_b: Trajectory,
                           grid: Grid) -> float:
    """Discrete L2(Omega_T) distance: time-weighted sum of snapshot distances.

    The initial sample carries no weight, so two trajectories differing by
    a constant delta over (0, t_end) are at distance delta*sqrt(t_end).
    """
    per_time = snapshot_l2_distances(traj_a, traj_b, grid)
    dts = np.diff(traj_a.times)
    return float(np.sqrt(np.sum(dts * per_time[1:] ** 2)))


def sweep(which: str, parameter_values, initial: CellState,
          params: ModelParams, config: SolverConfig, grid: Grid,
          t_end: float, sample_interval: float = 0.1) -> SweepResult:
    """Distances of full-system runs to the limit trajectory.

    which = "tau_zero" varies tau, "eta_zero" varies eta; all other
    parameters are shared, including the initial data.
    """
    values = np.asarray(parameter_values, dtype=float)
    if np.any(np.diff(values) >= 0) or np.any(values <= 0):
        raise ValueError("parameter values must be strictly decreasing and positive")
    limit_traj = run_limit_system(which, initial, params, config, grid,
                                  t_end, sample_interval)
    distances = np.empty(len(values))
    per_time = []
    for i, v in enumerate(values):
        if which == "tau_zero":
            p = ModelParams(params.m, params.chi, tau=v, eta=params.eta)
        else:
            p = ModelParams(params.m, params.chi, tau=params.tau, eta=v)
        traj = run_full_system(initial, p, config, grid, t_end, sample_interval)
        distances[i] = l2_space_time_distance(traj, limit_traj, grid)
        per_time.append(snapshot_l2_distances(traj, limit_traj, grid))
    return SweepResult(values, distances, per_time)
