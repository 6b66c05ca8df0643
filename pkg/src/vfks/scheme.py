"""Upwind finite-volume time stepper with implicit Newton solve for rho.

One time step advances c first (explicit or implicit Euler, using only
level k-1 data) and then solves the nonlinear finite-volume system for rho
at level k with the fresh c frozen.  Interface coefficients are upwinded:
the diffusion value follows the sign of the density difference, the
mobility value follows the sign of the chemical difference.  Boundary
fluxes are identically zero, so the discrete mass of rho is conserved up
to the Newton tolerance.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from . import _kernels
from .model import CellState, Grid, ModelParams, SolverConfig

class NonConvergence(RuntimeError):
    """Newton failed to reach the residual tolerance."""


class StabilityWarning(UserWarning):
    """Explicit c-update used with a time step above the stability bound."""


@dataclass(frozen=True)
class FluxField:
    """Interface fluxes F_{i+1/2}, i = 0..N; both endpoints exactly zero."""

    f: np.ndarray

    def __post_init__(self):
        if self.f[0] != 0.0 or self.f[-1] != 0.0:
            raise ValueError("boundary fluxes must be exactly zero")


@dataclass
class StepReport:
    newton_iterations: int
    final_residual_norm: float
    bound_violation: float


def interface_diffusion(rho_left, rho_right, m: float):
    """Upwind interface value of the degenerate diffusion coefficient."""
    up = np.asarray(rho_right) - rho_left >= 0.0
    return np.where(
        up,
        (1.0 - rho_left) * np.asarray(rho_right) ** (m - 1.0),
        (1.0 - np.asarray(rho_right)) * np.asarray(rho_left) ** (m - 1.0),
    )


def interface_mobility(rho_left, rho_right, c_left, c_right):
    """Upwind interface mobility, chosen by the sign of the c difference."""
    up = np.asarray(c_right) - c_left >= 0.0
    return np.where(
        up,
        np.asarray(rho_left) * (1.0 - np.asarray(rho_right)),
        np.asarray(rho_right) * (1.0 - np.asarray(rho_left)),
    )


def assemble_fluxes(rho: np.ndarray, c: np.ndarray, params: ModelParams,
                    grid: Grid) -> FluxField:
    """Interface fluxes F_{i+1/2} = -(psi*drho - chi*phi*dc)/dx, zero at walls."""
    f = np.zeros(grid.n_cells + 1)
    rl, rr = rho[:-1], rho[1:]
    psi = interface_diffusion(rl, rr, params.m)
    phi = interface_mobility(rl, rr, c[:-1], c[1:])
    f[1:-1] = -(psi * (rr - rl) - params.chi * phi * (c[1:] - c[:-1])) / grid.dx
    return FluxField(f)


def _neumann_laplacian(c: np.ndarray, dx: float) -> np.ndarray:
    """Three-point Laplacian with mirrored ghost cells (zero normal derivative)."""
    lap = np.empty_like(c)
    lap[1:-1] = c[2:] - 2.0 * c[1:-1] + c[:-2]
    lap[0] = c[1] - c[0]
    lap[-1] = c[-2] - c[-1]
    return lap / dx**2


def update_c(state: CellState, params: ModelParams, config: SolverConfig,
             grid: Grid, dt: float | None = None) -> np.ndarray:
    """Advance c by one step of tau*dc/dt = eta*Lap(c) - c + rho.

    Requires tau > 0; the elliptic tau = 0 regime lives in the limits
    module.  The explicit mode emits a StabilityWarning when dt exceeds
    tau*dx^2/(2*eta + dx^2).
    """
    if params.tau <= 0:
        raise ValueError("update_c requires tau > 0")
    if dt is None:
        dt = config.dt
    rho, c = state.rho, state.c
    tau, eta = params.tau, params.eta
    if config.c_update_mode == "explicit":
        limit = tau * grid.dx**2 / (2.0 * eta + grid.dx**2)
        if dt > limit:
            warnings.warn(
                f"explicit c-update with dt={dt:g} above stability bound {limit:g}",
                StabilityWarning, stacklevel=2)
        lap = _neumann_laplacian(c, grid.dx)
        return c + (dt / tau) * (eta * lap - c + rho)
    # backward Euler: (tau/dt + 1)c - eta*Lap(c) = (tau/dt)c_old + rho_old
    return _kernels.implicit_c_update(c, rho, tau, eta, dt, grid.dx)


def residual(rho, rho_old, c, params, grid, dt):
    """Residual of the implicit rho system at a candidate new density."""
    flux = assemble_fluxes(rho, c, params, grid).f
    return (rho - rho_old) / dt + (flux[1:] - flux[:-1]) / grid.dx


def update_rho(state: CellState, c_new: np.ndarray, params: ModelParams,
               config: SolverConfig, grid: Grid,
               dt: float | None = None) -> tuple[np.ndarray, StepReport]:
    """Newton solve of the implicit finite-volume system for rho at level k.

    The initial guess is the previous density; convergence is measured in
    the max norm of the residual.  Raises NonConvergence after
    newton_max_iter iterations.
    """
    if dt is None:
        dt = config.dt
    rho_old = state.rho
    rho, iters, resid, ok = _kernels.newton_rho_update(
        rho_old, np.asarray(c_new, dtype=float), float(params.m),
        float(params.chi), float(dt), grid.dx,
        config.newton_tol, config.newton_max_iter)
    if not ok:
        raise NonConvergence(
            f"Newton residual {resid:g} above {config.newton_tol:g} "
            f"after {config.newton_max_iter} iterations")
    viol = max(float(np.max(-rho, initial=0.0)),
               float(np.max(rho - 1.0, initial=0.0)), 0.0)
    return rho, StepReport(iters, resid, viol)


def step(state: CellState, params: ModelParams, config: SolverConfig,
         grid: Grid, c_update=None, _depth: int = 0) -> tuple[CellState, StepReport]:
    """Advance the coupled system by one dt: c first, then rho.

    On Newton failure the step is retried as two half steps (up to 10
    halvings) before giving up.  c_update may override the chemoattractant
    update with a callable (rho_old, c_old, dt) -> c_new; the limit systems
    use this hook.
    """
    dt = config.dt / 2**_depth
    try:
        if c_update is None:
            c_new = update_c(state, params, config, grid, dt=dt)
        else:
            c_new = c_update(state.rho, state.c, dt)
        rho_new, report = update_rho(state, c_new, params, config, grid, dt=dt)
    except NonConvergence:
        if _depth >= 10:
            raise
        half, rep1 = step(state, params, config, grid, c_update, _depth + 1)
        full, rep2 = step(half, params, config, grid, c_update, _depth + 1)
        report = StepReport(
            rep1.newton_iterations + rep2.newton_iterations,
            max(rep1.final_residual_norm, rep2.final_residual_norm),
            max(rep1.bound_violation, rep2.bound_violation))
        full.t = state.t + dt
        return full, report
    new_state = CellState(rho_new, c_new, state.t + dt)
    viol = new_state.bound_violation()
    report.bound_violation = max(report.bound_violation, viol)
    return new_state, report


def run(initial: CellState, t_end: float, params: ModelParams,
        config: SolverConfig, grid: Grid, observers=(),
        sample_interval: float | None = None, c_update=None):
    """March from initial.t to t_end, sampling observers along the way.

    Observers are callables observer(state, report); they fire at t = t0,
    every sample_interval thereafter, and at the final time.  Returns
    (final_state, diagnostics_records) where the records are the
    per-sample scalar diagnostics.
    """
    from . import diagnostics

    if t_end < initial.t:
        raise ValueError("t_end must be >= initial.t")
    t0 = initial.t
    n_steps = int(round((t_end - t0) / config.dt))
    if n_steps * config.dt < t_end - t0 - 1e-12 * max(1.0, abs(t_end)):
        n_steps += 1
    mass0 = diagnostics.total_mass(initial.rho, grid)

    records = []
    state = initial

    def sample(st, rep):
        records.append(diagnostics.snapshot_record(st, params, grid, mass=mass0))
        for obs in observers:
            obs(st, rep)

    sample(state, StepReport(0, 0.0, state.bound_violation()))
    if n_steps == 0:
        return state, records

    stride = None
    if sample_interval is not None:
        stride = max(1, int(round(sample_interval / config.dt)))
    for k in range(1, n_steps + 1):
        state, report = step(state, params, config, grid, c_update=c_update)
        state.t = t0 + k * config.dt  # avoid accumulated float drift
        if k == n_steps or (stride is not None and k % stride == 0):
            sample(state, report)
    return state, records
