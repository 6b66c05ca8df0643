"""Conserved and dissipated functionals on discrete states, plus decay fits.

The scalars tracked here mirror the Lyapunov structure of the model: the
energy drives the gradient flow, and the logarithmic relative entropies
measure distance to a reference state.  All gradient terms use forward
differences with a zero last entry, consistent with the no-flux walls.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .model import CellState, DomainError, Grid, ModelParams


class InsufficientData(ValueError):
    """Too few usable points to fit a decay rate."""


@dataclass
class DiagnosticsRecord:
    t: float
    mass_rho: float
    mass_c: float
    energy: float
    rel_entropy_h1: float
    rho_min: float
    rho_max: float
    c_min: float
    c_max: float
    l2_dist_const: float


@dataclass
class DecayFit:
    """Exponential rate from a least-squares line through (t, log value)."""

    mu: float
    r_squared: float
    window: tuple[float, float]


def total_mass(rho: np.ndarray, grid: Grid) -> float:
    return grid.dx * float(np.sum(rho))


def _grad_sq(c: np.ndarray, dx: float) -> np.ndarray:
    """Forward-difference |grad c|^2 per cell, zero in the last cell."""
    g = np.zeros_like(c)
    g[:-1] = ((c[1:] - c[:-1]) / dx) ** 2
    return g


def energy(state: CellState, params: ModelParams, grid: Grid) -> float:
    """Discrete free energy of the gradient-flow formulation.

    For m > 1 the internal part is rho^m/(m(m-1)); for m = 1 it is
    rho*(log rho - 1) with the 0*log 0 = 0 convention.
    """
    rho, c = state.rho, state.c
    m, chi, eta = params.m, params.chi, params.eta
    if m == 1.0:
        internal = xlogy(rho, rho) - rho
    else:
        internal = rho**m / (m * (m - 1.0))
    g = _grad_sq(c, grid.dx)
    dens = internal + 0.5 * chi * (eta * g + c**2) - chi * rho * c
    return grid.dx * float(np.sum(dens))


def _bregman_log(rho: np.ndarray, ref) -> np.ndarray:
    """Pointwise rho*log(rho/ref) + (1-rho)*log((1-rho)/(1-ref)), >= 0."""
    return (xlogy(rho, rho) - xlogy(rho, ref)
            + xlogy(1.0 - rho, 1.0 - rho) - xlogy(1.0 - rho, 1.0 - np.asarray(ref)))


def relative_entropy_h1(state: CellState, mass: float, params: ModelParams,
                        grid: Grid) -> float:
    """Relative entropy against the constant state (M, M).

    Sum of the logarithmic Bregman distance of rho to M and tau/2 times
    the discrete Dirichlet energy of c.  Nonnegative, zero exactly at the
    constant state with flat c.
    """
    if not 0.0 < mass < 1.0:
        raise DomainError(f"reference mass must lie in (0,1), got {mass}")
    dens = _bregman_log(state.rho, mass) + 0.5 * params.tau * _grad_sq(state.c, grid.dx)
    return grid.dx * float(np.sum(dens))


def relative_entropy_pair(state: CellState, ref_state: CellState,
                          weight: float, grid: Grid) -> float:
    """Relative entropy of one state against another, with weight/2 on (c-cbar)^2.

    The reference density must be strictly inside (0,1) pointwise.
    """
    ref = ref_state.rho
    if np.any(ref <= 0.0) or np.any(ref >= 1.0):
        raise DomainError("reference density must lie strictly inside (0,1)")
    dens = _bregman_log(state.rho, ref) + 0.5 * weight * (state.c - ref_state.c) ** 2
    return grid.dx * float(np.sum(dens))


def l2_distance_to_constant(rho: np.ndarray, mass: float, grid: Grid) -> float:
    return float(np.sqrt(grid.dx * np.sum((rho - mass) ** 2)))


def snapshot_record(state: CellState, params: ModelParams, grid: Grid,
                    mass: float | None = None) -> DiagnosticsRecord:
    """Collect all per-snapshot scalars; mass defaults to the current one."""
    if mass is None:
        mass = total_mass(state.rho, grid)
    return DiagnosticsRecord(
        t=state.t,
        mass_rho=total_mass(state.rho, grid),
        mass_c=total_mass(state.c, grid),
        energy=energy(state, params, grid),
        rel_entropy_h1=relative_entropy_h1(state, mass, params, grid),
        rho_min=float(np.min(state.rho)),
        rho_max=float(np.max(state.rho)),
        c_min=float(np.min(state.c)),
        c_max=float(np.max(state.c)),
        l2_dist_const=l2_distance_to_constant(state.rho, mass, grid),
    )


# values below this are floating-point floor noise and excluded from fits
_FIT_FLOOR = 1e-14


def fit_decay(series, window: tuple[float, float] | None = None) -> DecayFit:
    """Least-squares exponential rate of a positive time series.

    Fits a line through (t, log value) for the points inside the window
    with value above the noise floor; mu is minus the slope.  A constant
    series has mu = 0 and, by convention, r_squared = 0.
    """
    pts = [(t, v) for t, v in series if v > _FIT_FLOOR]
    if window is not None:
        lo, hi = window
        pts = [(t, v) for t, v in pts if lo <= t <= hi]
    else:
        lo = min((t for t, _ in pts), default=0.0)
        hi = max((t for t, _ in pts), default=0.0)
    if len(pts) < 3:
        raise InsufficientData(f"need >= 3 usable points, got {len(pts)}")
    t = np.array([p[0] for p in pts])
    logv = np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(t, logv, 1)
    fitted = slope * t + intercept
    ss_res = float(np.sum((logv - fitted) ** 2))
    ss_tot = float(np.sum((logv - np.mean(logv)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 0.0
    return DecayFit(mu=-float(slope), r_squared=max(0.0, min(1.0, r2)),
                    window=(float(lo), float(hi)))
