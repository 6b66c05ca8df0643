"""Physical parameters, grid, and state containers shared by all solvers.

The model describes a cell density rho and a chemoattractant concentration c
on the unit interval with no-flux boundaries.  Diffusion of the cells is
degenerate: the coefficient (1-rho)*rho**(m-1) vanishes at rho=0 and rho=1,
and the chemotactic mobility rho*(1-rho) vanishes there as well, so densities
stay inside [0,1].
"""

from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """A value left its admissible range (e.g. a density outside [0,1])."""


@dataclass(frozen=True)
class ModelParams:
    """Physical parameter tuple (m, chi, tau, eta).

    m    -- degeneracy exponent, >= 1
    chi  -- chemotactic sensitivity, > 0
    tau  -- characteristic time of the chemical, >= 0 (0 = elliptic regime)
    eta  -- chemical diffusion rate, >= 0 (0 = no chemical diffusion)

    tau and eta may not both be zero: the two reduced regimes are treated
    separately and their combination is not defined here.
    """

    m: float
    chi: float
    tau: float = 1.0
    eta: float = 1.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"degeneracy exponent m must be >= 1, got {self.m}")
        if self.chi <= 0:
            raise ValueError(f"chemotactic sensitivity chi must be > 0, got {self.chi}")
        if self.tau < 0 or self.eta < 0:
            raise ValueError("tau and eta must be nonnegative")
        if self.tau == 0 and self.eta == 0:
            raise ValueError("tau = eta = 0 is not an admissible regime")


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered grid on (0, 1) with N cells of width dx = 1/N."""

    n_cells: int
    dx: float = field(init=False)
    cell_centers: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.n_cells < 1:
            raise ValueError("n_cells must be positive")
        dx = 1.0 / self.n_cells
        object.__setattr__(self, "dx", dx)
        centers = (np.arange(self.n_cells) + 0.5) * dx
        centers.flags.writeable = False
        object.__setattr__(self, "cell_centers", centers)


@dataclass
class CellState:
    """Cell-averaged density and chemoattractant vectors at time t.

    Bounds 0 <= rho, c <= 1 are a property of the continuous solutions; the
    discrete solver reports violations through diagnostics instead of
    clamping, so the arrays may transiently leave [0,1].
    """

    rho: np.ndarray
    c: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.c = np.asarray(self.c, dtype=float)
        if self.rho.shape != self.c.shape or self.rho.ndim != 1:
            raise ValueError("rho and c must be 1-d arrays of equal length")

    def copy(self) -> "CellState":
        return CellState(self.rho.copy(), self.c.copy(), self.t)

    def bound_violation(self) -> float:
        """Largest overshoot of [0,1] over both fields (0.0 if none)."""
        worst = max(
            float(np.max(-self.rho, initial=0.0)),
            float(np.max(self.rho - 1.0, initial=0.0)),
            float(np.max(-self.c, initial=0.0)),
            float(np.max(self.c - 1.0, initial=0.0)),
        )
        return max(worst, 0.0)


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping controls.

    c_update_mode selects the chemoattractant update: "explicit" reproduces
    the forward-Euler update of the reference scheme (stable only for
    dt <~ tau*dx^2/(2*eta)), "implicit" is an unconditionally stable
    backward-Euler variant used for long-horizon runs.
    """

    dt: float
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    c_update_mode: str = "implicit"
    bound_tolerance: float = 1e-10

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.newton_tol <= 0:
            raise ValueError("newton_tol must be positive")
        if self.newton_max_iter < 1:
            raise ValueError("newton_max_iter must be >= 1")
        if self.c_update_mode not in ("explicit", "implicit"):
            raise ValueError(f"unknown c_update_mode {self.c_update_mode!r}")


def _check_range(rho, tol: float):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < -tol) or np.any(rho > 1.0 + tol):
        raise DomainError("density outside [0,1]")
    return rho


def diffusion_coefficient(rho, m: float, bound_tolerance: float = 1e-10):
    """Degenerate diffusion coefficient (1-rho)*rho**(m-1).

    Vanishes at rho = 0 and rho = 1.  For m = 1 the factor rho**0 is taken
    as 1 also at rho = 0 (continuity from rho > 0).  Accepts scalars or
    arrays.
    """
    rho = _check_range(rho, bound_tolerance)
    return (1.0 - rho) * rho ** (m - 1.0)


def mobility(rho, bound_tolerance: float = 1e-10):
    """Chemotactic mobility rho*(1-rho); maximum 1/4 at rho = 1/2."""
    rho = _check_range(rho, bound_tolerance)
    return rho * (1.0 - rho)
