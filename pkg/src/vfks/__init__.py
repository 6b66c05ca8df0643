"""Numerical laboratory for a degenerate volume-filling chemotaxis system.

Subpackages: model (parameters and states), scheme (upwind finite-volume
stepper), diagnostics (entropies and decay fits), steady (time-map pattern
construction), limits (reduced-regime solvers and sweeps), cli (drivers).
"""

from .model import CellState, Grid, ModelParams, SolverConfig

__all__ = ["CellState", "Grid", "ModelParams", "SolverConfig"]
__version__ = "0.1.0"
