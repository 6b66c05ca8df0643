"""Unit tests for parameters, grid, states, and coefficient evaluators."""

import numpy as np
import pytest

from vfks.model import (CellState, DomainError, Grid, ModelParams,
                        SolverConfig, diffusion_coefficient, mobility)


class TestModelParams:
    def test_valid(self):
        p = ModelParams(2.0, 1.0, 1.0, 1.0)
        assert p.m == 2.0 and p.chi == 1.0

    def test_rejects_small_m(self):
        with pytest.raises(ValueError):
            ModelParams(0.5, 1.0)

    def test_rejects_nonpositive_chi(self):
        with pytest.raises(ValueError):
            ModelParams(2.0, 0.0)
        with pytest.raises(ValueError):
            ModelParams(2.0, -1.0)

    def test_rejects_negative_tau_eta(self):
        with pytest.raises(ValueError):
            ModelParams(2.0, 1.0, tau=-1.0)
        with pytest.raises(ValueError):
            ModelParams(2.0, 1.0, eta=-0.5)

    def test_rejects_double_zero_regime(self):
        with pytest.raises(ValueError):
            ModelParams(2.0, 1.0, tau=0.0, eta=0.0)

    def test_single_zero_regimes_allowed(self):
        assert ModelParams(2.0, 1.0, tau=0.0, eta=1.0).tau == 0.0
        assert ModelParams(2.0, 1.0, tau=1.0, eta=0.0).eta == 0.0


class TestGrid:
    def test_dx_times_n_is_one(self):
        for n in (1, 7, 100, 1000):
            g = Grid(n)
            assert g.dx * g.n_cells == pytest.approx(1.0, abs=1e-15)

    def test_cell_centers(self):
        g = Grid(4)
        np.testing.assert_allclose(g.cell_centers, [0.125, 0.375, 0.625, 0.875])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Grid(0)


class TestCellState:
    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            CellState(np.zeros(3), np.zeros(4))

    def test_bound_violation_zero_inside(self):
        s = CellState(np.array([0.0, 0.5, 1.0]), np.array([0.2, 0.3, 0.4]))
        assert s.bound_violation() == 0.0

    def test_bound_violation_reports_overshoot(self):
        s = CellState(np.array([-0.01, 0.5]), np.array([0.5, 1.02]))
        assert s.bound_violation() == pytest.approx(0.02)

    def test_copy_is_independent(self):
        s = CellState(np.array([0.5]), np.array([0.5]), 1.0)
        t = s.copy()
        t.rho[0] = 0.9
        assert s.rho[0] == 0.5 and t.t == 1.0


class TestSolverConfig:
    def test_defaults(self):
        c = SolverConfig(dt=1e-3)
        assert c.newton_tol == 1e-12
        assert c.newton_max_iter == 50
        assert c.c_update_mode == "implicit"
        assert c.bound_tolerance == 1e-10

    def test_validation(self):
        with pytest.raises(ValueError):
            SolverConfig(dt=0.0)
        with pytest.raises(ValueError):
            SolverConfig(dt=1e-3, newton_tol=0.0)
        with pytest.raises(ValueError):
            SolverConfig(dt=1e-3, newton_max_iter=0)
        with pytest.raises(ValueError):
            SolverConfig(dt=1e-3, c_update_mode="magic")


class TestDiffusionCoefficient:
    def test_degeneracy_at_zero(self):
        assert diffusion_coefficient(0.0, 2.0) == 0.0

    def test_degeneracy_at_one(self):
        assert diffusion_coefficient(1.0, 2.0) == 0.0

    def test_hand_value(self):
        assert diffusion_coefficient(0.5, 3.0) == pytest.approx(0.125, abs=1e-15)

    def test_m_one_limit_at_zero(self):
        # rho**0 at rho = 0 is 1 by continuity from rho > 0
        assert diffusion_coefficient(0.0, 1.0) == 1.0

    def test_domain_error(self):
        with pytest.raises(DomainError):
            diffusion_coefficient(1.1, 2.0)
        with pytest.raises(DomainError):
            diffusion_coefficient(-0.1, 2.0)

    def test_tolerated_overshoot(self):
        # within bound_tolerance the value is still evaluated
        assert diffusion_coefficient(1.0 + 1e-12, 2.0) < 0.0 + 1e-10


class TestMobility:
    def test_vanishes_at_ends(self):
        assert mobility(0.0) == 0.0
        assert mobility(1.0) == 0.0

    def test_maximum(self):
        assert mobility(0.5) == pytest.approx(0.25, abs=1e-15)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            mobility(1.5)


class TestCoefficientProperties:
    def test_identity_with_mobility(self):
        # (1-rho)*rho**(m-1) = rho*(1-rho)*rho**(m-2) for m >= 2
        rng = np.random.default_rng(0)
        rho = rng.uniform(1e-6, 1.0, 200)
        for m in (2.0, 2.5, 3.0, 4.0):
            np.testing.assert_allclose(
                diffusion_coefficient(rho, m),
                mobility(rho) * rho ** (m - 2.0), rtol=1e-13)

    def test_nonnegative(self):
        rng = np.random.default_rng(1)
        rho = rng.uniform(0.0, 1.0, 500)
        for m in (1.0, 1.5, 2.0, 3.0):
            assert np.all(diffusion_coefficient(rho, m) >= 0.0)
            assert np.all(mobility(rho) >= 0.0)
