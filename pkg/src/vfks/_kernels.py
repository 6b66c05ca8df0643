"""Jitted inner loops of the finite-volume stepper.

These kernels mirror the formulas in scheme.py exactly; they exist only
because the Newton solve runs up to 10^8 times per experiment and the
pure-numpy assembly dominates the wall time.
"""

import numba
import numpy as np

# floor used only inside Jacobian entries (rho**(m-2) blows up at 0 for m < 2)
_DERIV_FLOOR = 1e-14

# double-precision machine epsilon; the residual term (rho - rho_old)/dt has
# granularity ulp(rho)/dt, so no iterate can push the residual below a few
# eps/dt -- the convergence test is floored accordingly
_EPS = 2.220446049250313e-16


@numba.njit(cache=True)
def thomas(lower, diag, upper, rhs):
    """Solve a tridiagonal system in O(N); overwrites nothing."""
    n = diag.shape[0]
    cp = np.empty(n)
    dp = np.empty(n)
    cp[0] = upper[0] / diag[0]
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - lower[i] * cp[i - 1]
        cp[i] = upper[i] / denom
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / denom
    x = np.empty(n)
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


@numba.njit(cache=True)
def implicit_c_update(c, rho, tau, eta, dt, dx):
    """Backward Euler for tau*dc/dt = eta*Lap(c) - c + rho, reflected ghosts."""
    n = c.shape[0]
    a = tau / dt
    r = eta / (dx * dx)
    lower = np.full(n, -r)
    upper = np.full(n, -r)
    diag = np.full(n, a + 1.0 + 2.0 * r)
    diag[0] -= r
    diag[n - 1] -= r
    lower[0] = 0.0
    upper[n - 1] = 0.0
    return thomas(lower, diag, upper, a * c + rho)


@numba.njit(cache=True)
def explicit_c_update(c, rho, tau, eta, dt, dx):
    """Forward Euler for the same equation."""
    n = c.shape[0]
    out = np.empty(n)
    inv2 = eta / (dx * dx)
    for i in range(n):
        left = c[i - 1] if i > 0 else c[0]
        right = c[i + 1] if i < n - 1 else c[n - 1]
        lap = inv2 * (right - 2.0 * c[i] + left)
        out[i] = c[i] + (dt / tau) * (lap - c[i] + rho[i])
    return out


@numba.njit(cache=True)
def _fill_residual_jacobian(rho, rho_old, c, m, chi, dt, dx,
                            res, lower, diag, upper):
    """Residual of the implicit rho system and its tridiagonal Jacobian.

    Upwind branches follow the sign of the density (diffusion) and
    chemical (drift) differences; the Jacobian differentiates through the
    branch active at the current iterate.
    """
    n = rho.shape[0]
    for i in range(n):
        res[i] = (rho[i] - rho_old[i]) / dt
        diag[i] = 1.0 / dt
        lower[i] = 0.0
        upper[i] = 0.0
    inv_dx2 = 1.0 / (dx * dx)
    for i in range(n - 1):
        rl = rho[i]
        rr = rho[i + 1]
        drho = rr - rl
        dc = c[i + 1] - c[i]
        pow_l = rl ** (m - 1.0)
        pow_r = rr ** (m - 1.0)
        if drho >= 0.0:
            psi = (1.0 - rl) * pow_r
            safe_r = rr if rr > _DERIV_FLOOR else _DERIV_FLOOR
            dD_dl = -pow_r * drho - psi
            dD_dr = (1.0 - rl) * (m - 1.0) * safe_r ** (m - 2.0) * drho + psi
        else:
            psi = (1.0 - rr) * pow_l
            safe_l = rl if rl > _DERIV_FLOOR else _DERIV_FLOOR
            dD_dl = (1.0 - rr) * (m - 1.0) * safe_l ** (m - 2.0) * drho - psi
            dD_dr = -pow_l * drho + psi
        if dc >= 0.0:
            phi = rl * (1.0 - rr)
            dC_dl = chi * dc * (1.0 - rr)
            dC_dr = -chi * dc * rl
        else:
            phi = rr * (1.0 - rl)
            dC_dl = -chi * dc * rr
            dC_dr = chi * dc * (1.0 - rl)
        # flux*dx terms; the 1/dx of the flux and 1/dx of the divergence
        # combine into inv_dx2
        fd = -(psi * drho - chi * phi * dc) * inv_dx2
        dF_dl = -(dD_dl - dC_dl) * inv_dx2
        dF_dr = -(dD_dr - dC_dr) * inv_dx2
        res[i] += fd
        res[i + 1] -= fd
        diag[i] += dF_dl
        diag[i + 1] -= dF_dr
        upper[i] = dF_dr
        lower[i + 1] = -dF_dl


@numba.njit(cache=True)
def newton_rho_update(rho_old, c, m, chi, dt, dx, tol, max_iter):
    """Full Newton solve; returns (rho, iterations, residual_norm, ok).

    The convergence test uses max(tol, 4*eps/dt): below that floor the
    residual cannot be reduced in double precision (one ulp of rho moves
    the difference quotient by eps*|rho|/dt).
    """
    n = rho_old.shape[0]
    eff_tol = tol
    floor = 4.0 * _EPS / dt
    if floor > eff_tol:
        eff_tol = floor
    rho = rho_old.copy()
    res = np.empty(n)
    lower = np.empty(n)
    diag = np.empty(n)
    upper = np.empty(n)
    resid = np.inf
    for it in range(1, max_iter + 1):
        _fill_residual_jacobian(rho, rho_old, c, m, chi, dt, dx,
                                res, lower, diag, upper)
        resid = 0.0
        for i in range(n):
            a = abs(res[i])
            if a > resid:
                resid = a
        if resid <= eff_tol:
            return rho, it, resid, True
        rho = rho - thomas(lower, diag, upper, res)
    return rho, max_iter, resid, False
