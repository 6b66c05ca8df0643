"""Steady states: constant-state analysis and time-map pattern construction.

A nonconstant equilibrium with strictly positive interior density reduces,
after one integration, to the first-order problem (c')^2 = G_lam(c) - mu
for the chemoattractant alone (chemical time and diffusion coefficients
fixed to 1 here).  The potential G_lam has a local max at c_tilde and a
local min at c_tilde_plus; for an energy level mu between the admissible
bounds the monotone branch between the level-set points c_minus < c_plus
consumes a spatial length X(lam, mu).  An increasing steady state on the
unit interval exists exactly when X(lam, mu) = 1 for some admissible pair,
which this module searches for by scanning lam and bisecting mu.
"""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .model import DomainError, Grid


class NoBracket(RuntimeError):
    """The critical-point equation has no two interior roots for this lam."""


class EmptyWindow(RuntimeError):
    """The requested energy level mu lies outside the admissible window."""


class NoSolution(RuntimeError):
    """No (lam, mu) with X(lam, mu) = 1 was found in the scan window."""


@dataclass(frozen=True)
class SteadyProblem:
    """Parameters (m, chi) with integration constant lam and energy level mu."""

    m: float
    chi: float
    lam: float
    mu: float

    def __post_init__(self):
        if self.m <= 2:
            raise ValueError("pattern construction requires m > 2")
        # weak inequality: the time map itself is well-defined at the
        # endpoint chi = 1/(m-1); the pattern search keeps the strict bound
        if not 0.0 < self.chi <= 1.0 / (self.m - 1.0):
            raise ValueError("chi must lie in (0, 1/(m-1)]")
        if not lambda_window(self.m, self.chi)[0] < self.lam < 0.0:
            raise ValueError("lam outside the admissible window")


@dataclass(frozen=True)
class PotentialLandmarks:
    c_tilde: float
    c_tilde_plus: float
    g_at_tilde: float
    g_at_tilde_plus: float
    g_second_at_tilde: float


@dataclass
class SteadyProfile:
    c_values: np.ndarray
    rho_values: np.ndarray
    lambda_star: float
    mu_star: float
    mass: float
    c_minus: float
    c_plus: float


def phi(rho: float, m: float) -> float:
    """Entropy-variable map rho**(m-1)/(m-1), strictly increasing on (0, inf)."""
    if np.any(np.asarray(rho) <= 0.0):
        raise DomainError("phi requires rho > 0")
    return np.asarray(rho) ** (m - 1.0) / (m - 1.0)


def phi_inv(y, m: float):
    """Inverse map ((m-1)y)**(1/(m-1)); phi_inv(0) = 0."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0.0):
        raise DomainError("phi_inv requires y >= 0")
    return ((m - 1.0) * y) ** (1.0 / (m - 1.0))


def _g_value(c, m, chi, lam):
    """Closed form of c^2 - 2*integral of phi_inv(chi(z+lam)) from -lam to c."""
    amp = (2.0 * (m - 1.0) / m) * ((m - 1.0) * chi) ** (1.0 / (m - 1.0))
    return np.asarray(c) ** 2 - amp * (np.asarray(c) + lam) ** (m / (m - 1.0))


def _g_prime(c, m, chi, lam):
    return 2.0 * (np.asarray(c) - phi_inv(chi * (np.asarray(c) + lam), m))


def g_lambda(c, problem: SteadyProblem):
    """Potential G_lam(c) for c >= -lam, evaluated in closed form."""
    if np.any(np.asarray(c) < -problem.lam):
        raise DomainError("g_lambda requires c >= -lam")
    return _g_value(c, problem.m, problem.chi, problem.lam)


def lambda_window(m: float, chi: float) -> tuple[float, float]:
    """Admissible scan interval for lam: tangency value up to the proven bound."""
    pi2 = np.pi**2
    lo = -(m - 2.0) / (m - 1.0) * chi ** (1.0 / (m - 2.0))
    hi = (1.0 / ((pi2 + 1.0) * (m - 1.0)) - 1.0) * (chi / (pi2 + 1.0)) ** (1.0 / (m - 2.0))
    return lo, hi


def _bisect(f, a, b, xtol=1e-14, maxiter=200):
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise ValueError("root not bracketed")
    for _ in range(maxiter):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if fm == 0.0 or (b - a) < xtol:
            return mid
        if fa * fm < 0:
            b, fb = mid, fm
        else:
            a, fa = mid, fm
    return 0.5 * (a + b)


def critical_points(m: float, chi: float, lam: float) -> PotentialLandmarks:
    """Locate the two interior critical points of G_lam by bisection.

    They solve phi(c) = chi*(c + lam), bracketed on either side of the
    tangency abscissa chi**(1/(m-2)).  Raises NoBracket when lam is outside
    the window where two interior roots exist.
    """
    c_tan = chi ** (1.0 / (m - 2.0))

    def h(c):
        return c ** (m - 1.0) / (m - 1.0) - chi * (c + lam)

    if not (lam < 0.0 and h(c_tan) < 0.0 and h(1.0) > 0.0 and c_tan < 1.0):
        raise NoBracket(f"no two interior critical points for lam={lam}")
    c_tilde = _bisect(h, 0.0, c_tan)
    c_tilde_plus = _bisect(h, c_tan, 1.0)
    g2 = 2.0 * (1.0 - chi / c_tilde ** (m - 2.0))
    return PotentialLandmarks(
        c_tilde=c_tilde,
        c_tilde_plus=c_tilde_plus,
        g_at_tilde=float(_g_value(c_tilde, m, chi, lam)),
        g_at_tilde_plus=float(_g_value(c_tilde_plus, m, chi, lam)),
        g_second_at_tilde=g2,
    )


def mu_window(landmarks: PotentialLandmarks, lam: float) -> tuple[float, float]:
    """Admissible energy levels: (max(lam^2, G(c_tilde_plus)), G(c_tilde))."""
    return max(lam**2, landmarks.g_at_tilde_plus), landmarks.g_at_tilde


def boundary_values(problem: SteadyProblem,
                    landmarks: PotentialLandmarks) -> tuple[float, float]:
    """Level-set points c_minus < c_tilde < c_plus with G(c_pm) = mu.

    Found by bisection on the monotone branches of G on either side of the
    local max.  Raises EmptyWindow when mu is outside the admissible range.
    """
    m, chi, lam, mu = problem.m, problem.chi, problem.lam, problem.mu
    lo, hi = mu_window(landmarks, problem.lam)
    if not lo < mu < hi:
        raise EmptyWindow(f"mu={mu} outside window ({lo}, {hi})")

    def g_shift(c):
        return _g_value(c, m, chi, lam) - mu

    c_minus = _bisect(g_shift, -lam, landmarks.c_tilde)
    c_plus = _bisect(g_shift, landmarks.c_tilde, landmarks.c_tilde_plus)
    return c_minus, c_plus


def _a_quotient(c, z, problem, c_minus, c_plus):
    """(G(c) - mu) / ((c_plus - c)(c - c_minus)), desingularized at the ends.

    Near the endpoints, where the direct quotient loses all significant
    digits, the limiting value G'(c_pm) / (span term) is used instead.
    """
    m, chi, lam, mu = problem.m, problem.chi, problem.lam, problem.mu
    denom = (c_plus - c) * (c - c_minus)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = (_g_value(c, m, chi, lam) - mu) / denom
    bad = ~(a > 0.0) | ~np.isfinite(a)
    if np.any(bad):
        with np.errstate(divide="ignore", invalid="ignore"):
            limit = np.where(
                z > 0.0,
                -_g_prime(c_plus, m, chi, lam) / (c - c_minus),
                _g_prime(c_minus, m, chi, lam) / (c_plus - c),
            )
        a = np.where(bad, limit, a)
    return a


def _chebyshev_integral(problem, c_minus, c_plus, extra=None,
                        tol=1e-8, n_max=2**20):
    """Integral of w(c)/sqrt(G(c)-mu) over (c_minus, c_plus), w = extra or 1.

    Substituting the interval midpoint/half-width turns the integrable
    inverse-square-root endpoint behavior into the Chebyshev weight, so
    Gauss-Chebyshev nodes integrate it directly.  Node count doubles until
    two successive values agree to tol.
    """
    prev = None
    n = 32
    while n <= n_max:
        j = np.arange(1, n + 1)
        z = np.cos((2.0 * j - 1.0) * np.pi / (2.0 * n))
        c = 0.5 * z * (c_plus - c_minus) + 0.5 * (c_plus + c_minus)
        a = _a_quotient(c, z, problem, c_minus, c_plus)
        vals = a ** -0.5
        if extra is not None:
            vals = vals * extra(c)
        val = np.pi / n * float(np.sum(vals))
        if prev is not None and abs(val - prev) < tol:
            return val
        prev = val
        n *= 2
    return prev


def time_map(problem: SteadyProblem, landmarks: PotentialLandmarks) -> float:
    """Spatial length X(lam, mu) of one increasing branch of the profile."""
    c_minus, c_plus = boundary_values(problem, landmarks)
    return _chebyshev_integral(problem, c_minus, c_plus)


def mass_map(problem: SteadyProblem, landmarks: PotentialLandmarks) -> float:
    """Total cell mass carried by the branch: integral of rho(c)/sqrt(G-mu)."""
    c_minus, c_plus = boundary_values(problem, landmarks)
    m, chi, lam = problem.m, problem.chi, problem.lam

    def rho_of_c(c):
        return phi_inv(chi * (c + lam), m)

    return _chebyshev_integral(problem, c_minus, c_plus, extra=rho_of_c)


def reconstruct_profile(problem: SteadyProblem, landmarks: PotentialLandmarks,
                        grid: Grid) -> SteadyProfile:
    """Sample the increasing profile c(x), rho(x) at the grid cell centers.

    Parametrizing c by the Chebyshev angle removes the endpoint
    singularities, leaving a smooth length density that is integrated with
    a spline antiderivative; the monotone map x(theta) is then inverted per
    cell center.
    """
    c_minus, c_plus = boundary_values(problem, landmarks)
    half = 0.5 * (c_plus - c_minus)
    mid = 0.5 * (c_plus + c_minus)

    n_theta = 4096
    theta = np.linspace(0.0, np.pi, n_theta + 1)
    z = -np.cos(theta)          # z in [-1, 1], c increasing with theta
    c_nodes = mid + half * z
    a = _a_quotient(c_nodes, z, problem, c_minus, c_plus)
    density = a ** -0.5
    x_of_theta = CubicSpline(theta, density).antiderivative()
    total = float(x_of_theta(np.pi))

    # map cell centers of (0,1) onto the branch of length `total`
    targets = grid.cell_centers * total
    theta_i = np.empty(grid.n_cells)
    for i, xt in enumerate(targets):
        theta_i[i] = _bisect(lambda th: float(x_of_theta(th)) - xt, 0.0, np.pi,
                             xtol=1e-13)
    c_values = mid - half * np.cos(theta_i)
    rho_values = phi_inv(problem.chi * (c_values + problem.lam), problem.m)
    return SteadyProfile(
        c_values=c_values,
        rho_values=rho_values,
        lambda_star=problem.lam,
        mu_star=problem.mu,
        mass=grid.dx * float(np.sum(rho_values)),
        c_minus=c_minus,
        c_plus=c_plus,
    )


def _time_map_at(m, chi, lam, landmarks, mu):
    return time_map(SteadyProblem(m, chi, lam, mu), landmarks)


def find_pattern(m: float, chi: float, grid: Grid | None = None,
                 n_lambda: int = 200, x_tol: float = 1e-8) -> SteadyProfile:
    """Search for an increasing steady state with unit branch length.

    Scans lam over the admissible window; for each lam with two interior
    critical points, samples X over the mu window and bisects any sign
    change of X - 1.  Returns the reconstructed profile for the first
    solution found, or raises NoSolution.
    """
    if m <= 2 or not 0.0 < chi < 1.0 / (m - 1.0):
        raise ValueError("pattern search requires m > 2 and 0 < chi < 1/(m-1)")
    if grid is None:
        grid = Grid(100)
    lam_lo, lam_hi = lambda_window(m, chi)
    for lam in np.linspace(lam_hi, lam_lo, n_lambda + 2)[1:-1]:
        try:
            lms = critical_points(m, chi, lam)
        except NoBracket:
            continue
        lo, hi = mu_window(lms, lam)
        width = hi - lo
        if width <= 0:
            continue
        pad = 1e-9 * width
        mus = np.linspace(lo + pad, hi - pad, 9)
        xs = np.array([_time_map_at(m, chi, lam, lms, mu) for mu in mus])
        sign = np.sign(xs - 1.0)
        cross = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
        if cross.size == 0:
            continue
        a, b = mus[cross[0]], mus[cross[0] + 1]
        mu_star = _bisect(lambda mu: _time_map_at(m, chi, lam, lms, mu) - 1.0,
                          a, b, xtol=1e-15)
        if abs(_time_map_at(m, chi, lam, lms, mu_star) - 1.0) > x_tol:
            continue
        problem = SteadyProblem(m, chi, lam, mu_star)
        return reconstruct_profile(problem, lms, grid)
    raise NoSolution(f"no increasing steady state found for m={m}, chi={chi}")


def constant_state_lambda(mass: float, m: float, chi: float) -> float:
    """The integration constant that makes (M, M) an equilibrium."""
    if not 0.0 < mass < 1.0:
        raise DomainError("mass must lie in (0,1)")
    return mass ** (m - 1.0) / ((m - 1.0) * chi) - mass


def uniqueness_regime(m: float, chi: float, mass: float) -> tuple[bool, str]:
    """Classify whether (m, chi, M) lies in the proven constant-uniqueness regime."""
    if not 0.0 < mass < 1.0:
        raise DomainError("mass must lie in (0,1)")
    if 1.0 < m <= 2.0:
        if chi <= 1.0:
            return True, "1 < m <= 2 and chi <= 1: constant state is the unique equilibrium"
        return False, "1 < m <= 2 but chi > 1: outside the proven uniqueness regime"
    if m > 2.0:
        bound1 = mass ** (m - 2.0) / (m - 1.0)
        if chi >= bound1:
            return False, (f"m > 2 and chi = {chi} >= M^(m-2)/(m-1) = {bound1:g}: "
                           "smallness condition fails")
        denom = (mass ** (m - 1.0) - (m - 1.0) * chi * mass) ** ((m - 2.0) / (m - 1.0))
        ratio = chi / denom
        if ratio < 1.0:
            return True, "m > 2 with chi small enough: constant state is unique"
        return False, (f"m > 2 and chi/(M^(m-1) - (m-1)chi M)^((m-2)/(m-1)) = "
                       f"{ratio:g} >= 1: smallness condition fails")
    return False, "m = 1: outside the classification"
