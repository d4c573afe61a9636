"""Vortex-antivortex pair on the round sphere of radius ``R``.

In the stereographic coordinate ``w = z/eps`` the regularised Taubes
function solves

    lap_w u - c(w) tanh((u + ell(w)) / 2) = 0,
    c(w) = 8 R^2 eps^2 / (1 + eps^2 |w|^2)^2,

on the unit disk (upper chart).  The lower chart uses ``w' = 1/conj(w)``,
in which the same equation holds with ``eps -> 1/eps``, i.e.
``c(w') = 8 R^2 eps^2 / (eps^2 + |w'|^2)^2``.  The charts share the circle
``|w| = 1`` where ``w' = w``.

``u`` is odd under ``w -> -w`` and even under conjugation, so each chart is
reduced to the quarter disk with ``u = 0`` on the imaginary axis and at the
pole.  Both charts are solved monolithically: interface values are tied by
continuity rows and the interface equation uses a stencil in
``s = log|w|`` that reaches into both charts (``s`` is smooth across the
circle and the Laplacian is ``e^{-2s}(d_s^2 + d_theta^2)``).

The vortex ``w = 1`` lies on the interface; the slope there gives
``eps*b = du/dw1(1) - 1``.
"""

from dataclasses import dataclass
import math

import numpy as np
import scipy.sparse as sp

from . import kernels
from .elliptic import (
    NewtonReport,
    PolarGrid,
    fd_weights,
    linear_solve,
    newton_solve,
    polar_operator,
    second_difference_weights,
)
from .errors import ConvergenceError, DomainError

SPHERE_TIERS = {"50": 50, "100": 100, "200": 200}


def sphere_grid(n=50):
    """Quarter-disk polar grid of ``n`` radii and ``n`` angles."""
    return PolarGrid.uniform(n, n, theta_max=np.pi / 2, parity=-1)


@dataclass(eq=False)
class SphereSolution:
    """Converged two-chart solution.

    ``upper`` and ``lower`` are nodal values on ``grid`` (same shape for
    both charts).  ``upper`` always refers to the chart containing the
    origin ``w = 0`` of the requested ``eps``; for ``eps > 1`` the solve is
    done at ``1/eps`` and the charts are relabelled.
    """

    eps: float
    R: float
    grid: PolarGrid
    upper: np.ndarray
    lower: np.ndarray
    d_upper: np.ndarray
    d_lower: np.ndarray
    report: NewtonReport
    swapped: bool


def _chart_terms(grid, eps, R, lower):
    X, Y = grid.mesh()
    r2 = X ** 2 + Y ** 2
    if lower:
        den = eps ** 2 + r2
        coef = 8.0 * R ** 2 * eps ** 2 / den ** 2
        dcoef = 16.0 * R ** 2 * eps * (r2 - eps ** 2) / den ** 3
    else:
        den = 1.0 + eps ** 2 * r2
        coef = 8.0 * R ** 2 * eps ** 2 / den ** 2
        dcoef = 16.0 * R ** 2 * eps * (1.0 - eps ** 2 * r2) / den ** 3
    a = (X - 1.0) ** 2 + Y ** 2
    b = (X + 1.0) ** 2 + Y ** 2
    with np.errstate(divide="ignore"):
        ell = np.log(a) - np.log(b)
    return coef.ravel(), dcoef.ravel(), ell.ravel()


def _assemble(grid):
    """Block operator for both charts plus interface rows."""
    op = polar_operator(grid, outer="open")
    n = grid.size
    nr, nt = grid.shape
    A = sp.block_diag([op.matrix, op.matrix], format="lil")
    fixed = np.concatenate([op.fixed, op.fixed])
    pde = np.concatenate([op.pde, op.pde])
    r = grid.r
    sm = -math.log(r[-2])          # distance in s to the last interior ring
    cm, c0, cp = second_difference_weights(sm, sm)
    ct = 1.0 / grid.dtheta ** 2
    for j in range(nt):
        ku = (nr - 1) * nt + j
        kl = n + ku
        if fixed[ku]:
            continue
        # interface equation on the upper copy
        A[ku, (nr - 2) * nt + j] = cm
        A[ku, n + (nr - 2) * nt + j] = cp
        diag = c0 - 2.0 * ct
        if j == 0:
            A[ku, ku + 1] = 2.0 * ct
        else:
            A[ku, ku - 1] = ct
            A[ku, ku + 1] = ct
        A[ku, ku] = diag
        pde[ku] = True
        # continuity on the lower copy
        A[kl, kl] = 1.0
        A[kl, ku] = -1.0
        pde[kl] = False
    return A.tocsr(), fixed, pde


def _solve_unit(eps, R, grid, u0, tol, max_iter):
    A, fixed, pde = _assemble(grid)
    cu, du, lu = _chart_terms(grid, eps, R, lower=False)
    cl, dl, ll = _chart_terms(grid, eps, R, lower=True)
    coef = np.ascontiguousarray(np.where(pde, np.concatenate([cu, cl]), 0.0))
    dcoef = np.where(pde, np.concatenate([du, dl]), 0.0)
    ell = np.ascontiguousarray(np.concatenate([lu, ll]))
    out = np.empty_like(ell)
    dout = np.empty_like(ell)

    def source(v):
        kernels.tanh_source(coef, ell, np.ascontiguousarray(v), out, dout)
        return out.copy(), dout.copy()

    u = np.zeros(2 * grid.size) if u0 is None else np.array(u0, dtype=np.float64).ravel()
    u[fixed] = 0.0
    u, report = newton_solve(A, source, u, fixed, tol=tol, max_iter=max_iter)
    if not report.converged:
        raise ConvergenceError(
            f"sphere solve at eps={eps} stalled at residual {report.final_residual_sup:.3e}", report
        )
    N, dN = source(u)
    free = (~fixed).astype(np.float64)
    J = (sp.diags(free) @ A - sp.diags(dN * free) + sp.diags(fixed.astype(np.float64))).tocsr()
    with np.errstate(invalid="ignore", divide="ignore"):
        tanh_vals = np.where(coef != 0.0, N / np.where(coef != 0.0, coef, 1.0), 0.0)
    du_deps, _ = linear_solve(J, dcoef * tanh_vals)
    return u, du_deps, report


def solve_sphere(eps, R=1.0, grid=None, u0=None, tol=1e-10, max_iter=50):
    """Solve the two-chart sphere problem at separation parameter ``eps``.

    Parameters
    ----------
    eps : float
        Positive; values above 1 are solved at ``1/eps`` with charts swapped.
    R : float
        Sphere radius.
    grid : PolarGrid, optional
        Grid used for both charts (default 50 x 50).
    u0 : ndarray, optional
        Warm start, the concatenated (upper, lower) vector at the solve
        parameter ``min(eps, 1/eps)``.

    Raises
    ------
    ConvergenceError
    """
    if not (eps > 0 and math.isfinite(eps)):
        raise DomainError("eps must be positive and finite")
    if not (R > 0 and math.isfinite(R)):
        raise DomainError("R must be positive")
    if grid is None:
        grid = sphere_grid()
    if not grid.odd_axis:
        raise DomainError("sphere grid must be a quarter disk with odd parity")
    swapped = eps > 1.0
    e = 1.0 / eps if swapped else eps
    u, du, report = _solve_unit(e, R, grid, u0, tol, max_iter)
    n = grid.size
    up, lo = u[:n].reshape(grid.shape), u[n:].reshape(grid.shape)
    dup, dlo = du[:n].reshape(grid.shape), du[n:].reshape(grid.shape)
    if swapped:
        # d/d eps = -(1/eps^2) d/d e
        up, lo = lo, up
        dup, dlo = -dlo / eps ** 2, -dup / eps ** 2
    return SphereSolution(float(eps), float(R), grid, up, lo, dup, dlo, report, swapped)


def state_vector(sol: SphereSolution):
    """Concatenated vector in solve order, usable as a warm start."""
    if sol.swapped:
        return np.concatenate([sol.lower.ravel(), sol.upper.ravel()])
    return np.concatenate([sol.upper.ravel(), sol.lower.ravel()])


def _radial_slope(grid, upper, lower):
    # five-node stencil in s = log|w| across the interface at theta = 0
    r = grid.r
    s = np.array([math.log(r[-3]), math.log(r[-2]), 0.0, -math.log(r[-2]), -math.log(r[-3])])
    vals = np.array([upper[-3, 0], upper[-2, 0], upper[-1, 0], lower[-2, 0], lower[-3, 0]])
    return float(fd_weights(0.0, s, 1) @ vals)


def sphere_eps_b(sol: SphereSolution):
    """``eps*b = du/dw1(1) - 1`` at the vortex on the interface circle."""
    return _radial_slope(sol.grid, sol.upper, sol.lower) - 1.0


def sphere_deps_b_deps(sol: SphereSolution):
    """``d(eps*b)/deps`` from the linearised sensitivity."""
    return _radial_slope(sol.grid, sol.d_upper, sol.d_lower)


def interface_mismatch(sol: SphereSolution):
    """Largest jump of the one-sided normal derivatives across ``|w| = 1``.

    Upper-chart ``d/dr`` and lower-chart ``-d/dr'`` should agree; the gap
    is a discretisation diagnostic of order the radial spacing.
    """
    r = sol.grid.r
    w = fd_weights(r[-1], r[-3:], 1)
    du = w @ sol.upper[-3:, :]
    dl = w @ sol.lower[-3:, :]
    return float(np.max(np.abs(du + dl)))


def sphere_h1_norm(sol: SphereSolution):
    """``H^1`` norm of ``u`` on the unit sphere.

    Dirichlet energy is conformally invariant and summed in each chart's
    flat coordinate; the ``L^2`` part uses the unit-sphere area element
    ``4/(1+|w|^2)^2`` (the same expression in both charts).  Quarter-disk
    integrals are multiplied by 4.
    """
    g = sol.grid
    r, th = g.r, g.theta
    total = 0.0
    for u in (sol.upper, sol.lower):
        ur = np.gradient(u, r, axis=0, edge_order=2)
        ut = np.gradient(u, th, axis=1, edge_order=2)
        R2 = r[:, None]
        with np.errstate(invalid="ignore", divide="ignore"):
            grad2 = ur ** 2 + np.where(R2 > 0, ut ** 2 / np.where(R2 > 0, R2, 1.0) ** 2, 0.0)
        dens = (grad2 + u ** 2 * 4.0 / (1.0 + R2 ** 2) ** 2) * R2
        total += 4.0 * np.trapezoid(np.trapezoid(dens, th, axis=1), r)
    return math.sqrt(total)


def sign_checks(sol: SphereSolution):
    """Discrete check of the sign estimates on the right half.

    Returns a dict with the minimum of ``u``, the maximum of the source
    ``tanh((u+ell)/2)`` and the smallest gap to the lower bound
    ``-2|w| cos(theta)/(1+|w|^2)`` (same form in both charts).
    """
    g = sol.grid
    X, Y = g.mesh()
    R = np.hypot(X, Y)
    bound = -2.0 * X / (1.0 + R ** 2)
    a = (X - 1.0) ** 2 + Y ** 2
    b = (X + 1.0) ** 2 + Y ** 2
    with np.errstate(divide="ignore"):
        ell = np.log(a) - np.log(b)
    u_min, F_max, gap = np.inf, -np.inf, np.inf
    for u in (sol.upper, sol.lower):
        F = np.tanh(0.5 * (u + ell))
        u_min = min(u_min, float(u.min()))
        F_max = max(F_max, float(F.max()))
        gap = min(gap, float((F - bound).min()))
    return {"u_min": u_min, "F_max": F_max, "lower_bound_gap": gap}


@dataclass(eq=False)
class SphereTable:
    """Continuation sweep of sphere solves."""

    eps: np.ndarray
    eps_b: np.ndarray
    deps_b: np.ndarray
    R: float
    iterations: np.ndarray


def sphere_table(eps_list, R=1.0, grid=None):
    """Solve at each ``eps`` in ``(0, 1]`` by continuation down from the top.

    Returned arrays are sorted by increasing ``eps``.
    """
    eps = np.unique(np.asarray(eps_list, dtype=np.float64))
    if eps[0] <= 0 or eps[-1] > 1.0:
        raise DomainError("continuation sweep needs eps in (0, 1]")
    if grid is None:
        grid = sphere_grid()
    eb, db, its = {}, {}, {}
    warm = None
    for e in eps[::-1]:
        sol = solve_sphere(float(e), R, grid, u0=warm)
        warm = state_vector(sol)
        eb[e], db[e], its[e] = sphere_eps_b(sol), sphere_deps_b_deps(sol), sol.report.iterations
    return SphereTable(eps, np.array([eb[e] for e in eps]), np.array([db[e] for e in eps]),
                       float(R), np.array([its[e] for e in eps]))


def sphere_metric_coeff(eps, deps_b, R):
    """Coefficient ``2 pi (8R^2/(1+eps^2)^2 + (1/eps) d(eps b)/deps)``."""
    eps = np.asarray(eps, dtype=np.float64)
    return 2.0 * np.pi * (8.0 * R ** 2 / (1.0 + eps ** 2) ** 2 + np.asarray(deps_b) / eps)


def sphere_area_function(eps, eps_b, R):
    """``A(eps) = 2 pi (2 R^2 (1-eps^2)/(1+eps^2) - eps b - 1)``."""
    eps = np.asarray(eps, dtype=np.float64)
    return 2.0 * np.pi * (2.0 * R ** 2 * (1.0 - eps ** 2) / (1.0 + eps ** 2) - np.asarray(eps_b) - 1.0)


def closed_form_volume(R):
    """Volume ``(2 pi * 4 pi R^2)^2`` of the (1,1) moduli space on the sphere."""
    return (2.0 * np.pi * 4.0 * np.pi * R ** 2) ** 2


@dataclass(frozen=True)
class VolumeExtrapolation:
    limit: float
    amplitude: float
    power: float
    volume: float
    closed_form: float

    @property
    def relative_gap(self):
        return abs(self.volume - self.closed_form) / self.closed_form


def sphere_volume(eps, eps_b, R, powers=np.linspace(0.4, 1.2, 81)):
    """Extrapolate ``eps*b`` to ``eps -> 0`` and form the moduli volume.

    Fits ``eps*b = L + a eps^p`` by linear least squares for each ``p`` on
    a grid in ``[0.4, 1.2]`` and keeps the best fit.  The volume is
    ``(2 pi)^2 (4 pi R^2 - 2 pi (L + 1))^2``.
    """
    eps = np.asarray(eps, dtype=np.float64)
    y = np.asarray(eps_b, dtype=np.float64)
    if eps.size < 3:
        raise DomainError("need at least three samples to extrapolate")
    best = None
    for p in powers:
        M = np.column_stack([np.ones_like(eps), eps ** p])
        coef, *_ = np.linalg.lstsq(M, y, rcond=None)
        res = float(np.sum((M @ coef - y) ** 2))
        if best is None or res < best[0]:
            best = (res, coef, p)
    _, (L, a), p = best
    vol = (2 * np.pi) ** 2 * (4 * np.pi * R ** 2 - 2 * np.pi * (L + 1.0)) ** 2
    return VolumeExtrapolation(float(L), float(a), float(p), float(vol), closed_form_volume(R))


@dataclass(frozen=True)
class GeodesicLength:
    """Quadrature of the radial geodesic from ``eps_min`` to the top sample.

    ``tail_bound`` bounds the missing piece on ``(0, eps_min)`` using the
    integrand estimate ``sqrt(16 pi R^2) + sqrt(2 pi C) eps^(-3/4)`` with
    ``C`` the largest ``eps^(3/2) |(1/eps) d(eps b)/deps|`` seen in the table.
    """

    length: float
    tail_bound: float
    eps_min: float


def geodesic_length(eps, deps_b, R, eps_min=None):
    """Length of the radial geodesic ``int sqrt(metric coeff) deps``.

    The tabulated coefficient is integrated by the trapezoid rule in
    ``log eps`` from ``eps_min`` (default the smallest sample) to the
    largest sample.

    Raises
    ------
    DomainError
        If the coefficient is negative anywhere on the range.
    """
    eps = np.asarray(eps, dtype=np.float64)
    deps_b = np.asarray(deps_b, dtype=np.float64)
    lo = eps[0] if eps_min is None else eps_min
    m = eps >= lo * (1 - 1e-12)
    if m.sum() < 2:
        raise DomainError("need at least two samples above eps_min")
    g = sphere_metric_coeff(eps[m], deps_b[m], R)
    if np.any(g < 0):
        raise DomainError("negative metric coefficient: table is unreliable")
    e = eps[m]
    length = float(np.trapezoid(np.sqrt(g) * e, np.log(e)))
    C = float(np.max(np.abs(deps_b[m]) * np.sqrt(e)))
    e0 = float(e[0])
    tail = math.sqrt(16 * np.pi) * R * e0 + math.sqrt(2 * np.pi * C) * 4.0 * e0 ** 0.25
    return GeodesicLength(length, tail, e0)


def declination_profile(sol: SphereSolution):
    """``u`` along the meridian through both vortices.

    Runs along the positive real axis of the upper chart and continues
    through the lower chart to the far pole.  The polar angle is
    ``theta = 2 arctan |z|`` with ``z = eps w``.

    Returns
    -------
    theta_over_pi, u : ndarray
    """
    r = sol.grid.r
    z_up = sol.eps * r
    with np.errstate(divide="ignore"):
        z_lo = sol.eps / r[-2::-1]
    th = 2.0 * np.arctan(np.concatenate([z_up, z_lo])) / np.pi
    u = np.concatenate([sol.upper[:, 0], sol.lower[-2::-1, 0]])
    return th, u


def extract_eps_b_sphere(sol: SphereSolution):
    """Alias of :func:`sphere_eps_b`."""
    return sphere_eps_b(sol)


def centred_metric_sphere(table: SphereTable):
    """Conformal coefficient of the centred-pair metric at each sample.

    Raises
    ------
    DomainError
        For tables shorter than three samples.
    """
    if table.eps.size < 3:
        raise DomainError("table needs at least three samples")
    return sphere_metric_coeff(table.eps, table.deps_b, table.R)


def volume_s2_pairs(table: SphereTable, eps_max=0.1):
    """Moduli volume extrapolated from the samples with ``eps <= eps_max``."""
    m = table.eps <= eps_max
    return sphere_volume(table.eps[m], table.eps_b[m], table.R)


def geodesic_length_to_collision(table: SphereTable, eps_min=None):
    return geodesic_length(table.eps, table.deps_b, table.R, eps_min)
