"""Vortex-antivortex pair on the plane.

The regularised Taubes function ``u(w)`` for a pair at ``z = +-eps`` (with
``w = z/eps``) solves

    lap_w u - 2 eps**2 tanh((u + ell(w)) / 2) = 0,
    ell(w) = log(|w-1|**2 / |w+1|**2),

which is the same as ``(|w-1|^2 e^u - |w+1|^2) / (|w-1|^2 e^u + |w+1|^2)``
for the saturating source.  The full Taubes function is ``h = u + ell``.
``u`` is odd in ``x`` and even in ``y``, so only the quadrant ``x, y >= 0``
is solved: Dirichlet ``u = 0`` on ``x = 0``, mirror (Neumann) on ``y = 0``,
and ``h = 0`` (``u = -ell``) on the far edges, where ``h`` has decayed
like ``exp(-eps |w|)``.

The quantity of interest is the slope ``du/dx`` at the vortex ``w = 1``,
packaged as ``eps*b = du/dx(1) - 1``.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import math
import os

import numpy as np
import scipy.sparse as sp

from . import kernels
from .elliptic import (
    NewtonReport,
    RectGrid,
    fd_weights,
    linear_solve,
    newton_solve,
    rect_operator,
)
from .errors import ConvergenceError, DomainError

DECAY_TOL = 1e-8
WORKERS_ENV = "VORTEXPAIRS_WORKERS"


def stretched_axis(h, uniform_end, length, growth):
    """Nodes ``0, h, 2h, ...`` up to ``uniform_end`` then geometric spacing.

    Spacings beyond the uniform block grow by ``growth`` per cell and the
    stretched block is rescaled so that the last node sits at ``length``.
    """
    m = int(round(uniform_end / h))
    core = h * np.arange(m + 1)
    if length <= core[-1] + h:
        return core
    steps = []
    step, span = h, 0.0
    while core[-1] + span < length:
        step *= growth
        steps.append(step)
        span += step
    offsets = np.cumsum(steps) * ((length - core[-1]) / span)
    return np.concatenate([core, core[-1] + offsets])


def plane_grid(eps, h_core=1 / 16, growth=1.06, decay_tol=DECAY_TOL):
    """Default quadrant grid for a pair of half-separation ``eps``.

    ``w = 1`` is a node of a uniform block of spacing ``1/m`` (resolving both
    the unit scale near the vortex and the core scale ``1/eps`` for large
    ``eps``); beyond it the spacing grows geometrically out to
    ``L = 1 + log(1/decay_tol)/eps`` so that ``exp(-eps (L-1)) <= decay_tol``.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    m0 = int(math.ceil(1.0 / h_core - 1e-9))
    m = max(m0, int(math.ceil(m0 * eps / 2.0)))
    h = 1.0 / m
    reach = min(2.0, 6.0 / eps)
    L = 1.0 + math.log(1.0 / decay_tol) / eps
    x = stretched_axis(h, math.ceil((1.0 + reach) * m) * h, L, growth)
    y = stretched_axis(h, math.ceil(reach * m) * h, L, growth)
    return RectGrid(x, y)


# named resolution tiers: (core spacing, geometric growth factor)
PLANE_TIERS = {"100": (1 / 16, 1.06), "200": (1 / 32, 1.03), "400": (1 / 64, 1.015)}


def tier_grid_args(tier="100"):
    try:
        h, gr = PLANE_TIERS[str(tier)]
    except KeyError:
        raise DomainError(f"unknown plane tier {tier!r}; choose from {sorted(PLANE_TIERS)}") from None
    return {"h_core": h, "growth": gr}


def refine_grid_args(h_core=1 / 16, growth=1.06):
    """Arguments for a grid with every local spacing roughly halved."""
    return {"h_core": h_core / 2.0, "growth": math.sqrt(growth)}


@dataclass(eq=False)
class PlaneSolution:
    """Converged quadrant solution.

    Attributes
    ----------
    eps : float
    grid : RectGrid
    values : ndarray
        ``u`` on the grid, shape ``grid.shape``.
    report : NewtonReport
    deps_values : ndarray
        Sensitivity ``du/deps`` from the linearised equation.
    """

    eps: float
    grid: RectGrid
    values: np.ndarray
    report: NewtonReport
    deps_values: np.ndarray

    @property
    def taubes(self):
        """Full Taubes function ``h = u + ell`` (``-inf`` at the vortex)."""
        return self.values + _log_ratio(self.grid)


def _log_ratio(grid):
    X, Y = grid.mesh()
    a = (X - 1.0) ** 2 + Y ** 2
    b = (X + 1.0) ** 2 + Y ** 2
    with np.errstate(divide="ignore"):
        return np.log(a) - np.log(b)


def _tanh_problem(op, ell, coef):
    ell = np.ascontiguousarray(ell.ravel())
    coef = np.ascontiguousarray(np.where(op.pde, coef, 0.0))
    out = np.empty_like(ell)
    dout = np.empty_like(ell)

    def source(v):
        kernels.tanh_source(coef, ell, np.ascontiguousarray(v), out, dout)
        return out.copy(), dout.copy()

    return source


def solve_plane(eps, grid=None, u0=None, tol=1e-10, max_iter=50):
    """Solve the regularised pair equation on the quadrant.

    Parameters
    ----------
    eps : float
        Half-separation of the pair.
    grid : RectGrid, optional
        Must contain ``w = 1`` as a node with two uniform neighbours on each
        side along ``x``.  Defaults to ``plane_grid(eps)``.
    u0 : ndarray, optional
        Interior initial guess (warm start); boundary values are always
        reset to the Dirichlet data.

    Raises
    ------
    ConvergenceError
        If Newton stops above ``tol``.
    """
    if not (eps > 0 and math.isfinite(eps)):
        raise DomainError("eps must be positive and finite")
    if grid is None:
        grid = plane_grid(eps)
    _vortex_index(grid)
    op = rect_operator(grid, bc={"bottom": "neumann"})
    ell = _log_ratio(grid)
    data = np.where(np.isfinite(ell), -ell, 0.0).ravel()
    u = np.zeros(grid.size) if u0 is None else np.array(u0, dtype=np.float64).ravel()
    if u.size != grid.size:
        raise DomainError("warm start does not match grid")
    u = np.where(op.fixed, data, u)
    source = _tanh_problem(op, ell, 2.0 * eps ** 2)
    u, report = newton_solve(op.matrix, source, u, op.fixed, tol=tol, max_iter=max_iter)
    if not report.converged:
        raise ConvergenceError(
            f"plane solve at eps={eps} stalled at residual {report.final_residual_sup:.3e}", report
        )
    # sensitivity: (A - c'(u)) du/deps = 4 eps tanh((u+ell)/2) on PDE rows
    N, dN = source(u)
    free = (~op.fixed).astype(np.float64)
    J = (sp.diags(free) @ op.matrix - sp.diags(dN * free) + sp.diags(op.fixed.astype(np.float64))).tocsr()
    rhs = np.where(op.pde, 2.0 * N / eps, 0.0)
    du, _ = linear_solve(J, rhs)
    return PlaneSolution(float(eps), grid, u.reshape(grid.shape), report, du.reshape(grid.shape))


def _vortex_index(grid):
    i = int(np.argmin(np.abs(grid.x - 1.0)))
    if abs(grid.x[i] - 1.0) > 1e-12:
        raise DomainError("w = 1 must be a grid node")
    if i < 2 or i + 2 >= grid.nx:
        raise DomainError("w = 1 needs two neighbours on each side")
    return i


def _slope_at_vortex(grid, values):
    # fourth-order five-point derivative along x at w = 1 (y = 0)
    i = _vortex_index(grid)
    nodes = grid.x[i - 2:i + 3]
    w = fd_weights(1.0, nodes, 1)
    return float(w @ values[i - 2:i + 3, 0])


def extract_eps_b(sol: PlaneSolution):
    """``eps*b = du/dx(1) - 1``."""
    return _slope_at_vortex(sol.grid, sol.values) - 1.0


def extract_b(sol: PlaneSolution):
    """Coefficient ``b(eps) = (du/dx(1) - 1) / eps`` of the linear term."""
    return extract_eps_b(sol) / sol.eps


def extract_deps_b_deps(sol: PlaneSolution):
    """``d(eps*b)/deps`` from the linearised sensitivity."""
    return _slope_at_vortex(sol.grid, sol.deps_values)


def self_similar_profile(sol: PlaneSolution):
    """Rescaled real-axis profile ``f(x) = u(x/eps)/eps``.

    Returns
    -------
    x, f : ndarray
        Abscissae in the physical coordinate ``x = eps * w``.
    """
    return sol.eps * sol.grid.x, sol.values[:, 0] / sol.eps


def conformal_factor(b, bprime, eps):
    """Return ``(Lambda, F)`` from ``b`` and its derivative.

    ``Lambda = (b' + b/eps)/4`` and ``F = 2 pi (2 + b' + b/eps)``.
    """
    s = np.asarray(bprime) + np.asarray(b) / np.asarray(eps)
    return 0.25 * s, 2.0 * np.pi * (2.0 + s)


def pair_metric_coeffs(Lambda):
    """Coefficients of the pair metric in the two-centre basis.

    The metric ``2 pi [|dz+|^2 + |dz-|^2 + Lambda |dz+ - dz-|^2]`` has
    diagonal coefficient ``2 pi (1 + Lambda)`` on ``|dz+|^2`` and ``|dz-|^2``
    and off-diagonal ``-2 pi Lambda`` on ``dz+ conj(dz-)`` (and its conjugate).
    """
    return 2.0 * np.pi * (1.0 + Lambda), -2.0 * np.pi * Lambda


def pair_metric_plane(z_plus, z_minus, table):
    """Pair-metric coefficients at the centres ``z_plus``, ``z_minus``.

    ``Lambda`` is interpolated by a cubic spline over ``table.eps`` at the
    half-separation ``|z_plus - z_minus|/2``.

    Returns
    -------
    diag, offdiag : float
        As in :func:`pair_metric_coeffs`.

    Raises
    ------
    DomainError
        For coincident centres or a separation outside the table.
    """
    from scipy.interpolate import CubicSpline

    eps = 0.5 * abs(complex(z_plus) - complex(z_minus))
    if eps == 0.0:
        raise DomainError("centres coincide")
    if not (table.eps[0] <= eps <= table.eps[-1]):
        raise DomainError("separation outside the table range")
    lam = float(CubicSpline(table.eps, table.Lambda)(eps))
    return pair_metric_coeffs(lam)


@dataclass(eq=False)
class PlaneTable:
    """Sweep of plane solves over ``eps``.

    ``bprime`` and ``F`` come from second-order finite differences of
    ``eps*b`` over the table (one-sided at the ends); ``F_tangent`` uses the
    linearised sensitivity at each node instead.
    """

    eps: np.ndarray
    eps_b: np.ndarray
    b: np.ndarray
    bprime: np.ndarray
    Lambda: np.ndarray
    F: np.ndarray
    F_tangent: np.ndarray
    iterations: np.ndarray
    residuals: np.ndarray


def _plane_row(args):
    eps, grid_kwargs = args
    sol = solve_plane(eps, plane_grid(eps, **grid_kwargs))
    return (extract_eps_b(sol), extract_deps_b_deps(sol),
            sol.report.iterations, sol.report.final_residual_sup)


def worker_count(workers=None):
    """Worker processes: explicit value, else ``VORTEXPAIRS_WORKERS``, else 1."""
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    return max(1, int(workers))


def conformal_table_plane(eps_list, grid_kwargs=None, workers=None):
    """Solve at every ``eps`` and assemble ``b``, ``Lambda`` and ``F``.

    Rows are computed independently (optionally in parallel) and returned in
    the order of ``eps_list``, which must be strictly increasing with at
    least three entries.
    """
    eps = np.asarray(eps_list, dtype=np.float64)
    if eps.ndim != 1 or eps.size < 3 or np.any(np.diff(eps) <= 0) or eps[0] <= 0:
        raise DomainError("eps_list must be positive, strictly increasing, length >= 3")
    grid_kwargs = dict(grid_kwargs or {})
    jobs = [(float(e), grid_kwargs) for e in eps]
    n = worker_count(workers)
    if n > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            rows = list(pool.map(_plane_row, jobs))
    else:
        rows = [_plane_row(j) for j in jobs]
    eps_b = np.array([r[0] for r in rows])
    deps_b = np.array([r[1] for r in rows])
    b = eps_b / eps
    # b' + b/eps = (eps b)'/eps; differencing the smooth eps*b avoids the
    # cancellation between b' ~ 1/eps^2 and b/eps ~ -1/eps^2
    bprime = (np.gradient(eps_b, eps, edge_order=2) - b) / eps
    Lam, F = conformal_factor(b, bprime, eps)
    F_tan = 2.0 * np.pi * (2.0 + deps_b / eps)
    return PlaneTable(eps, eps_b, b, bprime, Lam, F, F_tan,
                      np.array([r[2] for r in rows]), np.array([r[3] for r in rows]))


def single_vortex_plane(grid=None, tol=1e-10):
    """Isolated unit vortex at the origin, solved on a 2-D quadrant.

    Solves ``lap v = 2 tanh((v + log|w|^2)/2)`` with mirror conditions on
    both axes and ``h = v + log|w|^2 = 0`` on the far edges; used to
    cross-check the radial solver.

    Returns
    -------
    grid : RectGrid
    h : ndarray
        Full Taubes function ``v + log|w|^2``.
    """
    if grid is None:
        x = stretched_axis(1 / 20, 3.0, 24.0, 1.04)
        grid = RectGrid(x, x)
    op = rect_operator(grid, bc={"left": "neumann", "bottom": "neumann"})
    X, Y = grid.mesh()
    with np.errstate(divide="ignore"):
        ell = np.log(X ** 2 + Y ** 2)
    u = np.where(op.fixed, -ell.ravel(), 0.0)
    source = _tanh_problem(op, ell, 1.0)
    # the pointwise source is 2 tanh(.); coef=1 gives tanh, so scale by 2
    src2 = lambda v: tuple(2.0 * t for t in source(v))
    v, report = newton_solve(op.matrix, src2, u, op.fixed, tol=tol)
    if not report.converged:
        raise ConvergenceError("single-vortex solve did not converge", report)
    return grid, v.reshape(grid.shape) + ell
