"""Finite-difference Laplacians on tensor grids and a damped Newton solver.

Rectangular grids are tensor products of two node arrays (uniform or
smoothly stretched); polar grids cover a quarter or half disk with the
reflection symmetries of the vortex-pair problems built in.  Every
operator is a sparse matrix acting on the flattened nodal vector
(C order, first index slowest).

The Newton driver solves ``A u - N(u) = 0`` where ``A`` is a fixed sparse
matrix and ``N`` acts pointwise.  Nodes flagged ``fixed`` keep the value
carried in the initial guess (Dirichlet data) and get identity rows.
"""

from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, DomainError, SingularSystemError

DIRECT_SOLVE_LIMIT = 201 * 201


def _check_axis(nodes, name):
    nodes = np.asarray(nodes, dtype=np.float64)
    if nodes.ndim != 1 or nodes.size < 3:
        raise DomainError(f"degenerate grid: axis {name} needs at least 3 nodes")
    if not np.all(np.isfinite(nodes)) or np.any(np.diff(nodes) <= 0.0):
        raise DomainError(f"degenerate grid: axis {name} must be strictly increasing")
    return nodes


@dataclass(frozen=True, eq=False)
class RectGrid:
    """Tensor-product grid with node arrays ``x`` and ``y``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _check_axis(self.x, "x"))
        object.__setattr__(self, "y", _check_axis(self.y, "y"))

    @classmethod
    def uniform(cls, nx, ny, hx, hy=None, origin=(0.0, 0.0)):
        """Uniform grid of ``nx`` by ``ny`` nodes starting at ``origin``."""
        if hy is None:
            hy = hx
        if hx <= 0 or hy <= 0:
            raise DomainError("degenerate grid: spacing must be positive")
        x = origin[0] + hx * np.arange(nx)
        y = origin[1] + hy * np.arange(ny)
        return cls(x, y)

    @property
    def nx(self):
        return self.x.size

    @property
    def ny(self):
        return self.y.size

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def size(self):
        return self.nx * self.ny

    def is_uniform(self, rtol=1e-12):
        dx, dy = np.diff(self.x), np.diff(self.y)
        return bool(np.allclose(dx, dx[0], rtol=rtol, atol=0)
                    and np.allclose(dy, dy[0], rtol=rtol, atol=0))

    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing="ij")


@dataclass(frozen=True, eq=False)
class PolarGrid:
    """Polar grid on a sector of the disk ``0 <= r <= r[-1]``.

    ``theta_max`` is pi/2 (quarter disk) or pi (upper half disk).  The
    ray ``theta = 0`` is always a mirror line (even reflection).  On the
    quarter disk ``parity`` gives the sign picked up under reflection in
    the imaginary axis: -1 makes the function vanish on ``theta = pi/2`` and
    at the origin, +1 makes that ray a mirror line as well.
    """

    r: np.ndarray
    ntheta: int
    theta_max: float = np.pi / 2
    parity: int = -1

    def __post_init__(self):
        r = _check_axis(self.r, "r")
        if r[0] != 0.0:
            raise DomainError("polar grid must start at r = 0")
        object.__setattr__(self, "r", r)
        if self.ntheta < 3:
            raise DomainError("degenerate grid: need at least 3 angular nodes")
        if not (np.isclose(self.theta_max, np.pi / 2) or np.isclose(self.theta_max, np.pi)):
            raise DomainError("theta_max must be pi/2 or pi")
        if self.parity not in (-1, 1):
            raise DomainError("parity must be +1 or -1")

    @classmethod
    def uniform(cls, nr, ntheta, theta_max=np.pi / 2, parity=-1, radius=1.0):
        """``nr`` equally spaced radii on [0, radius] and ``ntheta`` angles."""
        return cls(np.linspace(0.0, radius, nr), ntheta, theta_max, parity)

    @property
    def nr(self):
        return self.r.size

    @property
    def theta(self):
        return np.linspace(0.0, self.theta_max, self.ntheta)

    @property
    def dtheta(self):
        return self.theta_max / (self.ntheta - 1)

    @property
    def shape(self):
        return (self.nr, self.ntheta)

    @property
    def size(self):
        return self.nr * self.ntheta

    @property
    def odd_axis(self):
        """True when the function vanishes on theta = pi/2 and at r = 0."""
        return self.parity == -1 and np.isclose(self.theta_max, np.pi / 2)

    def mesh(self):
        R, T = np.meshgrid(self.r, self.theta, indexing="ij")
        return R * np.cos(T), R * np.sin(T)


@dataclass(eq=False)
class Field2D:
    """Nodal values on a grid; ``values`` has shape ``grid.shape``."""

    grid: object
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise DomainError("field shape does not match grid")


@dataclass(eq=False)
class DiscreteOperator:
    """Sparse operator with row classification.

    ``fixed`` rows are Dirichlet identity rows, ``pde`` rows carry a
    Laplacian stencil.  Rows that are neither are linear constraints
    (duplicate origin nodes, interface rows) supplied by the caller.
    """

    matrix: sp.csr_matrix
    fixed: np.ndarray
    pde: np.ndarray


def second_difference_weights(hm, hp):
    """Three-point weights for u'' with left/right spacings ``hm``, ``hp``."""
    cm = 2.0 / (hm * (hm + hp))
    cp = 2.0 / (hp * (hm + hp))
    return cm, -(cm + cp), cp


def first_difference_weights(hm, hp):
    """Three-point central weights for u' on a nonuniform stencil."""
    cm = -hp / (hm * (hm + hp))
    cp = hm / (hp * (hm + hp))
    return cm, -(cm + cp), cp


def fd_weights(x0, nodes, order):
    """Finite-difference weights for the ``order``-th derivative at ``x0``.

    Solves the moment (Vandermonde) system on the given nodes, which is
    adequate for the five-node stencils used here.
    """
    nodes = np.asarray(nodes, dtype=np.float64) - x0
    n = nodes.size
    V = np.vander(nodes, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = float(np.prod(np.arange(1, order + 1)))
    return np.linalg.solve(V, rhs)


def rect_operator(grid: RectGrid, bc=None):
    """Five-point Laplacian on a tensor grid.

    Parameters
    ----------
    grid : RectGrid
    bc : dict, optional
        Maps ``left``, ``right``, ``bottom``, ``top`` to ``"dirichlet"`` or
        ``"neumann"``.  Neumann edges use ghost reflection across the edge.
        Default is Dirichlet everywhere.

    Returns
    -------
    DiscreteOperator
    """
    sides = {"left": "dirichlet", "right": "dirichlet", "bottom": "dirichlet", "top": "dirichlet"}
    if bc:
        sides.update(bc)
    nx, ny = grid.shape
    idx = np.arange(nx * ny).reshape(nx, ny)
    fixed = np.zeros((nx, ny), dtype=bool)
    if sides["left"] == "dirichlet":
        fixed[0, :] = True
    if sides["right"] == "dirichlet":
        fixed[-1, :] = True
    if sides["bottom"] == "dirichlet":
        fixed[:, 0] = True
    if sides["top"] == "dirichlet":
        fixed[:, -1] = True

    rows, cols, vals = [], [], []

    def axis_stencil(nodes, lo_neumann, hi_neumann):
        # per-node weights (minus, centre, plus) with reflected ghosts at the ends
        n = nodes.size
        h = np.diff(nodes)
        hm = np.empty(n)
        hp = np.empty(n)
        hm[1:] = h
        hp[:-1] = h
        hm[0], hp[-1] = h[0], h[-1]
        cm, c0, cp = second_difference_weights(hm, hp)
        if lo_neumann:
            cp[0] += cm[0]
            cm[0] = 0.0
        if hi_neumann:
            cm[-1] += cp[-1]
            cp[-1] = 0.0
        return cm, c0, cp

    xm, x0, xp = axis_stencil(grid.x, sides["left"] == "neumann", sides["right"] == "neumann")
    ym, y0, yp = axis_stencil(grid.y, sides["bottom"] == "neumann", sides["top"] == "neumann")

    I, J = np.nonzero(~fixed)
    centre = idx[I, J]
    rows.append(centre)
    cols.append(centre)
    vals.append(x0[I] + y0[J])
    for di, w in ((-1, xm[I]), (1, xp[I])):
        ok = (I + di >= 0) & (I + di < nx) & (w != 0.0)
        rows.append(centre[ok])
        cols.append(idx[I[ok] + di, J[ok]])
        vals.append(w[ok])
    for dj, w in ((-1, ym[J]), (1, yp[J])):
        ok = (J + dj >= 0) & (J + dj < ny) & (w != 0.0)
        rows.append(centre[ok])
        cols.append(idx[I[ok], J[ok] + dj])
        vals.append(w[ok])
    fi = idx[fixed]
    rows.append(fi)
    cols.append(fi)
    vals.append(np.ones(fi.size))
    A = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(nx * ny, nx * ny),
    )
    fixed = fixed.ravel()
    return DiscreteOperator(A, fixed, ~fixed)


def polar_operator(grid: PolarGrid, outer="dirichlet"):
    """Polar five-point Laplacian with symmetry-aware edges.

    The origin row uses the averaged-neighbour stencil
    ``4 (mean of first ring - u0) / r1**2``; the duplicate origin nodes at
    nonzero angle are tied to the first one by constraint rows.  With
    ``outer="open"`` the outer-ring rows are left empty for the caller.
    """
    nr, nt = grid.shape
    r = grid.r
    dt = grid.dtheta
    idx = np.arange(nr * nt).reshape(nr, nt)
    fixed = np.zeros((nr, nt), dtype=bool)
    pde = np.zeros((nr, nt), dtype=bool)
    if outer == "dirichlet":
        fixed[-1, :] = True
    elif outer != "open":
        raise DomainError("outer must be 'dirichlet' or 'open'")
    odd = grid.odd_axis
    if odd:
        fixed[:, -1] = True
        fixed[0, :] = True

    rows, cols, vals = [], [], []

    def add(rw, cl, vl):
        rows.append(np.atleast_1d(rw))
        cols.append(np.atleast_1d(cl))
        vals.append(np.broadcast_to(np.asarray(vl, dtype=np.float64), np.shape(np.atleast_1d(rw))).copy())

    # origin
    if not odd:
        wts = np.full(nt, dt)
        wts[0] = wts[-1] = 0.5 * dt
        wts /= wts.sum()
        c = 4.0 / r[1] ** 2
        add(idx[0, 0], idx[0, 0], -c)
        add(np.full(nt, idx[0, 0]), idx[1, :], c * wts)
        pde[0, 0] = True
        for j in range(1, nt):
            add(idx[0, j], idx[0, j], 1.0)
            add(idx[0, j], idx[0, 0], -1.0)

    # interior rings
    h = np.diff(r)
    for i in range(1, nr - 1):
        hm, hp = h[i - 1], h[i]
        am, a0, ap = second_difference_weights(hm, hp)
        bm, b0, bp = first_difference_weights(hm, hp)
        rm = am + bm / r[i]
        r0 = a0 + b0 / r[i]
        rp = ap + bp / r[i]
        ct = 1.0 / (r[i] ** 2 * dt ** 2)
        for j in range(nt):
            if fixed[i, j]:
                continue
            k = idx[i, j]
            pde[i, j] = True
            add(k, k, r0 - 2.0 * ct)
            add(k, idx[i - 1, j], rm)
            add(k, idx[i + 1, j], rp)
            if j == 0:
                add(k, idx[i, 1], 2.0 * ct)
            elif j == nt - 1:
                # mirror line at theta_max (even parity or half disk)
                add(k, idx[i, nt - 2], 2.0 * ct)
            else:
                add(k, idx[i, j - 1], ct)
                add(k, idx[i, j + 1], ct)

    fi = idx[fixed]
    add(fi, fi, 1.0)
    A = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(nr * nt, nr * nt),
    )
    A.sum_duplicates()
    return DiscreteOperator(A, fixed.ravel(), pde.ravel())


def laplacian_rect(f: Field2D, bc=None):
    """Five-point Laplacian at interior nodes; boundary nodes hold 0."""
    op = rect_operator(f.grid, bc)
    out = op.matrix @ f.values.ravel()
    out[~op.pde] = 0.0
    return Field2D(f.grid, out.reshape(f.grid.shape))


def laplacian_polar(f: Field2D):
    """Polar Laplacian; outer ring and symmetry-fixed nodes hold 0."""
    op = polar_operator(f.grid)
    out = op.matrix @ f.values.ravel()
    out[~op.pde] = 0.0
    vals = out.reshape(f.grid.shape)
    if not f.grid.odd_axis:
        vals[0, 1:] = vals[0, 0]
    return Field2D(f.grid, vals)


def laplacian_convergence_slopes(levels=(16, 32, 64), r_min=0.25):
    """Observed order of both discrete Laplacians on smooth test fields.

    Rectangular: ``u = sin(pi x) e^y`` on the unit square.  Polar (quarter
    disk, odd parity): ``u = x exp(-|w|^2)``, errors taken at ``r >= r_min``
    where the ``1/r`` terms are resolved.

    Returns
    -------
    dict
        ``{"rect": slope, "polar": slope, "rect_errors": [...], "polar_errors": [...]}``
    """
    hs, er, ep = [], [], []
    for n in levels:
        h = 1.0 / n
        g = RectGrid.uniform(n + 1, n + 1, h)
        X, Y = g.mesh()
        lap = laplacian_rect(Field2D(g, np.sin(np.pi * X) * np.exp(Y))).values
        exact = (1.0 - np.pi ** 2) * np.sin(np.pi * X) * np.exp(Y)
        er.append(float(np.max(np.abs(lap - exact)[1:-1, 1:-1])))
        pg = PolarGrid.uniform(n + 1, n + 1, theta_max=np.pi / 2, parity=-1)
        X, Y = pg.mesh()
        R2 = X ** 2 + Y ** 2
        lap = laplacian_polar(Field2D(pg, X * np.exp(-R2))).values
        r = np.sqrt(R2)
        exact = (4.0 * R2 - 8.0) * X * np.exp(-R2)
        op = polar_operator(pg)
        mask = op.pde.reshape(pg.shape) & (r >= r_min - 1e-12)
        ep.append(float(np.max(np.abs(lap - exact)[mask])))
        hs.append(h)
    lh = np.log(hs)
    return {
        "rect": float(np.polyfit(lh, np.log(er), 1)[0]),
        "polar": float(np.polyfit(lh, np.log(ep), 1)[0]),
        "rect_errors": er,
        "polar_errors": ep,
    }


@dataclass
class NewtonReport:
    """Convergence record of a Newton solve."""

    iterations: int
    final_residual_sup: float
    converged: bool
    damping_events: int
    history: list = dc_field(default_factory=list)
    linear_solver: str = "direct"


def residual_scale(A):
    """Reciprocal diagonal magnitudes used to normalise residual rows."""
    d = np.abs(sp.csr_matrix(A).diagonal())
    d[d == 0.0] = 1.0
    return 1.0 / d


def linear_solve(J, rhs, method="auto"):
    """Solve a sparse linear system.

    Direct sparse LU up to ``DIRECT_SOLVE_LIMIT`` unknowns, BiCGSTAB with an
    incomplete-LU preconditioner above it (falling back to LU when the
    iteration stalls).

    Raises
    ------
    SingularSystemError
        If the factorisation fails.
    """
    n = J.shape[0]
    use_direct = method == "direct" or (method == "auto" and n <= DIRECT_SOLVE_LIMIT)
    if not use_direct:
        try:
            ilu = spla.spilu(J.tocsc(), drop_tol=1e-5, fill_factor=20)
            M = spla.LinearOperator(J.shape, ilu.solve)
            x, info = spla.bicgstab(J, rhs, M=M, rtol=1e-13, atol=0.0, maxiter=2000)
            if info == 0 and np.all(np.isfinite(x)):
                return x, "bicgstab"
        except RuntimeError:
            pass
    try:
        lu = spla.splu(J.tocsc())
    except RuntimeError as exc:
        raise SingularSystemError(f"singular linear system: {exc}") from exc
    x = lu.solve(rhs)
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("singular linear system: non-finite solution")
    return x, "direct"


def newton_solve(
    A,
    source: Callable,
    u0,
    fixed,
    tol: float = 1e-10,
    max_iter: int = 50,
    max_halvings: int = 30,
    linear_solver: str = "auto",
):
    """Damped Newton iteration for ``A u - N(u) = 0``.

    Parameters
    ----------
    A : sparse matrix, shape (n, n)
        Linear part.  Rows of fixed nodes are ignored.
    source : callable
        ``source(u) -> (N, dN)``, the pointwise nonlinearity and its
        derivative in ``u``.  Both must vanish on non-PDE rows.
    u0 : ndarray, shape (n,)
        Initial guess carrying the Dirichlet data on fixed nodes.
    fixed : bool ndarray, shape (n,)
    tol : float
        Target for the sup-norm of the residual, each row divided by the
        magnitude of its diagonal weight so that the tolerance reads as a
        nodal correction independent of the local mesh size.
    max_iter : int
    max_halvings : int
        Backtracking limit per step; a step that does not lower the residual
        after this many halvings ends the solve unconverged.

    Returns
    -------
    u : ndarray
    report : NewtonReport

    Raises
    ------
    ConvergenceError
        When NaN appears in the iterate or residual.
    SingularSystemError
        From the linear solve.
    """
    A = sp.csr_matrix(A)
    fixed = np.asarray(fixed, dtype=bool)
    free = (~fixed).astype(np.float64)
    A_free = sp.diags(free) @ A
    I_fixed = sp.diags(fixed.astype(np.float64))
    u = np.array(u0, dtype=np.float64, copy=True)
    scale = residual_scale(A)

    def residual(v):
        N, dN = source(v)
        res = A_free @ v - N * free
        return res, dN

    def sup(res):
        return float(np.max(np.abs(res * scale))) if res.size else 0.0

    res, dN = residual(u)
    rsup = sup(res)
    history = [rsup]
    damping = 0
    solver_used = "direct"
    it = 0
    while True:
        if not np.isfinite(rsup):
            raise ConvergenceError("NaN detected in Newton residual",
                                   NewtonReport(it, rsup, False, damping, history, solver_used))
        if rsup <= tol:
            return u, NewtonReport(it, rsup, True, damping, history, solver_used)
        if it >= max_iter:
            return u, NewtonReport(it, rsup, False, damping, history, solver_used)
        J = (A_free - sp.diags(dN * free) + I_fixed).tocsr()
        delta, solver_used = linear_solve(J, -res, linear_solver)
        delta[fixed] = 0.0      # Dirichlet data stay exact
        t = 1.0
        accepted = False
        for _ in range(max_halvings + 1):
            trial = u + t * delta
            r_try, dN_try = residual(trial)
            s_try = sup(r_try)
            if np.isfinite(s_try) and s_try < rsup:
                accepted = True
                break
            t *= 0.5
        it += 1
        if not accepted:
            return u, NewtonReport(it, rsup, False, damping, history, solver_used)
        if t < 1.0:
            damping += 1
        u, res, dN, rsup = trial, r_try, dN_try, s_try
        history.append(rsup)
