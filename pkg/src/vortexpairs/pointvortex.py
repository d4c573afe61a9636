"""Isolated vortex profile, point-source charge and asymptotic conformal factors.

A unit vortex at the origin has Taubes function ``h(r)`` with
``h'' + h'/r - 2 tanh(h/2) = 0`` and ``h ~ 2 log r`` at the core.  Writing
``h = 2 log r + v`` leaves a smooth ``v`` with ``v'(0) = 0``.  Far away the
equation linearises to ``lap h = h`` and ``h ~ c K0(r)``; the point-source
charge entering the long-range interaction is ``q = pi c``.

Closed forms for the pair conformal factor at both ends of the separation
range live here too:

* small separation: ``F_star = 4 pi (1 + 2 K0(eps) - 2 eps K1(eps))``,
* large separation: ``F_infinity = 2 pi (2 + q^2/pi^2 K0(2 eps))``.
"""

from dataclasses import dataclass
import math

import numpy as np
import scipy.sparse as sp

from . import kernels
from .elliptic import NewtonReport, newton_solve
from .errors import ConvergenceError, DomainError
from .specfun import EULER_GAMMA, bessel_k0, bessel_k0k1, bessel_k1

Q_REFERENCE = -7.1388


@dataclass(eq=False)
class RadialProfile:
    """Radial vortex solution on ``[0, r_max]``.

    ``h`` is ``-inf`` at ``r = 0``; ``v = h - 2 log r`` is regular there.
    """

    r: np.ndarray
    v: np.ndarray
    report: NewtonReport

    @property
    def h(self):
        with np.errstate(divide="ignore"):
            return self.v + 2.0 * np.log(self.r)

    def __call__(self, r):
        """Taubes function at radii ``r`` (cubic interpolation of ``v``)."""
        from scipy.interpolate import CubicSpline

        r = np.asarray(r, dtype=np.float64)
        return CubicSpline(self.r, self.v)(r) + 2.0 * np.log(r)


def solve_radial_vortex(r_max=20.0, n=4001, tol=1e-12):
    """Solve the radial vortex equation by Newton on a uniform mesh.

    The outer boundary carries the Robin condition ``h' = -(K1/K0) h``
    matching the decaying Bessel tail, imposed through a ghost node.

    Parameters
    ----------
    r_max : float
        Outer radius, at least 10.
    n : int
        Number of mesh nodes including both ends.

    Raises
    ------
    ConvergenceError
    """
    if r_max < 10.0 or n < 101:
        raise DomainError("need r_max >= 10 and n >= 101")
    r = np.linspace(0.0, r_max, n)
    dr = r[1]
    rows, cols, vals = [], [], []
    rhs_const = np.zeros(n)
    # r = 0: v'' + v'/r -> 2 v'' with mirror ghost
    rows += [0, 0]
    cols += [0, 1]
    vals += [-4.0 / dr ** 2, 4.0 / dr ** 2]
    i = np.arange(1, n - 1)
    cm = 1.0 / dr ** 2 - 1.0 / (2.0 * dr * r[i])
    cp = 1.0 / dr ** 2 + 1.0 / (2.0 * dr * r[i])
    rows += list(i) * 3
    cols += list(i - 1) + list(i) + list(i + 1)
    vals += list(cm) + [-2.0 / dr ** 2] * i.size + list(cp)
    # r = r_max: ghost from the Robin condition on h = 2 log r + v
    R = r[-1]
    k0, k1 = bessel_k0k1(R)
    kappa = k1 / k0
    # v_ghost = v_{n-2} - 2 dr (2/R + kappa (2 log R + v_{n-1}))
    cmR = 1.0 / dr ** 2 - 1.0 / (2.0 * dr * R)
    cpR = 1.0 / dr ** 2 + 1.0 / (2.0 * dr * R)
    rows += [n - 1, n - 1]
    cols += [n - 2, n - 1]
    vals += [cmR + cpR, -2.0 / dr ** 2 - cpR * 2.0 * dr * kappa]
    rhs_const[-1] = cpR * (-2.0 * dr) * (2.0 / R + 2.0 * kappa * math.log(R))
    A = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))

    with np.errstate(divide="ignore"):
        ell = np.ascontiguousarray(2.0 * np.log(r))
    coef = np.full(n, 2.0)
    out = np.empty(n)
    dout = np.empty(n)

    def source(v):
        kernels.tanh_source(coef, ell, np.ascontiguousarray(v), out, dout)
        return out - rhs_const, dout.copy()

    # start from the far-field shape, which already has the right sign
    v0 = np.where(r > 0, -2.0 * np.log(np.maximum(r, 1e-300)) * np.exp(-r), 0.0)
    v0[0] = v0[1]
    v, report = newton_solve(A, source, v0, np.zeros(n, dtype=bool), tol=tol, max_iter=100)
    if not report.converged:
        raise ConvergenceError("radial vortex solve did not converge", report)
    return RadialProfile(r, v, report)


@dataclass(frozen=True)
class ChargeFit:
    """Least-squares fit of the tail ``h = c K0(r)``."""

    q: float
    c: float
    window: tuple
    relative_spread: float


def extract_q(profile: RadialProfile, window=(5.0, 10.0)):
    """Fit ``h ~ c K0(r)`` on ``window`` and return ``q = pi c``.

    ``relative_spread`` is the max deviation of the pointwise ratio
    ``h / K0`` from ``c`` over the window, relative to ``|c|``.
    """
    lo, hi = window
    if not (0 < lo < hi <= profile.r[-1]):
        raise DomainError("fit window must lie inside (0, r_max]")
    m = (profile.r >= lo) & (profile.r <= hi)
    k0 = bessel_k0(profile.r[m])
    h = profile.h[m]
    c = float(np.dot(h, k0) / np.dot(k0, k0))
    spread = float(np.max(np.abs(h / k0 - c)) / abs(c))
    return ChargeFit(math.pi * c, c, (lo, hi), spread)


def F_star(eps):
    """Small-separation conformal factor ``4 pi (1 + 2 K0 - 2 eps K1)``."""
    k0, k1 = bessel_k0k1(eps)
    return 4.0 * np.pi * (1.0 + 2.0 * k0 - 2.0 * np.asarray(eps) * k1)


def F_star_expansion(eps):
    """Two-term small-eps expansion of ``F_star``."""
    eps = np.asarray(eps, dtype=np.float64)
    lg = np.log(2.0 / eps)
    return (8.0 * np.pi * (lg - 0.5 - EULER_GAMMA)
            + 2.0 * np.pi * (3.0 * lg + 2.0 - 3.0 * EULER_GAMMA) * eps ** 2)


def F_infinity(eps, q=Q_REFERENCE):
    """Large-separation conformal factor ``2 pi (2 + q^2/pi^2 K0(2 eps))``."""
    eps = np.asarray(eps, dtype=np.float64)
    return 2.0 * np.pi * (2.0 + q ** 2 / np.pi ** 2 * bessel_k0(2.0 * eps))


def f_star_profile(z):
    """Limiting self-similar profile ``2 (z + conj z)/|z|^2 (1 - |z| K1(|z|))``.

    Accepts complex or real input (real input means points on the real
    axis).  Returns 0 at ``z = 0``, the continuous limit.
    """
    z = np.asarray(z)
    r = np.abs(z)
    x = np.real(z)
    out = np.zeros(r.shape, dtype=np.float64)
    nz = r > 0
    if np.any(nz):
        rn = r[nz]
        out[nz] = 4.0 * x[nz] / rn ** 2 * (1.0 - rn * bessel_k1(rn))
    return out if out.ndim else float(out)


def point_vortex_interaction(separation, q=Q_REFERENCE):
    """Coefficient ``q^2/(4 pi) K0(d)`` of ``|dz+ - dz-|^2`` in the
    point-vortex kinetic energy."""
    return q ** 2 / (4.0 * np.pi) * bessel_k0(separation)


def fit_q_from_tail(eps, F):
    """Estimate ``q`` from large-eps conformal factors.

    Least squares for ``F - 4 pi = (2 q^2/pi) K0(2 eps)``; returns ``-|q|``
    (the sign is not visible in ``q^2`` and is fixed by the vortex tail).
    """
    eps = np.asarray(eps, dtype=np.float64)
    y = np.asarray(F, dtype=np.float64) - 4.0 * np.pi
    k = 2.0 / np.pi * bessel_k0(2.0 * eps)
    q2 = float(np.dot(y, k) / np.dot(k, k))
    if q2 <= 0:
        raise DomainError("tail data do not decay towards 4 pi from above")
    return -math.sqrt(q2)
