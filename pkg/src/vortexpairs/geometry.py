"""Intrinsic geometry of the centred-pair surface ``F(eps) (deps^2 + eps^2 dpsi^2)``.

Everything is computed in the logarithmic variable ``t = log eps``, where
``eps d/deps = d/dt`` and the Gauss curvature reads

    K = -(1 / (2 eps^2 F)) d^2 log F / dt^2.

Tables covering the whole ray are assembled by splicing a numerical
window onto the small- and large-separation closed forms with C1 matching
(see ``hybrid_table``).
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError
from .pointvortex import F_infinity, F_star, Q_REFERENCE


@dataclass(eq=False)
class ConformalTable:
    """Samples of the conformal factor with provenance tags.

    ``source`` holds ``"numeric"``, ``"F_star"``, ``"F_infinity"`` or
    ``"blend"`` per sample.
    """

    eps: np.ndarray
    F: np.ndarray
    source: np.ndarray

    def __post_init__(self):
        self.eps = np.asarray(self.eps, dtype=np.float64)
        self.F = np.asarray(self.F, dtype=np.float64)
        self.source = np.asarray(self.source)
        if self.eps.size < 5:
            raise DomainError("table needs at least 5 samples")
        if np.any(np.diff(self.eps) <= 0) or self.eps[0] <= 0:
            raise DomainError("table eps must be positive and strictly increasing")
        if np.any(self.F <= 0) or not np.all(np.isfinite(self.F)):
            raise DomainError("conformal factor must be positive and finite")


def closed_form_table(func, eps):
    """Table sampled from a closed-form ``F(eps)``."""
    eps = np.asarray(eps, dtype=np.float64)
    return ConformalTable(eps, func(eps), np.full(eps.size, "closed_form"))


def hybrid_table(num_eps, num_F, q=Q_REFERENCE, eps_min=1e-6, eps_max=12.0, per_decade=200):
    """Splice numerical ``F`` onto the asymptotic closed forms.

    Inside ``[num_eps[0], num_eps[-1]]`` the numerical values are
    interpolated by a cubic spline of ``log F`` against ``log eps``.  Below
    the window ``F = F_star * rho`` with ``rho = 1 + s (c1 + c2 log s)``,
    ``s = eps / eps_lo``; above it ``F = 4 pi + (F_infinity - 4 pi) kappa``
    with ``kappa = 1 + (d1 + d2 (eps - eps_hi)) exp(eps_hi - eps)``.  The
    constants make value and slope continuous at the window edges, and the
    corrections die out within about a decade so the closed forms take
    over.
    """
    num_eps = np.asarray(num_eps, dtype=np.float64)
    num_F = np.asarray(num_F, dtype=np.float64)
    if num_eps.size < 4 or np.any(np.diff(num_eps) <= 0):
        raise DomainError("numerical window needs >= 4 increasing samples")
    lo, hi = num_eps[0], num_eps[-1]
    if not (eps_min < lo and hi < eps_max):
        raise DomainError("numerical window must lie inside [eps_min, eps_max]")
    spline = CubicSpline(np.log(num_eps), np.log(num_F))
    dspline = spline.derivative()

    def Fprime_num(e):
        return np.exp(spline(np.log(e))) * dspline(np.log(e)) / e

    # lower splice
    Fs_lo = F_star(lo)
    dFs_lo = (F_star(lo * (1 + 1e-6)) - F_star(lo * (1 - 1e-6))) / (2e-6 * lo)
    rho_lo = num_F[0] / Fs_lo
    drho_lo = (Fprime_num(lo) - rho_lo * dFs_lo) / Fs_lo
    c1 = rho_lo - 1.0
    c2 = drho_lo * lo - c1
    # upper splice
    Fi_hi = F_infinity(hi, q) - 4 * np.pi
    dFi_hi = (F_infinity(hi * (1 + 1e-6), q) - F_infinity(hi * (1 - 1e-6), q)) / (2e-6 * hi)
    kap = (num_F[-1] - 4 * np.pi) / Fi_hi
    dkap = (Fprime_num(hi) - kap * dFi_hi) / Fi_hi
    d1 = kap - 1.0
    d2 = dkap + d1

    n = int(round(per_decade * math.log10(eps_max / eps_min))) + 1
    eps = np.geomspace(eps_min, eps_max, n)
    eps = np.unique(np.concatenate([eps, [lo, hi]]))
    F = np.empty_like(eps)
    src = np.empty(eps.size, dtype=object)
    below = eps < lo
    above = eps > hi
    mid = ~(below | above)
    s = eps[below] / lo
    F[below] = F_star(eps[below]) * (1.0 + s * (c1 + c2 * np.log(s)))
    src[below] = np.where(s > 0.1, "blend", "F_star")
    F[mid] = np.exp(spline(np.log(eps[mid])))
    src[mid] = "numeric"
    d = eps[above] - hi
    F[above] = 4 * np.pi + (F_infinity(eps[above], q) - 4 * np.pi) * (1.0 + (d1 + d2 * d) * np.exp(-d))
    src[above] = np.where(d < math.log(10.0), "blend", "F_infinity")
    return ConformalTable(eps, F, src.astype(str))


def _log_derivatives(table):
    t = np.log(table.eps)
    g = np.log(table.F)
    # difference form, so a constant F gives exactly zero derivatives
    h = np.diff(t)
    s = np.diff(g) / h
    hm, hp = h[:-1], h[1:]
    d1 = np.empty_like(g)
    d1[1:-1] = (hp * s[:-1] + hm * s[1:]) / (hm + hp)
    d1[0] = s[0] - h[0] * (s[1] - s[0]) / (h[0] + h[1])
    d1[-1] = s[-1] + h[-1] * (s[-1] - s[-2]) / (h[-1] + h[-2])
    d2 = 2.0 * (s[1:] - s[:-1]) / (hm + hp)
    return t, g, d1, d2


def gauss_curvature(table: ConformalTable):
    """Gauss curvature at the interior samples.

    Returns
    -------
    eps, K : ndarray
        Interior abscissae and curvature values.
    """
    _, _, _, d2 = _log_derivatives(table)
    e = table.eps[1:-1]
    return e, -d2 / (2.0 * e ** 2 * table.F[1:-1])


def boundary_term(table: ConformalTable, end="low"):
    """``pi eps F'/F`` at the first (``low``) or last (``high``) sample."""
    _, _, d1, _ = _log_derivatives(table)
    return float(np.pi * (d1[0] if end == "low" else d1[-1]))


@dataclass(frozen=True)
class TotalCurvature:
    """Total Gauss curvature diagnostics.

    ``direct`` integrates ``K dA = 2 pi K F eps deps`` over the table range;
    by Gauss-Bonnet it equals ``boundary_low - boundary_high`` where each
    boundary term is ``pi eps F'/F`` at that end.  The total over the whole
    ray is ``pi lim_{eps -> 0} eps F'/F``.
    """

    direct: float
    boundary_low: float
    boundary_high: float

    @property
    def gauss_bonnet_gap(self):
        return self.direct - (self.boundary_low - self.boundary_high)


def total_gauss_curvature(table: ConformalTable):
    """Direct quadrature of the curvature plus the boundary terms."""
    e, K = gauss_curvature(table)
    t = np.log(e)
    integrand = 2.0 * np.pi * K * table.F[1:-1] * e ** 2     # dA = 2 pi F eps^2 dt
    direct = float(np.trapezoid(integrand, t))
    # extend the trapezoid by half a cell at each end with the end values
    tt = np.log(table.eps)
    direct += 0.5 * integrand[0] * (t[0] - tt[0]) + 0.5 * integrand[-1] * (tt[-1] - t[-1])
    return TotalCurvature(direct, boundary_term(table, "low"), boundary_term(table, "high"))


@dataclass(eq=False)
class EmbeddingCurve:
    """Meridian ``(rho(eps), z(eps))`` of the surface of revolution.

    ``inflexion_eps`` lists where the meridian curvature (equivalently the
    Gauss curvature) changes sign.  ``cross_section`` mirrors the meridian
    in the rotation axis, which doubles the inflexion markers.
    """

    eps: np.ndarray
    rho: np.ndarray
    z: np.ndarray
    inflexion_eps: np.ndarray
    embeddable: bool
    min_margin: float

    def cross_section(self):
        """Full profile through the axis and its inflexion points.

        Returns
        -------
        x, z : ndarray
            Curve from ``(-rho_max, z_max)`` through the axis to ``(rho_max, z_max)``.
        points : list of (x, z)
        """
        x = np.concatenate([-self.rho[::-1], self.rho])
        z = np.concatenate([self.z[::-1], self.z])
        pts = []
        for e in self.inflexion_eps:
            r = float(np.interp(e, self.eps, self.rho))
            h = float(np.interp(e, self.eps, self.z))
            pts += [(-r, h), (r, h)]
        return x, z, pts


def embedding_curve(table: ConformalTable, curvature_floor=1e-9):
    """Isometric embedding of the centred-pair surface in R^3.

    ``rho = eps sqrt(F)`` and ``z = int sqrt(F - rho'^2) deps``, with ``z = 0``
    at the first sample.  The surface embeds where ``F >= rho'^2``; small
    negative margins from rounding are clipped and the worst relative
    margin is reported.

    Parameters
    ----------
    curvature_floor : float
        Sign changes of ``K`` are counted only between samples where
        ``|K| * eps^2`` exceeds this floor, which screens rounding noise
        in the flat tail.
    """
    t, g, d1, _ = _log_derivatives(table)
    eps, F = table.eps, table.F
    rho = eps * np.sqrt(F)
    # d rho / d eps = sqrt(F) (1 + (eps F'/F)/2)
    # (F - rho'^2)/F = 1 - (1 + d1/2)^2, written without cancellation
    margin = -d1 * (1.0 + 0.25 * d1)
    embeddable = bool(np.all(margin > -1e-10))
    dz = eps * np.sqrt(F * np.clip(margin, 0.0, None))     # dz/dt
    z = np.concatenate([[0.0], np.cumsum(0.5 * (dz[1:] + dz[:-1]) * np.diff(t))])
    e, K = gauss_curvature(table)
    sig = np.abs(K) * e ** 2 > curvature_floor
    ek, Kk = e[sig], K[sig]
    flips = np.nonzero(np.sign(Kk[1:]) != np.sign(Kk[:-1]))[0]
    infl = []
    for j in flips:
        # linear interpolation of K in log eps
        a, b = math.log(ek[j]), math.log(ek[j + 1])
        infl.append(math.exp(a - Kk[j] * (b - a) / (Kk[j + 1] - Kk[j])))
    return EmbeddingCurve(eps, rho, z, np.array(infl), embeddable, float(margin.min()))


def curvature_blowup_slope(eps_lo=1e-4, eps_hi=1e-2, n=200, compensate_log=False):
    """Log-log slope of the ``F_star`` curvature on ``[eps_lo, eps_hi]``.

    With ``compensate_log`` the curvature is first multiplied by
    ``L(eps)^3`` with ``L = log(2/eps) - 1/2 - gamma``, isolating the power
    law ``eps^-2`` of the predicted blow-up ``1/(16 pi eps^2 L^3)``.
    """
    from .specfun import EULER_GAMMA

    eps = np.geomspace(eps_lo / 1.5, eps_hi * 1.5, n)
    e, K = gauss_curvature(closed_form_table(F_star, eps))
    m = (e >= eps_lo) & (e <= eps_hi)
    e, K = e[m], K[m]
    if compensate_log:
        K = K * (np.log(2.0 / e) - 0.5 - EULER_GAMMA) ** 3
    return float(np.polyfit(np.log(e), np.log(K), 1)[0])
