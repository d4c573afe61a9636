import math

import mpmath
import numpy as np
import pytest
import sympy as sp

from vortexpairs.errors import DomainError
from vortexpairs.geometry import (
    ConformalTable,
    boundary_term,
    closed_form_table,
    curvature_blowup_slope,
    embedding_curve,
    gauss_curvature,
    hybrid_table,
    total_gauss_curvature,
)
from vortexpairs.pointvortex import F_star


def _round(R):
    return lambda e: 16 * R ** 2 / (1 + e ** 2) ** 2


def test_round_sphere_curvature_symbolic_oracle():
    e, R = sp.symbols("epsilon R", positive=True)
    F = 16 * R ** 2 / (1 + e ** 2) ** 2
    K = -1 / (2 * e * F) * sp.diff(e * sp.diff(sp.log(F), e), e)
    assert sp.simplify(K - 1 / (4 * R ** 2)) == 0
    tab = closed_form_table(_round(0.5), np.geomspace(1e-2, 1e2, 2000))
    _, Kn = gauss_curvature(tab)
    assert np.max(np.abs(Kn - 1.0)) <= 1e-4


def test_flat_table():
    eps = np.geomspace(0.01, 10, 300)
    tab = ConformalTable(eps, np.full(eps.size, 3.0), np.full(eps.size, "closed_form"))
    _, K = gauss_curvature(tab)
    assert np.all(K == 0.0)
    tc = total_gauss_curvature(tab)
    assert tc.direct == 0.0 and tc.boundary_low == 0.0
    c = embedding_curve(tab)
    assert np.all(c.z == 0.0) and np.allclose(c.rho, eps * math.sqrt(3.0))
    assert c.inflexion_eps.size == 0


def test_round_sphere_embedding_is_a_circular_arc():
    R = 1.0
    c = embedding_curve(closed_form_table(_round(R), np.geomspace(1e-3, 1e3, 6001)))
    assert c.embeddable
    # meridian of the sphere of radius 2R centred at (0, 2R)
    dist = np.hypot(c.rho, c.z - 2 * R) - 2 * R
    assert np.max(np.abs(dist)) <= 1e-3


def test_isometry_residual():
    tab = closed_form_table(F_star, np.geomspace(1e-3, 1, 400))
    c = embedding_curve(tab)
    d_rho = np.gradient(c.rho, c.eps, edge_order=2)
    d_z = np.gradient(c.z, c.eps, edge_order=2)
    res = np.abs(d_rho ** 2 + d_z ** 2 - tab.F) / tab.F
    assert np.max(res[1:-1]) <= 1e-3


def test_boundary_term_of_F_star_matches_mpmath():
    # pi eps F'/F for F_star decays only like 1/log(1/eps)
    def exact(e):
        e = mpmath.mpf(e)
        f = lambda x: 1 + 2 * mpmath.besselk(0, x) - 2 * x * mpmath.besselk(1, x)
        return float(mpmath.pi * e * mpmath.diff(f, e) / f(e))

    for e0 in (1e-3, 1e-6):
        tab = closed_form_table(F_star, np.geomspace(e0, 10 * e0, 2001))
        assert boundary_term(tab) == pytest.approx(exact(e0), rel=1e-5)
    assert exact(1e-3) == pytest.approx(-0.4816, abs=1e-3)
    assert abs(exact(1e-6)) < abs(exact(1e-3))


def test_gauss_bonnet_on_truncations():
    tab = closed_form_table(F_star, np.geomspace(0.02, 5, 800))
    tc = total_gauss_curvature(tab)
    assert abs(tc.gauss_bonnet_gap) <= 0.02 * abs(tc.boundary_low - tc.boundary_high)


def test_numeric_hybrid_curvature_sign_pattern(numeric_hybrid):
    e, K = gauss_curvature(numeric_hybrid)
    assert np.all(K[(e > 0.02) & (e < 0.2)] > 0)
    assert np.all(K[(e > 2) & (e < 3)] < 0)
    m = (e >= 0.1) & (e <= 3)
    sig = np.sign(K[m])
    assert np.count_nonzero(sig[1:] != sig[:-1]) == 1


def test_numeric_hybrid_total_curvature(numeric_hybrid):
    tc = total_gauss_curvature(numeric_hybrid)
    assert abs(tc.direct) <= 0.5
    assert abs(tc.gauss_bonnet_gap) <= 1e-3


def test_numeric_hybrid_embedding(numeric_hybrid):
    c = embedding_curve(numeric_hybrid)
    assert c.embeddable and np.all(c.rho > 0)
    # one meridian inflexion, seen twice in the mirrored cross-section
    assert c.inflexion_eps.size == 1
    assert 0.3 < c.inflexion_eps[0] < 0.7
    x, z, pts = c.cross_section()
    assert len(pts) == 2 and pts[0][0] == -pts[1][0]
    assert x.size == 2 * c.eps.size and np.all(np.diff(c.z) >= 0)


def test_hybrid_splices_are_c1(plane_table):
    m = (plane_table.eps >= 0.05) & (plane_table.eps <= 3.0)
    lo, hi = plane_table.eps[m][0], plane_table.eps[m][-1]
    tab = hybrid_table(plane_table.eps[m], plane_table.F_tangent[m], per_decade=2000)
    lg = np.log(tab.F)
    t = np.log(tab.eps)
    slope = np.gradient(lg, t)
    for edge in (lo, hi):
        i = int(np.argmin(np.abs(tab.eps - edge)))
        assert abs(lg[i + 1] - lg[i - 1]) < 0.01
        assert abs(slope[i + 3] - slope[i - 3]) < 0.02
    assert set(np.unique(tab.source)) <= {"numeric", "F_star", "F_infinity", "blend"}
    with pytest.raises(DomainError):
        hybrid_table([0.1, 0.2, 0.3], [1.0, 1.0, 1.0])


def test_blowup_slope():
    raw = curvature_blowup_slope()
    comp = curvature_blowup_slope(compensate_log=True)
    assert -2.1 <= comp <= -1.9
    # the log^3 factor masks the power law over accessible decades
    assert raw > comp


def test_table_validation():
    e = np.geomspace(0.1, 1, 6)
    with pytest.raises(DomainError):
        ConformalTable(e[:4], np.ones(4), np.full(4, "x"))
    with pytest.raises(DomainError):
        ConformalTable(e[::-1], np.ones(6), np.full(6, "x"))
    with pytest.raises(DomainError):
        ConformalTable(e, -np.ones(6), np.full(6, "x"))
