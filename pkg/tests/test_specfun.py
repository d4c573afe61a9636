import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from vortexpairs.errors import DomainError
from vortexpairs.specfun import EULER_GAMMA, bessel_k0, bessel_k0k1, bessel_k1

# 40-digit mpmath values, frozen
REFERENCE = {
    1e-6: (13.931442073626419413, 999999.99999278427896),
    0.01: (4.7212447301610949651, 99.973894118296247643),
    0.5: (0.92441907122766586178, 1.6564411200033008937),
    1.0: (0.42102443824070833334, 0.60190723019723457474),
    2.0: (0.11389387274953343565, 0.13986588181652242728),
    5.0: (0.0036910983340425942747, 0.0040446134454521642084),
    10.0: (1.7780062316167651811e-05, 1.8648773453825584597e-05),
    50.0: (3.4101677497894955139e-23, 3.4441022267175556126e-23),
    100.0: (4.6566282291759020189e-45, 4.6798537356369092866e-45),
    700.0: (4.669776431685376881e-306, 4.6731107967079661091e-306),
}


@pytest.mark.parametrize("x", sorted(REFERENCE))
def test_frozen_reference_values(x):
    k0, k1 = REFERENCE[x]
    assert bessel_k0(x) == pytest.approx(k0, rel=1e-14)
    assert bessel_k1(x) == pytest.approx(k1, rel=1e-14)


def test_matches_mpmath_on_log_grid():
    x = np.geomspace(1e-6, 700, 300)
    k0, k1 = bessel_k0k1(x)
    r0 = [float(mpmath.besselk(0, v)) for v in x]
    r1 = [float(mpmath.besselk(1, v)) for v in x]
    assert np.max(np.abs(k0 / r0 - 1)) <= 1e-12
    assert np.max(np.abs(k1 / r1 - 1)) <= 1e-12


@pytest.mark.parametrize("x", [0.01, 0.3, 1.0, 4.0, 20.0, 50.0])
def test_integral_representation(x):
    # K_n(x) = int_0^inf exp(-x cosh t) cosh(n t) dt
    top = math.acosh(800.0 / x)  # integrand below exp(-800) beyond
    q0 = integrate.quad(lambda t: math.exp(-x * math.cosh(t)), 0, top, epsabs=0, epsrel=1e-13, limit=200)[0]
    q1 = integrate.quad(lambda t: math.exp(-x * math.cosh(t)) * math.cosh(t), 0, top,
                        epsabs=0, epsrel=1e-13, limit=200)[0]
    assert bessel_k0(x) == pytest.approx(q0, rel=1e-10)
    assert bessel_k1(x) == pytest.approx(q1, rel=1e-10)


def test_small_x_limits():
    x = 1e-6
    assert abs(bessel_k0(x) + math.log(x / 2) + EULER_GAMMA) <= 1e-8
    assert abs(x * bessel_k1(x) - 1) <= 1e-10


def test_wronskian_with_series_i0_i1():
    x = np.linspace(0.05, 30, 200)
    i0 = np.array([float(mpmath.besseli(0, v)) for v in x])
    i1 = np.array([float(mpmath.besseli(1, v)) for v in x])
    k0, k1 = bessel_k0k1(x)
    assert np.max(np.abs(x * (i0 * k1 + i1 * k0) - 1)) <= 1e-12


def test_derivative_recurrence():
    # K1' = -K0 - K1/x, five-point central difference
    x = np.linspace(0.1, 50, 400)
    h = 1e-5
    d = (8 * (bessel_k1(x + h) - bessel_k1(x - h)) - (bessel_k1(x + 2 * h) - bessel_k1(x - 2 * h))) / (12 * h)
    assert np.max(np.abs(d + bessel_k0(x) + bessel_k1(x) / x)) <= 1e-9


def test_k0_derivative_is_minus_k1():
    x = np.linspace(0.2, 40, 300)
    h = 1e-5
    d = (8 * (bessel_k0(x + h) - bessel_k0(x - h)) - (bessel_k0(x + 2 * h) - bessel_k0(x - 2 * h))) / (12 * h)
    assert np.max(np.abs(d + bessel_k1(x))) <= 1e-9


def test_strictly_decreasing():
    x = np.geomspace(1e-6, 700, 1000)
    k0, k1 = bessel_k0k1(x)
    assert np.all(np.diff(k0) < 0) and np.all(np.diff(k1) < 0)


def test_underflow_and_infinity():
    assert bessel_k0(800.0) == 0.0 and bessel_k1(800.0) == 0.0
    assert bessel_k0(np.inf) == 0.0


@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan])
def test_domain_errors(bad):
    with pytest.raises(DomainError):
        bessel_k0(bad)
    with pytest.raises(DomainError):
        bessel_k1(np.array([1.0, bad]))


def test_scalar_and_array_shapes():
    assert isinstance(bessel_k0(1.0), float)
    a = bessel_k0(np.ones((3, 2)))
    assert a.shape == (3, 2)
    assert np.all(a == bessel_k0(1.0))


@given(st.floats(min_value=1e-6, max_value=700, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_k1_exceeds_k0(x):
    k0, k1 = bessel_k0k1(x)
    assert k1 > k0 > 0


@given(st.floats(min_value=1e-3, max_value=100))
@settings(max_examples=100, deadline=None)
def test_k0k1_consistent_with_singles(x):
    k0, k1 = bessel_k0k1(x)
    assert k0 == bessel_k0(x) and k1 == bessel_k1(x)
