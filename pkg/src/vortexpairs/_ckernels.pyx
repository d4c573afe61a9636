# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pointwise kernels.

Two families live here: the modified Bessel functions K0/K1 evaluated
elementwise over an array, and the saturating Taubes source
``coef * tanh((v + ell) / 2)`` together with its derivative in ``v``.
The Newton residual and Jacobian assembly call the latter once per
iteration on every grid node.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, copysign, log, sqrt, fabs, isnan, M_PI

cnp.import_array()

cdef double EULER = 0.57721566490153286060651209
cdef double SERIES_SWITCH = 2.0
cdef double UNDERFLOW_X = 745.0
cdef double EPS = 1e-17
cdef int MAXIT = 10000


cdef void _k0k1(double x, double* k0, double* k1) noexcept nogil:
    cdef double t, term0, term1, i0, i1, s0, s1, hk, hk1, lg
    cdef double b, d, h, delh, q1, q2, a1, q, c, a, s, qnew, dels
    cdef int k, i
    if x <= SERIES_SWITCH:
        t = 0.25 * x * x
        lg = log(0.5 * x)
        term0 = 1.0          # t^k / (k!)^2
        term1 = 1.0          # t^k / (k! (k+1)!)
        i0 = 1.0
        i1 = 1.0
        hk = 0.0             # harmonic number H_k
        s0 = 0.0
        s1 = 1.0 - 2.0 * EULER     # psi(1) + psi(2) at k = 0
        k = 0
        while True:
            k += 1
            term0 *= t / (<double>k * k)
            term1 *= t / (<double>k * (k + 1))
            hk += 1.0 / k
            hk1 = hk + 1.0 / (k + 1)
            i0 += term0
            i1 += term1
            s0 += hk * term0
            s1 += (hk + hk1 - 2.0 * EULER) * term1
            if term0 * (hk + 1.0) < EPS * fabs(s0) and term1 * (hk1 + 1.0) < EPS * fabs(s1):
                break
        k0[0] = -(lg + EULER) * i0 + s0
        k1[0] = 1.0 / x + lg * (0.5 * x * i1) - 0.25 * x * s1
        return
    if x > UNDERFLOW_X:
        k0[0] = 0.0
        k1[0] = 0.0
        return
    # Steed's continued fraction for the ratio K1/K0 (order zero)
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d
    delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25
    q = a1
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, MAXIT):
        a -= 2.0 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if fabs(dels / s) < EPS:
            break
    h = a1 * h
    k0[0] = sqrt(M_PI / (2.0 * x)) * exp(-x) / s
    k1[0] = k0[0] * (x + 0.5 - h) / x


def k0k1_array(double[::1] x):
    """Return (K0(x), K1(x)) for a contiguous float64 array of positive x."""
    cdef Py_ssize_t n = x.shape[0], j
    out0 = np.empty(n, dtype=np.float64)
    out1 = np.empty(n, dtype=np.float64)
    cdef double[::1] o0 = out0
    cdef double[::1] o1 = out1
    with nogil:
        for j in range(n):
            _k0k1(x[j], &o0[j], &o1[j])
    return out0, out1


def tanh_source(double[::1] coef, double[::1] ell, double[::1] v,
                double[::1] out, double[::1] dout):
    """Fill ``out = coef*tanh((v+ell)/2)`` and ``dout`` with its v-derivative.

    ``ell`` may hold -inf (the source saturates at -coef there).  Returns the
    number of NaN values met in ``v``.
    """
    cdef Py_ssize_t n = v.shape[0], j
    cdef double arg, a, e, m
    cdef int nan_count = 0
    with nogil:
        for j in range(n):
            if isnan(v[j]):
                nan_count += 1
            arg = 0.5 * (v[j] + ell[j])
            a = fabs(arg)
            # e = exp(-2|a|): expm1 keeps tanh accurate for small |a|,
            # exp keeps sech^2 accurate in the tails
            if a < 0.5:
                m = expm1(-2.0 * a)
                e = 1.0 + m
            else:
                e = exp(-2.0 * a)
                m = e - 1.0
            out[j] = coef[j] * copysign(-m / (1.0 + e), arg)
            dout[j] = coef[j] * 2.0 * e / ((1.0 + e) * (1.0 + e))
    return nan_count
