"""Pure-Python twins of the compiled kernels in ``_ckernels.pyx``.

Same algorithms, same stopping rules; selected at import when the extension
is not built or when ``VORTEXPAIRS_PURE_PYTHON=1``.
"""

import math

import numpy as np

EULER = 0.57721566490153286060651209
SERIES_SWITCH = 2.0
UNDERFLOW_X = 745.0
EPS = 1e-17
MAXIT = 10000


def _k0k1(x):
    if x <= SERIES_SWITCH:
        t = 0.25 * x * x
        lg = math.log(0.5 * x)
        term0 = term1 = 1.0
        i0 = i1 = 1.0
        hk = 0.0
        s0 = 0.0
        s1 = 1.0 - 2.0 * EULER
        k = 0
        while True:
            k += 1
            term0 *= t / (k * k)
            term1 *= t / (k * (k + 1))
            hk += 1.0 / k
            hk1 = hk + 1.0 / (k + 1)
            i0 += term0
            i1 += term1
            s0 += hk * term0
            s1 += (hk + hk1 - 2.0 * EULER) * term1
            if term0 * (hk + 1.0) < EPS * abs(s0) and term1 * (hk1 + 1.0) < EPS * abs(s1):
                break
        k0 = -(lg + EULER) * i0 + s0
        k1 = 1.0 / x + lg * (0.5 * x * i1) - 0.25 * x * s1
        return k0, k1
    if x > UNDERFLOW_X:
        return 0.0, 0.0
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, MAXIT):
        a -= 2.0 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < EPS:
            break
    h = a1 * h
    k0 = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    return k0, k0 * (x + 0.5 - h) / x


def k0k1_array(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    out0 = np.empty_like(x)
    out1 = np.empty_like(x)
    for j, xj in enumerate(x):
        out0[j], out1[j] = _k0k1(float(xj))
    return out0, out1


def tanh_source(coef, ell, v, out, dout):
    arg = 0.5 * (v + ell)
    a = np.abs(arg)
    # e = exp(-2|a|): expm1 keeps tanh accurate for small |a|, exp keeps
    # sech^2 = 4e/(1+e)^2 accurate in the tails
    with np.errstate(invalid="ignore"):
        m = np.where(a < 0.5, np.expm1(-2.0 * a), np.exp(-2.0 * a) - 1.0)
        e = np.where(a < 0.5, 1.0 + m, np.exp(-2.0 * a))
    out[:] = coef * np.copysign(-m / (1.0 + e), arg)
    dout[:] = coef * 2.0 * e / ((1.0 + e) * (1.0 + e))
    return int(np.count_nonzero(np.isnan(v)))
