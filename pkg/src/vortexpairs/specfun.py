"""Modified Bessel functions of the second kind, orders zero and one.

Accuracy target is 1e-12 relative on [1e-6, 700].  Below ``x = 2`` the
logarithmic power series is summed directly; above it the ratio K1/K0 and
the normalisation come from Steed's continued fraction.  Arguments beyond
the double-precision underflow threshold return 0.
"""

import numpy as np

from . import kernels
from .errors import DomainError

EULER_GAMMA = 0.57721566490153286060651209


def _prepare(x):
    arr = np.asarray(x, dtype=np.float64)
    if np.any(np.isnan(arr)) or np.any(arr <= 0.0):
        raise DomainError("modified Bessel K requires x > 0")
    return arr


def bessel_k0k1(x):
    """Evaluate K0 and K1 together.

    Parameters
    ----------
    x : float or array_like
        Positive argument(s).

    Returns
    -------
    k0, k1 : float or ndarray
        Same shape as ``x``.

    Raises
    ------
    DomainError
        If any argument is non-positive or NaN.
    """
    arr = _prepare(x)
    flat = np.ascontiguousarray(arr.ravel())
    k0, k1 = kernels.k0k1_array(flat)
    if arr.ndim == 0:
        return float(k0[0]), float(k1[0])
    return k0.reshape(arr.shape), k1.reshape(arr.shape)


def bessel_k0(x):
    """Modified Bessel function K0 for x > 0."""
    return bessel_k0k1(x)[0]


def bessel_k1(x):
    """Modified Bessel function K1 for x > 0."""
    return bessel_k0k1(x)[1]
