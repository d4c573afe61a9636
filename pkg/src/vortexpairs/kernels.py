"""Backend selection for the hot pointwise kernels.

The compiled extension is used when importable; setting the environment
variable ``VORTEXPAIRS_PURE_PYTHON=1`` forces the Python twin.  ``BACKEND``
names the active choice.
"""

import os

from . import _pykernels

if os.environ.get("VORTEXPAIRS_PURE_PYTHON") == "1":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"

k0k1_array = _impl.k0k1_array
tanh_source = _impl.tanh_source

__all__ = ["BACKEND", "k0k1_array", "tanh_source"]
