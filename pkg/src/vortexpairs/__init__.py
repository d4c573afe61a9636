"""Vortex-antivortex pairs in the gauged O(3) sigma model.

Numerical Taubes solvers on the plane and the round sphere, the moduli-space
conformal factor and its geometry, point-vortex asymptotics, the Kaehler
volume of the vortex moduli space and the resulting gas thermodynamics.
"""

from .errors import ConvergenceError, DomainError, InfeasibleError, SingularSystemError
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConvergenceError",
    "DomainError",
    "InfeasibleError",
    "SingularSystemError",
    "__version__",
]
