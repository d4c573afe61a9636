"""Volumes and total scalar curvatures of vortex-antivortex moduli spaces.

The moduli space of ``k_+`` vortices and ``k_-`` antivortices on a genus-g
surface of area ``V`` is modelled by ``Sym^{k_+} x Sym^{k_-}`` with the
Kahler class

    omega = sum_s (J_s eta_s + K_s theta_s) + 4 pi^2 sum_i zeta_i

and integrals are reduced to the intersection numbers
``int eta^(k-j-l) theta^j sigma_{i_1}...sigma_{i_l} = (g-l)!/(g-j-l)!``.
The gauged linear model at coupling ``e`` and its ``e -> inf`` limit
(``p1_*`` functions, conjectural beyond the (1,1) sphere case) share the
same sums with different ``J, K``.

Sums are assembled term by term in log space: factorials are exact
integers, each term is converted to floating point once and the signed
terms are combined with ``math.fsum``.
"""

from dataclasses import dataclass, replace
from fractions import Fraction
import math

from .errors import DomainError, InfeasibleError

TWO_PI = 2.0 * math.pi
FOUR_PI2 = 4.0 * math.pi ** 2


@dataclass(frozen=True)
class ModuliParams:
    """Genus, area, ``tau``, charges and gauge coupling (``inf`` allowed)."""

    g: int
    V: float
    tau: float
    k_plus: int
    k_minus: int
    e: float = math.inf

    def __post_init__(self):
        for name in ("g", "k_plus", "k_minus"):
            val = getattr(self, name)
            if isinstance(val, bool) or int(val) != val or val < 0:
                raise DomainError(f"{name} must be a nonnegative integer")
            object.__setattr__(self, name, int(val))
        if self.k_plus == 0 and self.k_minus == 0:
            raise DomainError("charges cannot both vanish")
        if not (self.V > 0 and math.isfinite(self.V)):
            raise DomainError("area V must be positive and finite")
        if not math.isfinite(self.tau):
            raise DomainError("tau must be finite")
        if not self.e > 0:
            raise DomainError("coupling e must be positive")

    @property
    def is_limit(self):
        return math.isinf(self.e)


@dataclass(frozen=True)
class JKCoefficients:
    J_plus: float
    J_minus: float
    K_plus: float
    K_minus: float

    def J(self, s):
        return self.J_plus if s > 0 else self.J_minus

    def K(self, s):
        return self.K_plus if s > 0 else self.K_minus


def jk_coefficients(p: ModuliParams) -> JKCoefficients:
    """Kahler-class coefficients at coupling ``p.e`` (``inf`` gives the limit)."""
    inv_e2 = 0.0 if p.is_limit else 1.0 / p.e ** 2
    dk = p.k_plus - p.k_minus
    Jp = TWO_PI * (1.0 - p.tau) * p.V - FOUR_PI2 * dk
    Jm = TWO_PI * (1.0 + p.tau) * p.V - FOUR_PI2 * inv_e2 * p.k_minus + FOUR_PI2 * dk
    return JKCoefficients(Jp, Jm, FOUR_PI2, FOUR_PI2 * (1.0 + inv_e2))


@dataclass(frozen=True)
class BradlowVerdict:
    """Outcome of the area-versus-charge test.

    ``lower_margin`` and ``upper_margin`` are the slacks of
    ``-(1+tau)V + 2 pi k_-/e^2 <= 2 pi (k_+ - k_-) <= (1-tau)V``;
    ``cone_shift`` is the finite-coupling vertex shift ``2 pi k_-/(e^2 V)``.
    """

    feasible: bool
    strict: bool
    violated: str | None
    lower_margin: float
    upper_margin: float
    cone_shift: float


def bradlow_check(p: ModuliParams, strict=True) -> BradlowVerdict:
    """Check the Bradlow bounds (with the finite-``e`` cone shift)."""
    shift = 0.0 if p.is_limit else TWO_PI * p.k_minus / (p.e ** 2 * p.V)
    d = TWO_PI * (p.k_plus - p.k_minus)
    lower = d - (-(1.0 + p.tau) * p.V + shift * p.V)
    upper = (1.0 - p.tau) * p.V - d
    violated = None
    ok = (lambda m: m > 0) if strict else (lambda m: m >= 0)
    if not ok(lower):
        violated = "lower: 2pi(k+ - k-) >= -(1+tau)V" + (" + 2pi k-/e^2" if shift else "")
    elif not ok(upper):
        violated = "upper: 2pi(k+ - k-) <= (1-tau)V"
    return BradlowVerdict(violated is None, bool(strict), violated, lower, upper, shift)


def intersection_number(g, k, j, l, indices=None):
    """``int_{Sym^k} eta^(k-j-l) theta^j sigma_{i_1}...sigma_{i_l}``.

    Parameters
    ----------
    indices : sequence of int, optional
        The ``l`` indices in ``1..g``; a repeated index gives 0.

    Returns
    -------
    Fraction
        ``(g-l)!/(g-j-l)!``.
    """
    for name, v in (("g", g), ("k", k), ("j", j), ("l", l)):
        if int(v) != v or v < 0:
            raise DomainError(f"{name} must be a nonnegative integer")
    if l > g or j > min(g - l, k - l):
        raise DomainError("need 0 <= l <= g and 0 <= j <= min(g-l, k-l)")
    if indices is not None:
        idx = list(indices)
        if len(idx) != l or any(not (1 <= i <= g) for i in idx):
            raise DomainError("indices must be l values in 1..g")
        if len(set(idx)) < l:
            return Fraction(0)
    return Fraction(math.factorial(g - l), math.factorial(g - j - l))


# ---------------------------------------------------------------- signed logs

def _signed_logsum(terms):
    """Combine ``[(log|t|, sign), ...]`` into ``(log|sum|, sign)``."""
    terms = [t for t in terms if t[1] != 0]
    if not terms:
        return -math.inf, 0
    m = max(t[0] for t in terms)
    s = math.fsum(sg * math.exp(lg - m) for lg, sg in terms)
    if s == 0.0:
        return -math.inf, 0
    return m + math.log(abs(s)), (1 if s > 0 else -1)


def _log_ratio(num_int, den_int):
    return math.log(num_int) - math.log(den_int)


def _factor_terms(k, g, l, J, K, dJ=None):
    """Terms of ``sum_{j=l}^{min(g,k)} J^(k-j) K^(j-l) / ((j-l)!(k-j)!(g-j)!)``.

    With ``dJ`` the derivative along a parameter on which only ``J``
    depends (slope ``dJ``) is returned instead.
    """
    out = []
    lJ, lK = math.log(J), math.log(K)
    for j in range(l, min(g, k) + 1):
        den = math.factorial(j - l) * math.factorial(k - j) * math.factorial(g - j)
        p = k - j
        if dJ is None:
            out.append((p * lJ + (j - l) * lK - math.log(den), 1))
        elif p > 0:
            out.append((math.log(p) + (p - 1) * lJ + math.log(abs(dJ)) + (j - l) * lK - math.log(den),
                        1 if dJ > 0 else -1))
    return out


def _scal_factor_terms(k, g, l, J, K):
    """Terms of ``sum_i (k+i-2g+1) J^(k-1-i) K^(i-l) / ((i-l)!(k-1-i)!(g-i)!)``."""
    out = []
    lJ, lK = math.log(J), math.log(K)
    for i in range(l, min(g, k - 1) + 1):
        c = k + i - 2 * g + 1
        if c == 0:
            continue
        den = math.factorial(i - l) * math.factorial(k - 1 - i) * math.factorial(g - i)
        out.append((math.log(abs(c)) + (k - 1 - i) * lJ + (i - l) * lK - math.log(den),
                    1 if c > 0 else -1))
    return out


# ---------------------------------------------------------------- validation

def _validate_glsm(p: ModuliParams):
    lo = max(2 * p.g - 2, 0)
    if not (p.k_plus >= p.k_minus > lo):
        raise DomainError(f"need k+ >= k- > max(2g-2, 0) = {lo}")
    _require_feasible(p)


def _validate_p1(p: ModuliParams):
    lo = max(2 * p.g - 2, 0)
    ks = (p.k_plus, p.k_minus)
    if p.g == 0:
        # the symmetric limit formula holds for a single species too
        pass
    elif not all(k > lo for k in ks):
        raise DomainError(f"need both charges > max(2g-2, 0) = {lo} for g > 0")
    _require_feasible(p)


def _require_feasible(p):
    v = bradlow_check(p, strict=True)
    if not v.feasible:
        raise InfeasibleError(f"Bradlow bound violated ({v.violated})")
    jk = jk_coefficients(p)
    if not (jk.J_plus > 0 and jk.J_minus > 0):
        raise InfeasibleError("Kahler coefficients J+ and J- must be positive")


# ---------------------------------------------------------------- volumes

def _log_volume(p, dV=False):
    jk = jk_coefficients(p)
    g = p.g
    ks = {1: p.k_plus, -1: p.k_minus}
    # dJ/dV along the area
    slope = {1: TWO_PI * (1.0 - p.tau), -1: TWO_PI * (1.0 + p.tau)}
    terms = []
    for l in range(g + 1):
        pref = math.log(math.factorial(g)) + math.log(math.factorial(g - l)) - math.log(math.factorial(l))
        pref += 4 * l * math.log(TWO_PI)
        sg = -1 if l % 2 else 1
        A = {s: _signed_logsum(_factor_terms(ks[s], g, l, jk.J(s), jk.K(s))) for s in (1, -1)}
        if not dV:
            if A[1][1] == 0 or A[-1][1] == 0:
                continue
            terms.append((pref + A[1][0] + A[-1][0], sg * A[1][1] * A[-1][1]))
            continue
        for s in (1, -1):
            dA = _signed_logsum(_factor_terms(ks[s], g, l, jk.J(s), jk.K(s), dJ=slope[s]))
            if dA[1] == 0 or A[-s][1] == 0:
                continue
            terms.append((pref + dA[0] + A[-s][0], sg * dA[1] * A[-s][1]))
    return _signed_logsum(terms)


def log_glsm_volume(p: ModuliParams):
    """``log Vol`` of the gauged linear model moduli space.

    Raises
    ------
    DomainError
        If the charges violate ``k+ >= k- > max(2g-2, 0)`` or the sum is
        not positive.
    InfeasibleError
        Outside the strict Bradlow region.
    """
    _validate_glsm(p)
    lv, sg = _log_volume(p)
    if sg <= 0:
        raise DomainError("volume sum is not positive: parameters outside the validity region")
    return lv


def glsm_volume(p: ModuliParams):
    """Volume of the gauged linear model moduli space at coupling ``p.e``.

    Examples
    --------
    >>> round(glsm_volume(ModuliParams(0, 4 * math.pi, 0.0, 1, 1)), 2)
    6234.18
    """
    return _exp_checked(log_glsm_volume(p))


def log_p1_volume(p: ModuliParams):
    """``log`` of the ``e -> inf`` volume (conjectural beyond the (1,1) sphere)."""
    q = replace(p, e=math.inf)
    _validate_p1(q)
    lv, sg = _log_volume(q)
    if sg <= 0:
        raise DomainError("volume sum is not positive: parameters outside the validity region")
    return lv


def p1_volume(p: ModuliParams):
    """Volume of the ``P^1`` vortex moduli space (``e = inf`` coefficients)."""
    return _exp_checked(log_p1_volume(p))


def dlog_p1_volume_dV(p: ModuliParams):
    """``d log Vol / dV`` of the ``e -> inf`` volume at fixed charges."""
    q = replace(p, e=math.inf)
    _validate_p1(q)
    lv, sv = _log_volume(q)
    ld, sd = _log_volume(q, dV=True)
    if sv <= 0:
        raise DomainError("volume sum is not positive")
    return sd * math.exp(ld - lv)


def _exp_checked(lv):
    if lv > 709.0:
        raise OverflowError("volume exceeds double range; use the log_* variant")
    return math.exp(lv)


# ---------------------------------------------------------------- total Scal

def _total_scal(p):
    jk = jk_coefficients(p)
    g = p.g
    ks = {1: p.k_plus, -1: p.k_minus}
    terms = []
    for l in range(g + 1):
        pref = math.log(math.factorial(g)) + math.log(math.factorial(g - l)) - math.log(math.factorial(l))
        pref += 4 * l * math.log(TWO_PI) + math.log(4 * math.pi)
        sg = -1 if l % 2 else 1
        for s in (1, -1):
            B = _signed_logsum(_scal_factor_terms(ks[s], g, l, jk.J(s), jk.K(s)))
            C = _signed_logsum(_factor_terms(ks[-s], g, l, jk.J(-s), jk.K(-s)))
            if B[1] == 0 or C[1] == 0:
                continue
            terms.append((pref + B[0] + C[0], sg * B[1] * C[1]))
    lv, sg = _signed_logsum(terms)
    return 0.0 if sg == 0 else sg * _exp_checked(lv)


def glsm_total_scal(p: ModuliParams):
    """Total scalar curvature ``4 pi int c_1 omega^(n-1)/(n-1)!``.

    With ``c_1 = sum_s ((k_s - g + 1) eta_s - theta_s)`` the integral
    factorises per species as

        4 pi sum_l (-1)^l (2 pi)^(4l) g!(g-l)!/l!
            sum_s B_s(l) C_{-s}(l),

    ``B_s(l) = sum_{i=l}^{min(g,k_s-1)} (k_s+i-2g+1) J_s^(k_s-1-i) K_s^(i-l)
    / ((i-l)!(k_s-1-i)!(g-i)!)`` and ``C`` the per-species volume factor.
    For ``g = 0`` and charges (1, 1) this is ``8 pi (J_+ + J_-)``, the
    total scalar curvature of a product of two spheres of areas ``J_+``
    and ``J_-``.
    """
    _validate_glsm(p)
    return _total_scal(p)


def p1_total_scal(p: ModuliParams):
    """Total scalar curvature at ``e = inf`` (conjectural)."""
    q = replace(p, e=math.inf)
    _validate_p1(q)
    return _total_scal(q)


def _inv_fact(n):
    return 0 if n < 0 else Fraction(1, math.factorial(n))


def glsm_total_scal_as_printed(p: ModuliParams):
    """Literal evaluation of the alternative closed form with the
    ``(k_s + i_s - 2g)`` weights and ``(g!)^2 (n-2l-1)!/(n-1)!`` prefactor.

    Terms with a factorial of a negative integer are dropped.  Kept for
    comparison only: it disagrees with ``glsm_total_scal`` (for instance
    it gives ``4 pi (J_+ + J_-)`` at ``g = 0`` and charges (1, 1)).
    """
    _validate_glsm(p)
    jk = jk_coefficients(p)
    g = p.g
    n = p.k_plus + p.k_minus
    ks = {1: p.k_plus, -1: p.k_minus}
    total = []
    for l in range(g + 1):
        if n - 2 * l - 1 < 0:
            continue
        pref = 4 * math.pi * math.factorial(g) ** 2 * (-1) ** l * float(
            Fraction(math.factorial(n - 2 * l - 1), math.factorial(l) * math.factorial(n - 1)))
        for s in (1, -1):
            k, km = ks[s], ks[-s]
            for i in range(l, min(g, k - 1) + 1):
                for j in range(0, g + 1):
                    w = (_inv_fact(i - l) * _inv_fact(j - l) * _inv_fact(k - i - 1)
                         * _inv_fact(km - j) * _inv_fact(g - i) * _inv_fact(g - j))
                    if w == 0:
                        continue
                    total.append(pref * (k + i - 2 * g) * float(w)
                                 * jk.J(s) ** (k - i - 1) * jk.J(-s) ** (km - j)
                                 * jk.K(s) ** (i - l) * jk.K(-s) ** (j - l))
    return math.fsum(total)
