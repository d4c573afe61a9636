"""Classical statistical mechanics of a vortex-antivortex gas mixture.

The partition function of ``k_+`` vortices and ``k_-`` antivortices on a
surface of area ``V`` is

    Z = (KT / (2 pi hbar^2))^(k_+ + k_-) exp(-E0/KT) Vol(M),
    E0 = 2 pi ((1 - tau) k_+ + (1 + tau) k_-),

with ``Vol(M)`` the ``e -> inf`` moduli volume.  Two routes are offered:
``exact`` works with ``log Z`` itself, the other modes evaluate the
large-``k, V`` closed forms (Stirling, densities ``nu = k/V`` fixed).
"""

from dataclasses import dataclass
from fractions import Fraction
import math
import warnings

import numpy as np

from .errors import DomainError, InfeasibleError
from .moduli_volume import ModuliParams, dlog_p1_volume_dV, log_p1_volume

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GasState:
    """Thermodynamic state point; ``K`` and ``hbar`` default to 1."""

    k_plus: int
    k_minus: int
    V: float
    T: float
    tau: float = 0.0
    g: int = 0
    K: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.T > 0 and self.V > 0):
            raise DomainError("T and V must be positive")
        if self.k_plus < 0 or self.k_minus < 0 or self.k_plus + self.k_minus == 0:
            raise DomainError("particle counts must be nonnegative and not both zero")
        if not (self.K > 0 and self.hbar > 0):
            raise DomainError("K and hbar must be positive")
        if not abs(self.tau) < 1:
            raise DomainError("need |tau| < 1")

    @property
    def nu_plus(self):
        return self.k_plus / self.V

    @property
    def nu_minus(self):
        return self.k_minus / self.V

    def nu(self, s):
        return self.nu_plus if s > 0 else self.nu_minus

    def k(self, s):
        return self.k_plus if s > 0 else self.k_minus

    @property
    def rest_energy(self):
        return TWO_PI * ((1.0 - self.tau) * self.k_plus + (1.0 + self.tau) * self.k_minus)

    def params(self):
        return ModuliParams(self.g, self.V, self.tau, self.k_plus, self.k_minus)

    def replace(self, **kw):
        d = dict(self.__dict__)
        d.update(kw)
        return GasState(**d)


def _species_arg(s: GasState, sg):
    """``1 - sg tau - 2 pi (nu_sg - nu_-sg)``, positive on the Bradlow region."""
    return 1.0 - sg * s.tau - TWO_PI * (s.nu(sg) - s.nu(-sg))


def _genus_numerator(s: GasState):
    return 1.0 - s.tau ** 2 + TWO_PI * ((1.0 - s.tau) * s.nu_plus + (1.0 + s.tau) * s.nu_minus)


def _check_feasible(s: GasState):
    for sg in (1, -1):
        if _species_arg(s, sg) <= 0:
            raise InfeasibleError("densities violate the strict Bradlow bound")


def log_partition(s: GasState):
    """``log Z`` with the moduli volume evaluated in log space."""
    _check_feasible(s)
    n = s.k_plus + s.k_minus
    KT = s.K * s.T
    return n * math.log(KT / (TWO_PI * s.hbar ** 2)) - s.rest_energy / KT + log_p1_volume(s.params())


def free_energy(s: GasState, mode="exact"):
    """Helmholtz free energy.

    ``exact`` is ``-KT log Z``; ``asymptotic`` is the Stirling form

        E0 - KT sum_s k_s log(e KT/(hbar^2 nu_s)) - KT sum_s k_s log a_s
           - KT g log(n_g / (a_+ a_-)),

    ``a_s = 1 - s tau - 2 pi (nu_s - nu_-s)`` and
    ``n_g = 1 - tau^2 + 2 pi ((1-tau) nu_+ + (1+tau) nu_-)``.
    """
    _check_feasible(s)
    KT = s.K * s.T
    if mode == "exact":
        return -KT * log_partition(s)
    if mode != "asymptotic":
        raise DomainError("mode must be 'exact' or 'asymptotic'")
    if min(s.k_plus, s.k_minus) < 20:
        warnings.warn("asymptotic free energy used with fewer than 20 particles per species", stacklevel=2)
    out = s.rest_energy
    den = 1.0
    for sg in (1, -1):
        k = s.k(sg)
        a = _species_arg(s, sg)
        den *= a
        if k:
            out -= KT * k * (math.log(math.e * KT / (s.hbar ** 2 * s.nu(sg))) + math.log(a))
    out -= KT * s.g * math.log(_genus_numerator(s) / den)
    return out


def entropy(s: GasState, mode="with_genus"):
    """Entropy.

    ``with_genus`` is ``-dF/dT`` of the asymptotic free energy,
    ``plain`` drops the genus terms (first-order homogeneous in the
    species), ``exact`` differentiates ``-KT log Z`` analytically:
    ``S = K log Z + K (k_+ + k_-) + E0/T``.
    """
    _check_feasible(s)
    if mode == "exact":
        return s.K * log_partition(s) + s.K * (s.k_plus + s.k_minus) + s.rest_energy / s.T
    if mode not in ("with_genus", "plain"):
        raise DomainError("mode must be 'with_genus', 'plain' or 'exact'")
    KT = s.K * s.T
    S = 0.0
    for sg in (1, -1):
        k = s.k(sg)
        a = _species_arg(s, sg)
        if k:
            S += s.K * k * (math.log(math.e ** 2 * KT / (s.hbar ** 2 * s.nu(sg))) + math.log(a))
        if mode == "with_genus":
            S -= s.K * s.g * math.log(a)
    if mode == "with_genus":
        S += s.K * s.g * math.log(_genus_numerator(s))
    return S


def pressure(s: GasState, mode="limit"):
    """Pressure.

    Modes
    -----
    limit
        ``sum_s KT k_s / (V - 2 pi (k_s - k_-s)/(1 - s tau))``, genus free.
    full
        ``-dF/dV`` of the asymptotic free energy including the ``g/V``
        terms.
    full_as_printed
        The same with the opposite sign on the ``g n_g'`` term, as in the
        commonly quoted form; kept for comparison.
    exact
        ``KT d log Vol/dV`` from the moduli volume.
    """
    _check_feasible(s)
    KT = s.K * s.T
    if mode == "exact":
        return KT * dlog_p1_volume_dV(s.params())
    if mode == "limit":
        P = 0.0
        for sg in (1, -1):
            den = s.V - TWO_PI / (1.0 - sg * s.tau) * (s.k(sg) - s.k(-sg))
            if den <= 0:
                raise InfeasibleError("effective area is not positive")
            P += KT * s.k(sg) / den
        return P
    if mode not in ("full", "full_as_printed"):
        raise DomainError("mode must be 'limit', 'full', 'full_as_printed' or 'exact'")
    P = KT * (s.nu_plus + s.nu_minus)
    for sg in (1, -1):
        d = TWO_PI * (s.nu(sg) - s.nu(-sg))
        P += KT * (s.nu(sg) - s.g / s.V) * d / _species_arg(s, sg)
    m = TWO_PI * ((1.0 - s.tau) * s.nu_plus + (1.0 + s.tau) * s.nu_minus)
    sign = -1.0 if mode == "full" else 1.0
    return P + sign * s.g * KT / s.V * m / _genus_numerator(s)


# ---------------------------------------------------------------- virial

@dataclass(frozen=True)
class VirialTerm:
    """Coefficient of ``nu_+^a nu_-^b`` in ``P/KT``.

    The value is ``pi^(n-1) * sum_{p,q} c_pq / ((1-tau)^p (1+tau)^q)``
    with ``n = a + b`` and exact rationals ``c_pq`` stored in ``parts``.
    """

    a: int
    b: int
    parts: tuple

    @property
    def pi_power(self):
        return self.a + self.b - 1

    def value(self, tau):
        s = math.fsum(float(c) / ((1.0 - tau) ** p * (1.0 + tau) ** q) for p, q, c in self.parts)
        return s * math.pi ** self.pi_power

    def exact(self, tau: Fraction):
        """Rational part at rational ``tau`` (multiply by ``pi**pi_power``)."""
        tau = Fraction(tau)
        return sum((c / ((1 - tau) ** p * (1 + tau) ** q) for p, q, c in self.parts), Fraction(0))

    def symbolic(self):
        if not self.parts:
            return "0"
        out = []
        for p, q, c in self.parts:
            den = []
            if p:
                den.append("(1-tau)" + (f"^{p}" if p > 1 else ""))
            if q:
                den.append("(1+tau)" + (f"^{q}" if q > 1 else ""))
            term = str(c)
            if len(den) == 1:
                term += "/" + den[0]
            elif den:
                term += "/(" + "*".join(den) + ")"
            out.append(term)
        pi = "" if self.pi_power == 0 else ("*pi" if self.pi_power == 1 else f"*pi^{self.pi_power}")
        return "(" + " + ".join(out) + ")" + pi


def virial_coefficients(order=4):
    """Coefficients of ``P/KT`` in powers of the densities.

    Expands ``sum_n sum_s nu_s (c_s (nu_s - nu_-s))^n`` with
    ``c_s = 2 pi/(1 - s tau)`` up to total degree ``order``; returns a
    dict ``(a, b) -> VirialTerm``.
    """
    if not (1 <= order <= 12):
        raise DomainError("order must lie in 1..12")
    acc = {}
    for n in range(order):
        for sg in (1, -1):
            # nu_s * c_s^n * sum_r C(n,r) nu_s^(n-r) (-nu_-s)^r
            for r in range(n + 1):
                c = Fraction(math.comb(n, r) * (-1) ** r * 2 ** n)
                ds, dm = 1 + n - r, r
                a, b = (ds, dm) if sg > 0 else (dm, ds)
                key = (a, b)
                p, q = (n, 0) if sg > 0 else (0, n)
                bucket = acc.setdefault(key, {})
                bucket[(p, q)] = bucket.get((p, q), Fraction(0)) + c
    out = {}
    for (a, b), bucket in sorted(acc.items()):
        parts = tuple((p, q, c) for (p, q), c in sorted(bucket.items()) if c != 0)
        out[(a, b)] = VirialTerm(a, b, parts)
    return out


def virial_pressure(nu_plus, nu_minus, tau, order=12):
    """``P/KT`` from the truncated virial table."""
    tab = virial_coefficients(order)
    return math.fsum(t.value(tau) * nu_plus ** a * nu_minus ** b for (a, b), t in tab.items())


# ---------------------------------------------------------------- mixing

@dataclass(frozen=True)
class MixingResult:
    delta_S: float
    delta_S_ideal: float
    V_plus: float
    V_minus: float


def entropy_of_mixing(s: GasState):
    """Entropy of mixing against separated containers at equal pressure.

    Partial volumes ``V_s = (V + s 4 pi tau k_-s/(1 - tau^2)) / (1 + k_-s/k_s)``.

    Raises
    ------
    InfeasibleError
        Unless ``V/(2 pi) > k_+/(1-tau) + k_-/(1+tau)``.
    """
    if s.k_plus < 1 or s.k_minus < 1:
        raise DomainError("mixing needs both species present")
    if not s.V / TWO_PI > s.k_plus / (1.0 - s.tau) + s.k_minus / (1.0 + s.tau):
        raise InfeasibleError("separated containers would violate the Bradlow bound")
    t = s.tau
    dS, dI = [], []
    Vs = {}
    for sg in (1, -1):
        k, km = s.k(sg), s.k(-sg)
        nu, num = s.nu(sg), s.nu(-sg)
        ratio = (1.0 - sg * t - TWO_PI * (nu - num)) / (
            1.0 - sg * t - TWO_PI * (nu + (1.0 - sg * t) / (1.0 + sg * t) * num))
        dS.append(k * (math.log1p(num / nu) + math.log(ratio)))
        dI.append(k * math.log1p(num / nu))
        Vs[sg] = (s.V + sg * 4 * math.pi * t / (1 - t * t) * km) / (1.0 + km / k)
    return MixingResult(s.K * math.fsum(dS), s.K * math.fsum(dI), Vs[1], Vs[-1])


def feasible_sweep(n=1000, seed=0, V=1e4):
    """Random state points strictly inside the separated-container region."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        tau = rng.uniform(-0.9, 0.9)
        cap = V / TWO_PI
        fp, fm = rng.uniform(0.0, 1.0, 2)
        if fp + fm >= 0.999:
            continue
        kp = int(fp * cap * (1 - tau))
        km = int(fm * cap * (1 + tau))
        if kp < 1 or km < 1:
            continue
        out.append(GasState(kp, km, V, 1.0, tau))
    return out
