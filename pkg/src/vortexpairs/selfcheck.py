"""Invariant suite behind the ``verify`` command.

Each check returns ``(passed, detail)``; the slower solver checks run only
when ``quick`` is false.
"""

import io
import math

import numpy as np


def _bessel_values():
    from .specfun import bessel_k0, bessel_k1

    e0 = abs(bessel_k0(1.0) / 0.42102443824070834 - 1)
    e1 = abs(bessel_k1(1.0) / 0.6019072301972346 - 1)
    return max(e0, e1) <= 1e-14, f"max rel err {max(e0, e1):.2e}"


def _bessel_recurrence():
    from .specfun import bessel_k0, bessel_k1

    x = np.linspace(0.1, 50, 400)
    h = 1e-5
    # five-point central difference; the three-point truncation error
    # h^2 K1'''/6 alone reaches 1e-6 near x = 0.1
    d = (8 * (bessel_k1(x + h) - bessel_k1(x - h)) - (bessel_k1(x + 2 * h) - bessel_k1(x - 2 * h))) / (12 * h)
    r = np.max(np.abs(d + bessel_k0(x) + bessel_k1(x) / x))
    return r <= 1e-9, f"max residual {r:.2e}"


def _gamma_limit():
    from .specfun import EULER_GAMMA, bessel_k0

    x = 1e-6
    err = abs(bessel_k0(x) + math.log(x / 2) + EULER_GAMMA)
    return err <= 1e-8, f"|K0(x)+log(x/2)+gamma| = {err:.2e}"


def _laplacian_order():
    from .elliptic import laplacian_convergence_slopes

    s = laplacian_convergence_slopes()
    ok = all(1.9 <= s[k] <= 2.1 for k in ("rect", "polar"))
    return ok, f"rect {s['rect']:.3f}, polar {s['polar']:.3f}"


def _charge():
    from .pointvortex import extract_q, solve_radial_vortex

    q = extract_q(solve_radial_vortex()).q
    return -7.35 <= q <= -6.95, f"q = {q:.6f}"


def _sphere_symmetry():
    from .taubes_sphere import solve_sphere, sphere_eps_b, sphere_grid

    eb = sphere_eps_b(solve_sphere(1.0, 1.0, sphere_grid(50)))
    return abs(eb + 1) <= 1e-6, f"eps*b(1) = {eb:.12f}"


def _volume_closed_form():
    from .moduli_volume import ModuliParams, p1_volume

    v = p1_volume(ModuliParams(0, 4 * math.pi, 0.0, 1, 1))
    ref = (8 * math.pi ** 2) ** 2
    return abs(v / ref - 1) <= 1e-14, f"{v:.10f} vs {ref:.10f}"


def _intersections():
    from .moduli_volume import intersection_number

    ok = intersection_number(2, 5, 1, 0) == 2 and intersection_number(3, 5, 1, 1) == 2
    ok = ok and intersection_number(3, 5, 0, 2, [1, 1]) == 0
    return ok, "genPoinc samples"


def _virial_resummation():
    from .thermo import GasState, pressure, virial_pressure

    tau, nu = 0.3, 0.001
    s = GasState(1, 1, 1 / nu, 1.0, tau)
    ser = virial_pressure(nu, nu, tau, 12)
    ref = pressure(s, "limit")
    rel = abs(ser / ref - 1)
    return rel <= 1e-6, f"relative gap {rel:.2e}"


def _thermo_consistency():
    from .thermo import GasState, entropy, free_energy, pressure

    s = GasState(40, 25, 2000.0, 0.8, 0.1, 0)
    hT, hV = 1e-4 * s.T, 1e-4 * s.V
    S_fd = -(free_energy(s.replace(T=s.T + hT)) - free_energy(s.replace(T=s.T - hT))) / (2 * hT)
    P_fd = -(free_energy(s.replace(V=s.V + hV)) - free_energy(s.replace(V=s.V - hV))) / (2 * hV)
    eS = abs(S_fd / entropy(s, "exact") - 1)
    eP = abs(P_fd / pressure(s, "exact") - 1)
    return max(eS, eP) <= 1e-6, f"S rel {eS:.1e}, P rel {eP:.1e}"


def _genus_independence():
    from .thermo import GasState, pressure

    a = pressure(GasState(30, 20, 1000.0, 1.0, 0.2, 0), "limit")
    b = pressure(GasState(30, 20, 1000.0, 1.0, 0.2, 7), "limit")
    return a == b, f"{a!r} vs {b!r}"


def _mixing_positive():
    from .thermo import entropy_of_mixing, feasible_sweep

    m = min(entropy_of_mixing(s).delta_S for s in feasible_sweep(1000))
    return m > 0, f"min dS_mix = {m:.3e}"


def _determinism():
    from .cli import run

    outs = []
    for _ in range(2):
        buf = io.StringIO()
        run(["virial", "--tau", "0.3", "--order", "6"], stdout=buf)
        outs.append(buf.getvalue())
    return outs[0] == outs[1] and len(outs[0]) > 0, f"{len(outs[0])} bytes"


def _plane_small_eps():
    from .pointvortex import F_star
    from .taubes_plane import conformal_table_plane

    t = conformal_table_plane([0.045, 0.05, 0.055])
    F = t.F_tangent[1]
    rel = abs(F / F_star(0.05) - 1)
    return rel <= 0.05, f"F(0.05) = {F:.4f}, rel to F_star {rel:.3%}"


def _sphere_volume():
    from .taubes_sphere import sphere_table, volume_s2_pairs

    v = volume_s2_pairs(sphere_table(np.geomspace(0.01, 1.0, 25), 1.0))
    return v.relative_gap <= 0.02, f"relative gap {v.relative_gap:.3%}"


QUICK = [
    ("bessel_reference_values", _bessel_values),
    ("bessel_recurrence", _bessel_recurrence),
    ("euler_gamma_limit", _gamma_limit),
    ("laplacian_second_order", _laplacian_order),
    ("point_vortex_charge", _charge),
    ("sphere_antipodal_identity", _sphere_symmetry),
    ("volume_closed_form", _volume_closed_form),
    ("intersection_numbers", _intersections),
    ("virial_resummation", _virial_resummation),
    ("thermodynamic_consistency", _thermo_consistency),
    ("pressure_genus_independence", _genus_independence),
    ("mixing_entropy_positive", _mixing_positive),
    ("cli_determinism", _determinism),
]
SLOW = [
    ("plane_small_eps_conformal_factor", _plane_small_eps),
    ("sphere_volume_extrapolation", _sphere_volume),
]


def run_checks(quick=True):
    results = []
    for name, fn in QUICK + ([] if quick else SLOW):
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check counts as a failure
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append({"name": name, "passed": bool(ok), "detail": detail})
    return results
