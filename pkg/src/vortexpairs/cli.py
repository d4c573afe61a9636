"""Command-line front end.

Every subcommand prints a JSON result envelope (or, with ``--format csv``,
its main table) to stdout.  With ``--out DIR`` the envelope, all tables and
a ``manifest.json`` with SHA-256 hashes are written to ``DIR``.  Parameters
may also come from ``--config FILE`` (``key = value`` lines); flags given on
the command line win.

Exit codes: 0 success, 1 usage or parameter error, 2 solver failure,
3 infeasible parameters.  Errors are reported as JSON on stderr.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .errors import ConvergenceError, DomainError, InfeasibleError, SingularSystemError
from .io import columns_to_rows, csv_text, envelope, json_text, read_config, write_outputs
from .kernels import BACKEND

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_INFEASIBLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _inf_float(s):
    s = str(s).strip().lower()
    return math.inf if s in ("inf", "infinity", "+inf") else float(s)


def _bool(s):
    s = str(s).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s}")


# command -> list of (name, type, default, help)
COMMANDS = {
    "solve-plane": [
        ("eps", float, 0.05, "half-separation"),
        ("tier", str, "100", "grid tier: 100, 200 or 400"),
        ("tol", float, 1e-10, "Newton tolerance (row-scaled sup norm)"),
    ],
    "solve-sphere": [
        ("eps", float, None, "single half-separation (omit for a sweep)"),
        ("radius", float, 1.0, "sphere radius R"),
        ("tier", str, "50", "grid tier: 50, 100 or 200"),
        ("eps_min", float, 0.01, "sweep lower end"),
        ("n_eps", int, 40, "sweep size (log spaced up to 1)"),
        ("fit_eps_max", float, 0.1, "largest eps used in the volume extrapolation"),
    ],
    "single-vortex": [
        ("r_max", float, 20.0, "outer radius"),
        ("n", int, 4001, "mesh nodes"),
        ("window_lo", float, 5.0, "charge-fit window start"),
        ("window_hi", float, 10.0, "charge-fit window end"),
    ],
    "conformal-factor": [
        ("eps_min", float, 0.05, "first half-separation"),
        ("eps_max", float, 3.0, "last half-separation"),
        ("n_eps", int, 30, "number of log-spaced samples"),
        ("tier", str, "100", "plane grid tier"),
        ("workers", int, None, "worker processes (default: VORTEXPAIRS_WORKERS or 1)"),
    ],
    "embed": [
        ("source", str, "numeric", "numeric or F_star"),
        ("eps_min", float, 0.05, "numeric window start"),
        ("eps_max", float, 3.0, "numeric window end"),
        ("n_eps", int, 30, "numeric samples"),
        ("tier", str, "100", "plane grid tier"),
        ("workers", int, None, "worker processes"),
    ],
    "curvature": [
        ("source", str, "numeric", "numeric or F_star"),
        ("eps_min", float, 0.05, "numeric window start"),
        ("eps_max", float, 3.0, "numeric window end"),
        ("n_eps", int, 30, "numeric samples"),
        ("tier", str, "100", "plane grid tier"),
        ("workers", int, None, "worker processes"),
    ],
    "volume": [
        ("genus", int, 0, "genus g"),
        ("area", float, None, "area V of the surface"),
        ("kplus", int, 1, "vortex number"),
        ("kminus", int, 1, "antivortex number"),
        ("tau", float, 0.0, "symmetry-breaking parameter"),
        ("e", _inf_float, math.inf, "gauge coupling (inf for the sigma-model limit)"),
    ],
    "scal": [
        ("genus", int, 0, "genus g"),
        ("area", float, None, "area V of the surface"),
        ("kplus", int, 1, "vortex number"),
        ("kminus", int, 1, "antivortex number"),
        ("tau", float, 0.0, "symmetry-breaking parameter"),
        ("e", _inf_float, math.inf, "gauge coupling"),
    ],
    "thermo": [
        ("kplus", int, None, "vortex number"),
        ("kminus", int, None, "antivortex number"),
        ("area", float, None, "area V"),
        ("temperature", float, 1.0, "temperature T"),
        ("tau", float, 0.0, "symmetry-breaking parameter"),
        ("genus", int, 0, "genus g"),
        ("boltzmann", float, 1.0, "Boltzmann constant K"),
        ("hbar", float, 1.0, "reduced Planck constant"),
    ],
    "virial": [
        ("tau", float, 0.0, "symmetry-breaking parameter"),
        ("order", int, 3, "highest total degree in the densities"),
    ],
    "verify": [
        ("quick", _bool, True, "skip the slower solver checks"),
    ],
}

DEFAULT_FORMAT = {"virial": "csv"}


def build_parser():
    p = _Parser(prog="vortexpairs", description="Vortex-antivortex pair geometry and thermodynamics.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for cmd, opts in COMMANDS.items():
        sp = sub.add_parser(cmd)
        sp.add_argument("--config", default=None, help="key=value configuration file")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--format", choices=("json", "csv"), default=None)
        for name, typ, _default, hlp in opts:
            sp.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None, help=hlp)
    return p


def resolve(args):
    """Merge defaults, config file and flags into a plain dict."""
    opts = COMMANDS[args.command]
    conf = read_config(args.config) if args.config else {}
    known = {o[0] for o in opts} | {"out", "format"}
    extra = set(conf) - known
    if extra:
        raise UsageError(f"unknown config keys: {sorted(extra)}")
    cfg = {}
    for name, typ, default, _h in opts:
        val = getattr(args, name)
        if val is None and name in conf:
            try:
                val = typ(conf[name])
            except ValueError as exc:
                raise UsageError(f"config key {name}: {exc}") from None
        cfg[name] = default if val is None else val
    cfg["out"] = args.out if args.out is not None else conf.get("out")
    cfg["format"] = args.format or conf.get("format") or DEFAULT_FORMAT.get(args.command, "json")
    if cfg["format"] not in ("json", "csv"):
        raise UsageError("format must be json or csv")
    return cfg


def _need(cfg, *names):
    missing = [n for n in names if cfg[n] is None]
    if missing:
        raise UsageError("missing required parameter(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


# ---------------------------------------------------------------- commands

def cmd_solve_plane(cfg):
    from .pointvortex import f_star_profile
    from .taubes_plane import extract_deps_b_deps, extract_eps_b, plane_grid, self_similar_profile, solve_plane, tier_grid_args

    ga = tier_grid_args(cfg["tier"])
    sol = solve_plane(cfg["eps"], plane_grid(cfg["eps"], **ga), tol=cfg["tol"])
    eb = extract_eps_b(sol)
    deb = extract_deps_b_deps(sol)
    x, f = self_similar_profile(sol)
    X, Y = sol.grid.mesh()
    right = sol.values[X > 0]
    out = {"eps_b": eb, "b": eb / cfg["eps"], "F_tangent": 2 * np.pi * (2 + deb / cfg["eps"])}
    diag = {"iterations": sol.report.iterations, "residual": sol.report.final_residual_sup,
            "grid_shape": list(sol.grid.shape), "grid": ga, "min_hhat_right_half": float(right.min())}
    table = ("profile.csv", ["x", "f_eps", "f_star"], columns_to_rows(x, f, f_star_profile(x)))
    return envelope(cfg, out, diag), [table]


def _sphere_grid(tier):
    from .taubes_sphere import SPHERE_TIERS, sphere_grid

    if str(tier) not in SPHERE_TIERS:
        raise DomainError(f"unknown sphere tier {tier!r}; choose from {sorted(SPHERE_TIERS)}")
    return sphere_grid(SPHERE_TIERS[str(tier)])


def cmd_solve_sphere(cfg):
    from . import taubes_sphere as ts

    grid = _sphere_grid(cfg["tier"])
    R = cfg["radius"]
    if cfg["eps"] is not None:
        sol = ts.solve_sphere(cfg["eps"], R, grid)
        th, u = ts.declination_profile(sol)
        out = {"eps_b": ts.sphere_eps_b(sol), "deps_b_deps": ts.sphere_deps_b_deps(sol),
               "h1_norm": ts.sphere_h1_norm(sol)}
        diag = {"iterations": sol.report.iterations, "residual": sol.report.final_residual_sup,
                "interface_mismatch": ts.interface_mismatch(sol), "sign_checks": ts.sign_checks(sol),
                "chart_swapped": sol.swapped, "grid_shape": list(grid.shape)}
        return envelope(cfg, out, diag), [("declination.csv", ["theta_over_pi", "hhat"], columns_to_rows(th, u))]
    if not 0 < cfg["eps_min"] < 1 or cfg["n_eps"] < 3:
        raise DomainError("sweep needs 0 < eps_min < 1 and n_eps >= 3")
    eps = np.geomspace(cfg["eps_min"], 1.0, cfg["n_eps"])
    tab = ts.sphere_table(eps, R, grid)
    A = ts.sphere_area_function(tab.eps, tab.eps_b, R)
    g0 = ts.centred_metric_sphere(tab)
    vol = ts.volume_s2_pairs(tab, cfg["fit_eps_max"])
    geo = ts.geodesic_length_to_collision(tab)
    out = {"volume_extrapolated": vol.volume, "volume_closed_form": vol.closed_form,
           "volume_relative_gap": vol.relative_gap, "eps_b_limit": vol.limit,
           "fit_power": vol.power, "geodesic_length": geo.length, "geodesic_tail_bound": geo.tail_bound}
    diag = {"max_iterations": int(tab.iterations.max()), "A_at_1": float(A[-1]),
            "A_strictly_decreasing": bool(np.all(np.diff(A) < 0)), "grid_shape": list(grid.shape)}
    rows = columns_to_rows(tab.eps, tab.eps_b, A, g0)
    return envelope(cfg, out, diag), [(f"sphere_R{R:g}.csv", ["epsilon", "eps_b", "A", "g0_coefficient"], rows)]


def cmd_single_vortex(cfg):
    from .pointvortex import extract_q, solve_radial_vortex

    prof = solve_radial_vortex(cfg["r_max"], cfg["n"])
    fit = extract_q(prof, (cfg["window_lo"], cfg["window_hi"]))
    out = {"q": fit.q, "c": fit.c, "relative_spread": fit.relative_spread}
    diag = {"iterations": prof.report.iterations, "residual": prof.report.final_residual_sup}
    return envelope(cfg, out, diag), [("vortex_profile.csv", ["r", "h"], columns_to_rows(prof.r[1:], prof.h[1:]))]


def _plane_table(cfg):
    from .taubes_plane import conformal_table_plane, tier_grid_args

    if not 0 < cfg["eps_min"] < cfg["eps_max"] or cfg["n_eps"] < 5:
        raise DomainError("need 0 < eps_min < eps_max and n_eps >= 5")
    eps = np.geomspace(cfg["eps_min"], cfg["eps_max"], cfg["n_eps"])
    return conformal_table_plane(eps, tier_grid_args(cfg["tier"]), cfg["workers"])


def cmd_conformal_factor(cfg):
    from .pointvortex import F_infinity, F_star

    t = _plane_table(cfg)
    rows = columns_to_rows(t.eps, t.b, t.bprime, t.F, t.Lambda, t.F_tangent, F_star(t.eps), F_infinity(t.eps))
    header = ["epsilon", "b", "bprime", "F", "Lambda", "F_tangent", "F_star", "F_infinity"]
    rel = np.abs(t.F - t.F_tangent) / t.F_tangent
    out = {"F_min": float(t.F_tangent.min()), "F_max": float(t.F_tangent.max()),
           "monotone_decreasing": bool(np.all(np.diff(t.F_tangent) < 0))}
    diag = {"max_iterations": int(t.iterations.max()), "max_residual": float(t.residuals.max()),
            "fd_vs_tangent_max_rel": float(rel.max())}
    return envelope(cfg, out, diag), [("conformal_factor.csv", header, rows)]


def _geometry_table(cfg):
    from .geometry import closed_form_table, hybrid_table
    from .pointvortex import F_star

    if cfg["source"] == "F_star":
        return closed_form_table(F_star, np.geomspace(1e-6, 2.0, 1301))
    if cfg["source"] != "numeric":
        raise DomainError("source must be 'numeric' or 'F_star'")
    t = _plane_table(cfg)
    return hybrid_table(t.eps, t.F_tangent)


def cmd_embed(cfg):
    from .geometry import embedding_curve

    tab = _geometry_table(cfg)
    curve = embedding_curve(tab)
    x, z, pts = curve.cross_section()
    out = {"embeddable": curve.embeddable, "inflexion_eps": curve.inflexion_eps,
           "cross_section_inflexions": [list(p) for p in pts]}
    diag = {"min_margin": curve.min_margin, "samples": int(tab.eps.size)}
    rows = columns_to_rows(curve.eps, curve.rho, curve.z)
    return envelope(cfg, out, diag), [("meridian.csv", ["epsilon", "rho", "z"], rows)]


def cmd_curvature(cfg):
    from .geometry import curvature_blowup_slope, gauss_curvature, total_gauss_curvature

    tab = _geometry_table(cfg)
    e, K = gauss_curvature(tab)
    tot = total_gauss_curvature(tab)
    out = {"total_direct": tot.direct, "boundary_low": tot.boundary_low, "boundary_high": tot.boundary_high,
           "gauss_bonnet_gap": tot.gauss_bonnet_gap,
           "blowup_slope_raw": curvature_blowup_slope(),
           "blowup_slope_log_compensated": curvature_blowup_slope(compensate_log=True)}
    diag = {"eps_range": [float(tab.eps[0]), float(tab.eps[-1])]}
    return envelope(cfg, out, diag), [("curvature.csv", ["epsilon", "K"], columns_to_rows(e, K))]


def _moduli(cfg):
    from .moduli_volume import ModuliParams

    _need(cfg, "area")
    return ModuliParams(cfg["genus"], cfg["area"], cfg["tau"], cfg["kplus"], cfg["kminus"], cfg["e"])


def _conjectural(p):
    return math.isinf(p.e) and not (p.g == 0 and p.k_plus == 1 and p.k_minus == 1)


def cmd_volume(cfg):
    from dataclasses import asdict

    from .moduli_volume import bradlow_check, glsm_volume, jk_coefficients, log_glsm_volume, log_p1_volume, p1_volume

    p = _moduli(cfg)
    verdict = bradlow_check(p)
    if not verdict.feasible:
        raise InfeasibleError(f"Bradlow bound violated ({verdict.violated})")
    if p.is_limit:
        lv = log_p1_volume(p)
        value = p1_volume(p) if lv < 709 else math.inf
    else:
        lv = log_glsm_volume(p)
        value = glsm_volume(p) if lv < 709 else math.inf
    out = {"value": value, "log_value": lv, "jk": asdict(jk_coefficients(p))}
    return envelope(cfg, out, {"bradlow": asdict(verdict)}, _conjectural(p)), []


def cmd_scal(cfg):
    from dataclasses import asdict

    from .moduli_volume import bradlow_check, glsm_total_scal, glsm_total_scal_as_printed, jk_coefficients, p1_total_scal

    p = _moduli(cfg)
    verdict = bradlow_check(p)
    if not verdict.feasible:
        raise InfeasibleError(f"Bradlow bound violated ({verdict.violated})")
    value = p1_total_scal(p) if p.is_limit else glsm_total_scal(p)
    diag = {"bradlow": asdict(verdict)}
    if p.k_plus >= p.k_minus > max(2 * p.g - 2, 0):
        diag["alternative_closed_form"] = glsm_total_scal_as_printed(p)
    out = {"value": value, "jk": asdict(jk_coefficients(p))}
    return envelope(cfg, out, diag, _conjectural(p)), []


def cmd_thermo(cfg):
    import warnings

    from . import thermo as th

    _need(cfg, "kplus", "kminus", "area")
    s = th.GasState(cfg["kplus"], cfg["kminus"], cfg["area"], cfg["temperature"], cfg["tau"],
                    cfg["genus"], cfg["boltzmann"], cfg["hbar"])
    out = {"log_partition": th.log_partition(s), "free_energy_exact": th.free_energy(s, "exact"),
           "entropy_exact": th.entropy(s, "exact"), "pressure_exact": th.pressure(s, "exact"),
           "pressure_limit": th.pressure(s, "limit")}
    diag = {}
    if s.k_plus and s.k_minus:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            out["free_energy_asymptotic"] = th.free_energy(s, "asymptotic")
        if caught:
            diag["warning"] = str(caught[0].message)
        out["entropy_with_genus"] = th.entropy(s, "with_genus")
        out["entropy_plain"] = th.entropy(s, "plain")
        out["pressure_full"] = th.pressure(s, "full")
        try:
            mix = th.entropy_of_mixing(s)
            out.update({"delta_S_mix": mix.delta_S, "delta_S_ideal": mix.delta_S_ideal,
                        "V_plus": mix.V_plus, "V_minus": mix.V_minus})
        except InfeasibleError as exc:
            diag["mixing"] = str(exc)
    return envelope(cfg, out, diag, True), []


def cmd_virial(cfg):
    from .thermo import virial_coefficients

    tab = virial_coefficients(cfg["order"])
    rows = [(a, b, t.value(cfg["tau"]), t.symbolic()) for (a, b), t in sorted(tab.items())]
    header = ["a", "b", "coefficient_numeric", "coefficient_symbolic"]
    out = {"terms": len(rows)}
    return envelope(cfg, out, {}), [("virial.csv", header, rows)]


def cmd_verify(cfg):
    from .selfcheck import run_checks

    results = run_checks(quick=cfg["quick"])
    passed = sum(r["passed"] for r in results)
    out = {"passed": passed, "failed": len(results) - passed, "checks": results}
    return envelope(cfg, out, {}), []


HANDLERS = {
    "solve-plane": cmd_solve_plane,
    "solve-sphere": cmd_solve_sphere,
    "single-vortex": cmd_single_vortex,
    "conformal-factor": cmd_conformal_factor,
    "embed": cmd_embed,
    "curvature": cmd_curvature,
    "volume": cmd_volume,
    "scal": cmd_scal,
    "thermo": cmd_thermo,
    "virial": cmd_virial,
    "verify": cmd_verify,
}


def _emit_error(kind, message, code):
    sys.stderr.write(json.dumps({"error": kind, "message": str(message), "exit_code": code}, sort_keys=True) + "\n")
    return code


def run(argv=None, stdout=None):
    """Execute one command; returns the process exit code."""
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve(args)
        env, tables = HANDLERS[args.command](cfg)
    except UsageError as exc:
        return _emit_error("usage", exc, EXIT_USAGE)
    except InfeasibleError as exc:
        return _emit_error("infeasible", exc, EXIT_INFEASIBLE)
    except (ConvergenceError, SingularSystemError) as exc:
        return _emit_error("solver", exc, EXIT_SOLVER)
    except (DomainError, OverflowError) as exc:
        return _emit_error("parameter", exc, EXIT_USAGE)
    env["inputs"] = {k: v for k, v in env["inputs"].items() if k not in ("out", "format")}
    env["inputs"]["command"] = args.command
    body = json_text(env)
    if cfg["format"] == "csv" and tables:
        _name, header, rows = tables[0]
        stdout.write(csv_text(header, rows))
    else:
        stdout.write(body)
    if cfg["out"]:
        files = {f"{args.command}.json": body}
        files.update({name: csv_text(header, rows) for name, header, rows in tables})
        info = {"command": args.command, "inputs": env["inputs"], "version": __version__, "backend": BACKEND}
        write_outputs(cfg["out"], files, info)
    if args.command == "verify" and env["outputs"]["failed"]:
        return EXIT_SOLVER
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
