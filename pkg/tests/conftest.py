"""Shared fixtures: expensive solver sweeps are computed once per session."""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

ACCEPTANCE_LINES = {}


def record_acceptance(number, passed, detail):
    ACCEPTANCE_LINES[number] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        ok, detail = ACCEPTANCE_LINES[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def radial_profile():
    from vortexpairs.pointvortex import solve_radial_vortex

    return solve_radial_vortex()


@pytest.fixture(scope="session")
def plane_table():
    """30-point plane sweep on [0.02, 5] at the 100 tier."""
    from vortexpairs.taubes_plane import conformal_table_plane, tier_grid_args

    return conformal_table_plane(np.geomspace(0.02, 5.0, 30), tier_grid_args("100"))


@pytest.fixture(scope="session")
def numeric_hybrid(plane_table):
    from vortexpairs.geometry import hybrid_table

    m = (plane_table.eps >= 0.05) & (plane_table.eps <= 3.0)
    return hybrid_table(plane_table.eps[m], plane_table.F_tangent[m])


@pytest.fixture(scope="session")
def sphere_tables():
    from vortexpairs.taubes_sphere import sphere_table

    eps = np.geomspace(0.01, 1.0, 40)
    return {R: sphere_table(eps, R) for R in (1.0, 2.0)}


@pytest.fixture(scope="session")
def sphere_eps1():
    from vortexpairs.taubes_sphere import solve_sphere, sphere_grid

    return solve_sphere(1.0, 1.0, sphere_grid(50))
