"""
Comparisons of the volume solver against closed-form references: the first Born
approximation for a weak smooth bump and the partial-wave series for a homogeneous sphere.
"""

import logging
from collections import namedtuple

import numpy as np

from .forward import SolverSettings, born_reference, evaluate_exterior, mie_reference, solve_ls
from .grid import PlaneGrid, make_grid
from .phantom import MicrosphereSpec, PhantomSpec, build_refractive_field, homogeneous_sphere_field

logger = logging.getLogger("rainbow")

OracleRow = namedtuple('OracleRow', ['case', 'k', 'ppw', 'spacing', 'error', 'iterations'])

ORACLE_PLANE = PlaneGrid(3.0, 2.0, (21, 21))


def _relative(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def born_rows(k=5.0, amplitude=1e-3, radius=1.0, ppws=(10.0, 20.0), plane=ORACLE_PLANE):
    """
    ||u_LS - u_Born|| / ||u_Born - u_inc|| on an exterior plane for a weak bump,
    at each resolution of ppws.
    """
    bbox = (-1.2 * radius, 1.2 * radius) * 3
    phantom = PhantomSpec((MicrosphereSpec((0.0, 0.0, 0.0), radius, amplitude),))
    u_inc = np.exp(1j * k * plane.z)
    rows = []
    for ppw in ppws:
        grid = make_grid(bbox, ppw, k)
        n2 = build_refractive_field(phantom, grid)
        solution = solve_ls(n2, k, SolverSettings(tol=1e-10, points_per_wavelength=ppw))
        u_ls = evaluate_exterior(solution, n2, plane).at(k)
        u_born = born_reference(n2, k, plane).at(k)
        error = float(np.linalg.norm(u_ls - u_born) / np.linalg.norm(u_born - u_inc))
        rows.append(OracleRow('born', k, ppw, max(grid.spacings), error, solution.iterations))
        logger.info('born oracle ppw=%g: %.3e' % (ppw, error))
    return rows


def mie_rows(k=5.0, radius=1.0, n_inside=1.2, ppws=(12.0,), plane=ORACLE_PLANE):
    "relative L2 error of the total field against the partial-wave series on an exterior plane"
    bbox = (-1.2 * radius, 1.2 * radius) * 3
    x1, x2 = plane.meshgrid()
    points = np.stack([x1, x2, np.full(x1.shape, plane.z)], axis=-1)
    reference = mie_reference(radius, n_inside, k, points).values
    rows = []
    for ppw in ppws:
        grid = make_grid(bbox, ppw, k * n_inside)
        n2 = homogeneous_sphere_field(radius, n_inside, grid)
        solution = solve_ls(n2, k, SolverSettings(tol=1e-8, points_per_wavelength=ppw))
        u_ls = evaluate_exterior(solution, n2, plane).at(k)
        error = _relative(u_ls, reference)
        rows.append(OracleRow('mie', k, ppw, max(grid.spacings), error, solution.iterations))
        logger.info('mie oracle ppw=%g: %.3e' % (ppw, error))
    return rows


def format_rows(rows):
    lines = ['%-5s %8s %8s %10s %12s %10s' % ('case', 'k', 'ppw', 'spacing', 'rel_error', 'iterations')]
    for row in rows:
        lines.append('%-5s %8.3f %8.2f %10.5f %12.4e %10d' % row)
    return '\n'.join(lines)
