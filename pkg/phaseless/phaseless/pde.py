"""
Second-order finite-difference Dirichlet solvers on the Omega grid.

    diffusion * Laplace(q) + drift_scale * drift . grad(q) = rhs   in the interior
    q = boundary                                                   on the boundary faces

The operator is assembled on all nodes in C order of (n1, n2, n3); boundary columns move
to the right-hand side. Small systems are factorized directly, larger ones are solved by
ILU-preconditioned GMRES.
"""

import logging
from collections import namedtuple
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as ssp
from scipy.sparse.linalg import LinearOperator, gmres, spilu, splu

from .errors import InvalidInput, SolverFailure
from .grid import ComplexField3
from .util import setting

logger = logging.getLogger("rainbow")

PDE_TOLERANCE = 1e-8
PECLET_WARNING = 2.0

SolveReport = namedtuple('SolveReport', ['iterations', 'residual', 'converged', 'peclet'], defaults=(None,))


@dataclass(frozen=True)
class DirichletProblem:
    grid: object
    diffusion: float
    rhs: np.ndarray
    boundary: np.ndarray
    drift: tuple = None
    drift_scale: float = 1.0
    upwind: bool = False

    def __post_init__(self):
        if not self.diffusion > 0:
            raise InvalidInput('diffusion coefficient must be > 0, got %r' % (self.diffusion,))
        for name in ('rhs', 'boundary'):
            array = getattr(self, name)
            if np.shape(array) != self.grid.shape:
                raise InvalidInput('%s has shape %s, grid is %s' % (name, np.shape(array), self.grid.shape))
            if not np.all(np.isfinite(array)):
                raise InvalidInput('%s holds non-finite values' % name)
        if self.drift is not None:
            if len(self.drift) != 3 or any(np.shape(d) != self.grid.shape for d in self.drift):
                raise InvalidInput('drift must be three fields on the grid')
            if not all(np.all(np.isfinite(d)) for d in self.drift):
                raise InvalidInput('drift holds non-finite values')


def _second_difference(n, h):
    main = np.full(n, -2.0)
    off = np.ones(n - 1)
    d2 = ssp.diags([off, main, off], [-1, 0, 1], format='lil')
    d2[0, :] = 0
    d2[n - 1, :] = 0
    return (d2 / (h * h)).tocsr()


def _first_difference(n, h, kind='centered'):
    if kind == 'centered':
        d1 = ssp.diags([-np.ones(n - 1), np.ones(n - 1)], [-1, 1], format='lil') / (2.0 * h)
    elif kind == 'forward':
        d1 = ssp.diags([-np.ones(n), np.ones(n - 1)], [0, 1], format='lil') / h
    else:
        d1 = ssp.diags([-np.ones(n - 1), np.ones(n)], [-1, 0], format='lil') / h
    d1 = d1.tolil()
    d1[0, :] = 0
    d1[n - 1, :] = 0
    return d1.tocsr()


def _lift(matrix, axis, shape):
    "1D operator along one axis of the C-ordered grid"
    factors = [ssp.identity(n, format='csr') for n in shape]
    factors[axis] = matrix
    return ssp.kron(ssp.kron(factors[0], factors[1]), factors[2], format='csr')


@lru_cache(maxsize=8)
def _laplacian(grid):
    return sum(_lift(_second_difference(n, h), a, grid.shape)
               for a, (n, h) in enumerate(zip(grid.shape, grid.spacings))).tocsr()


@lru_cache(maxsize=8)
def _gradient(grid, kind='centered'):
    return tuple(_lift(_first_difference(n, h, kind), a, grid.shape)
                 for a, (n, h) in enumerate(zip(grid.shape, grid.spacings)))


@lru_cache(maxsize=8)
def _partition(grid):
    boundary = grid.boundary_mask().ravel()
    return np.flatnonzero(~boundary), np.flatnonzero(boundary)


def assemble(problem):
    "full-grid sparse operator of the problem"
    grid = problem.grid
    operator = problem.diffusion * _laplacian(grid)
    if problem.drift is not None:
        b = [problem.drift_scale * np.asarray(d, dtype=complex).ravel() for d in problem.drift]
        if problem.upwind:
            forward, backward = _gradient(grid, 'forward'), _gradient(grid, 'backward')
            for a in range(3):
                ahead = np.where(b[a].real >= 0, b[a], 0.0)
                behind = np.where(b[a].real < 0, b[a], 0.0)
                operator = operator + ssp.diags(ahead) @ forward[a] + ssp.diags(behind) @ backward[a]
        else:
            for a, g in enumerate(_gradient(grid)):
                operator = operator + ssp.diags(b[a]) @ g
    return operator.tocsr()


def peclet_number(problem):
    if problem.drift is None:
        return 0.0
    return max(
        float(np.max(np.abs(problem.drift_scale * d))) * h / (2.0 * problem.diffusion)
        for d, h in zip(problem.drift, problem.grid.spacings))


def _relative_residual(rows, problem, q):
    interior, boundary = _partition(problem.grid)
    q = np.asarray(q, dtype=complex).ravel()
    target = np.asarray(problem.rhs, dtype=complex).ravel()[interior]
    mismatch = np.linalg.norm(rows @ q - target)
    scale = np.linalg.norm(target - rows[:, boundary] @ q[boundary])
    return float(mismatch / scale) if scale > 0 else float(mismatch)


def residual(problem, q):
    """
    Residual of a full-grid field under the assembled interior equations, relative to the
    right-hand side of the reduced system (absolute when that vanishes).
    """
    interior, _ = _partition(problem.grid)
    return _relative_residual(assemble(problem)[interior], problem, q)


class _Factorized:
    "solver for one interior matrix: sparse LU when small, ILU-preconditioned GMRES otherwise"

    def __init__(self, matrix):
        self.matrix = matrix.tocsc().astype(complex)
        self.direct = matrix.shape[0] <= setting('PHASELESS_PDE_DIRECT_LIMIT')
        try:
            if self.direct:
                self.lu = splu(self.matrix)
            else:
                ilu = spilu(self.matrix, drop_tol=1e-4, fill_factor=4)
                self.preconditioner = LinearOperator(self.matrix.shape, ilu.solve, dtype=complex)
        except RuntimeError as e:
            raise SolverFailure('singular assembly: %s' % e, stage='pde')

    def solve(self, rhs):
        if self.direct:
            return self.lu.solve(rhs), 1
        iterations = [0]

        def count(_residual):
            iterations[0] += 1

        x, info = gmres(self.matrix, rhs, M=self.preconditioner, rtol=0.1 * PDE_TOLERANCE, atol=0.0,
                        restart=50, maxiter=40, callback=count, callback_type='pr_norm')
        if info < 0:
            raise SolverFailure('GMRES breakdown (info=%d)' % info, stage='pde')
        return x, iterations[0]


@lru_cache(maxsize=4)
def _laplace_system(grid):
    interior, _ = _partition(grid)
    rows = _laplacian(grid)[interior].tocsc()
    return rows.tocsr(), _Factorized(rows[:, interior])


def _solve(problem, rows, solver):
    interior, boundary = _partition(problem.grid)
    g = np.asarray(problem.boundary, dtype=complex).ravel()
    rhs = np.asarray(problem.rhs, dtype=complex).ravel()[interior] - rows[:, boundary] @ g[boundary]
    if not np.any(rhs):
        x, iterations = np.zeros(interior.size, dtype=complex), 0
    else:
        x, iterations = solver.solve(rhs)
    if not np.all(np.isfinite(x)):
        raise SolverFailure('non-finite solution', stage='pde')
    q = g.copy()
    q[interior] = x
    r = _relative_residual(rows, problem, q)
    converged = r <= PDE_TOLERANCE
    if not converged:
        logger.warning('Dirichlet solve did not reach %.0e: residual %.2e after %d iterations' % (
            PDE_TOLERANCE, r, iterations))
    return ComplexField3(problem.grid, q.reshape(problem.grid.shape)), r, iterations, converged


def solve_laplace(grid, boundary):
    "discrete harmonic extension of the boundary values of a full-grid array"
    problem = DirichletProblem(grid, 1.0, np.zeros(grid.shape), np.asarray(boundary))
    rows, solver = _laplace_system(grid)
    q, r, iterations, converged = _solve(problem, rows, solver)
    return q, SolveReport(iterations, r, converged, 0.0)


def solve_drift(problem):
    peclet = peclet_number(problem)
    if peclet > PECLET_WARNING:
        logger.warning('cell Peclet number %.2f exceeds %.1f; centered differences may oscillate%s' % (
            peclet, PECLET_WARNING, '' if problem.upwind else ' (upwinding is off)'))
    interior, _ = _partition(problem.grid)
    rows = assemble(problem)[interior]
    solver = _Factorized(rows[:, interior])
    q, r, iterations, converged = _solve(problem, rows, solver)
    return q, SolveReport(iterations, r, converged, peclet)
