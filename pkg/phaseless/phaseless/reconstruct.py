"""
Reconstruction of n^2 from phased boundary data by the globally convergent iteration.

The tail gradient grad V is seeded from the boundary data at k_bar. For every
wavenumber k_n of the descending partition, q_n is solved from the elliptic problem

    (k_n/2) Laplace(q) + k_n (-grad Q_{n-1}) . grad(q)
        = -div grad Q_{n-1} + div grad V + (-grad Q_{n-1} + grad V)^2 - k_n grad q_{n,i-1} . grad V

where grad Q_{n-1} = h (grad q_0 + ... + grad q_{n-1}). The inner iterations update
grad v = grad V - h grad q_n - h (grad q_1 + ... + grad q_{n-1}), the coefficient c and,
through a Lippmann-Schwinger solve at k_bar with the current c, the tail gradient.
"""

import json
import logging
import math
from collections import namedtuple
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter

from .errors import InvalidInput, NumericalFailure, PhaselessError
from .forward import SolverSettings, solve_ls
from .grid import RealField3
from .libs.constants import BACKGROUND_INDEX, C_MAX, INNER_ITERATIONS, MODULUS_FLOOR, STOPPING_WINDOW_START
from .pde import DirichletProblem, solve_drift, solve_laplace
from .phase import interpolate_in_k, retrieve_phased
from .propagate import complement, propagate_to_boundary

logger = logging.getLogger("rainbow")

Geometry = namedtuple('Geometry', ['grid', 'partition'])
TailGradient = namedtuple('TailGradient', ['grad_V', 'reports'])
CUpdate = namedtuple('CUpdate', ['c', 'c_raw', 'imag_max', 'clamped_fraction'])

# c_raw within this distance of [1, c_max] counts as unclamped
CLAMP_ROUNDING = 1e-9


@dataclass(frozen=True)
class AlgorithmSettings:
    inner_iterations: int = INNER_ITERATIONS
    c_max: float = C_MAX
    epsilon: float = None
    window_start: int = STOPPING_WINDOW_START
    n0: float = BACKGROUND_INDEX
    pad: int = 2
    upwind: bool = False
    verify_accumulator: bool = False
    solver: SolverSettings = field(default_factory=lambda: SolverSettings(points_per_wavelength=6.0))

    def __post_init__(self):
        if int(self.inner_iterations) < 1:
            raise InvalidInput('inner iterations must be >= 1')
        if not self.c_max > 1:
            raise InvalidInput('c_max must be > 1, got %r' % (self.c_max,))
        if self.epsilon is not None and not self.epsilon > 0:
            raise InvalidInput('epsilon must be > 0')
        if int(self.window_start) < 1:
            raise InvalidInput('stopping window must start at n >= 1')

    def check_partition(self, partition):
        if partition.N < 3:
            raise InvalidInput('the partition needs N >= 3 intervals, got %d' % partition.N)
        if self.window_start > partition.N:
            raise InvalidInput('stopping window start %d exceeds N=%d' % (self.window_start, partition.N))


class IterState:
    """
    Mutable state of the outer loop. grad_Q holds h * (grad q_0 + ... + grad q_m) and drives
    the elliptic solve; grad_Q_outer leaves out the tail seed h * grad q_0 and enters the
    update of grad v.
    """

    def __init__(self, grad_q0, grad_V, h, keep_terms=False):
        self.m = 0
        self.h = h
        self.grad_q = grad_q0
        self.grad_Q = tuple(h * g for g in grad_q0)
        self.grad_Q_outer = tuple(np.zeros_like(g) for g in grad_q0)
        self.grad_V = grad_V
        self.c = None
        self._terms = [grad_q0] if keep_terms else None

    def accumulate(self, grad_q):
        self.m += 1
        self.grad_q = grad_q
        self.grad_Q = tuple(Q + self.h * g for Q, g in zip(self.grad_Q, grad_q))
        self.grad_Q_outer = tuple(Q + self.h * g for Q, g in zip(self.grad_Q_outer, grad_q))
        if self._terms is not None:
            self._terms.append(grad_q)

    def accumulator_mismatch(self):
        "relative difference between the running grad Q and a fresh re-summation"
        if self._terms is None:
            return None
        fresh = [self.h * np.sum([t[a] for t in self._terms], axis=0) for a in range(3)]
        scale = max(max(np.max(np.abs(f)) for f in fresh), 1e-300)
        return max(float(np.max(np.abs(f - Q))) for f, Q in zip(fresh, self.grad_Q)) / scale


@dataclass
class ReconstructionResult:
    c: RealField3
    n_rel: RealField3
    n_comp_rel: float
    n_comp: float
    history: list
    n_star: int
    maximum_at: tuple
    maxima: list = field(default_factory=list)

    def summary(self):
        return {
            'n_star': self.n_star,
            'n_comp_rel': self.n_comp_rel,
            'n_comp': self.n_comp,
            'history': [{'n': n, 'relative_change': v} for n, v in enumerate(self.history, start=1)],
            'maximum_at': list(self.maximum_at),
            'maxima': [{'at': list(p), 'c': v} for p, v in self.maxima],
        }


class IterationLog:
    "JSON-lines record of every inner iterate"

    def __init__(self, path=None):
        self.path = path
        self.entries = []
        self._fd = None

    def __enter__(self):
        if self.path:
            self._fd = open(self.path, 'w')
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        if self._fd:
            self._fd.close()
            self._fd = None

    def record(self, **entry):
        self.entries.append(entry)
        if self._fd:
            self._fd.write(json.dumps(entry, sort_keys=True) + '\n')
            self._fd.flush()


@contextmanager
def stage(name):
    try:
        yield
    except NumericalFailure as e:
        if e.stage is None:
            e.stage = name
        logger.error('stage %s failed: %s' % (name, e))
        raise
    except PhaselessError as e:
        logger.error('stage %s failed: %s' % (name, e))
        raise
    except (ArithmeticError, ValueError, RuntimeError, np.linalg.LinAlgError) as e:
        logger.error('stage %s failed: %s' % (name, e))
        raise NumericalFailure(str(e), stage=name) from e


def gradient(values, grid):
    return tuple(np.gradient(values, *grid.spacings, edge_order=2))


def divergence(vector, grid):
    return sum(np.gradient(vector[a], grid.spacings[a], axis=a, edge_order=2) for a in range(3))


def _floor_modulus(p):
    p = np.asarray(p, dtype=complex)
    small = np.abs(p) < MODULUS_FLOOR
    if np.any(small):
        p = p.copy()
        phase = np.exp(1j * np.angle(p[small]))
        p[small] = MODULUS_FLOOR * phase
    return p


def _log_ratio_difference(u, spacing, axis):
    "d log u along axis: centered log-ratios inside, one-sided at the two ends"
    u = np.moveaxis(u, axis, 0)
    out = np.empty(u.shape, dtype=complex)
    out[1:-1] = np.log(u[2:] / u[:-2]) / (2.0 * spacing)
    out[0] = np.log(u[1] / u[0]) / spacing
    out[-1] = np.log(u[-1] / u[-2]) / spacing
    return np.moveaxis(out, 0, axis)


def log_gradient(u, grid):
    "grad u / u through log-ratios of neighbours, with |u| floored"
    u = _floor_modulus(u)
    return tuple(_log_ratio_difference(u, grid.spacings[a], a) for a in range(3))


def boundary_vector(p, p1, k_bar, grid, epsilon):
    """
    Boundary values of grad V: on Gamma the tangential log-derivatives of p and the
    normal one log(1 + eps p1 / p) / eps; (0, 0, i k_bar) on the other faces.
    Returns three full-grid arrays whose boundary nodes carry the data.
    """
    p = _floor_modulus(p)
    p1 = np.asarray(p1, dtype=complex)
    components = []
    for a in range(3):
        values = np.zeros(grid.shape, dtype=complex)
        values[grid.boundary_mask()] = 1j * k_bar if a == 2 else 0.0
        components.append(values)
    h1, h2, _ = grid.spacings
    r1 = np.log(p[2:, 1:-1] / p[:-2, 1:-1]) / (2.0 * h1)
    r2 = np.log(p[1:-1, 2:] / p[1:-1, :-2]) / (2.0 * h2)
    inner = p[1:-1, 1:-1]
    r3 = np.log(_floor_modulus(1.0 + epsilon * p1[1:-1, 1:-1] / inner)) / epsilon
    components[0][1:-1, 1:-1, -1] = r1
    components[1][1:-1, 1:-1, -1] = r2
    components[2][1:-1, 1:-1, -1] = r3
    return tuple(components)


def init_tail(vector, k_bar, grid):
    "three Laplace solves give grad V_0; grad q_0 = grad V_0 / k_bar"
    fields, reports = [], []
    for component in vector:
        solved, report = solve_laplace(grid, component)
        fields.append(np.array(solved.values))
        reports.append(report)
    grad_V = tuple(fields)
    grad_q0 = tuple(g / k_bar for g in grad_V)
    return TailGradient(grad_V, reports), grad_q0


def _log_ratio(a, b):
    return np.log(_floor_modulus(a) / _floor_modulus(b))


def q_boundary(complemented, n, partition):
    """
    Boundary values of q_n = d log p~ / dk at k_n: centered log-ratio differences in k on
    Gamma (one-sided at the band ends) and the exact i x3 on the other faces.
    """
    k = partition.k_values
    h = partition.h
    grid = complemented.grid
    if 0 < n < partition.N:
        q = _log_ratio(complemented.at(k[n - 1]), complemented.at(k[n + 1])) / (2.0 * h)
    elif n == 0:
        q = _log_ratio(complemented.at(k[0]), complemented.at(k[1])) / h
    else:
        q = _log_ratio(complemented.at(k[n - 1]), complemented.at(k[n])) / h
    out = np.zeros(grid.shape, dtype=complex)
    x3 = np.broadcast_to(grid.axis(2)[None, None, :], grid.shape)
    boundary = grid.boundary_mask()
    out[boundary] = 1j * x3[boundary]
    gamma = grid.gamma_mask()
    out[gamma] = q[gamma]
    return out


def assemble_and_solve_q(state, k_n, boundary, grid, upwind=False):
    "one elliptic solve for q_{n,i}; returns q, its gradient and the solve report"
    grad_Q, grad_V, grad_q_prev = state.grad_Q, state.grad_V, state.grad_q
    w = [gV - gQ for gV, gQ in zip(grad_V, grad_Q)]
    rhs = -divergence(grad_Q, grid) + divergence(grad_V, grid) \
        + sum(c * c for c in w) \
        - k_n * sum(gq * gV for gq, gV in zip(grad_q_prev, grad_V))
    problem = DirichletProblem(grid, k_n / 2.0, rhs, boundary,
                               drift=tuple(-gQ for gQ in grad_Q), drift_scale=k_n, upwind=upwind)
    q, report = solve_drift(problem)
    return q, gradient(q.values, grid), report


def update_v_gradient(grad_q, grad_Q, grad_V, h):
    return tuple(-(h * gq + gQ) + gV for gq, gQ, gV in zip(grad_q, grad_Q, grad_V))


def compute_c(grad_v, k_n, grid, c_max=C_MAX):
    """
    c = -(div grad v + grad v . grad v) / k_n^2, real part clamped to [1, c_max].
    """
    c_raw = -(divergence(grad_v, grid) + sum(g * g for g in grad_v)) / (k_n * k_n)
    if not np.all(np.isfinite(c_raw)):
        raise NumericalFailure('non-finite coefficient at k=%g' % k_n, stage='iterate')
    c = np.clip(c_raw.real, 1.0, c_max)
    clamped = float(np.mean((c_raw.real < 1.0 - CLAMP_ROUNDING) | (c_raw.real > c_max + CLAMP_ROUNDING)))
    imag_max = float(np.max(np.abs(c_raw.imag)))
    return CUpdate(c, c_raw, imag_max, clamped)


def _l2(values, grid):
    return math.sqrt(float(np.sum(np.abs(values) ** 2)) * float(np.prod(grid.spacings)))


def locate_maxima(c, count=None, threshold=1e-3, min_separation=0.5):
    """
    Local maxima of c above 1 + threshold, strongest first, at least min_separation apart.
    """
    values = c.values
    mesh = c.grid.meshgrid()
    peaks = (values == maximum_filter(values, size=3, mode='nearest')) & (values > 1.0 + threshold)
    order = np.argsort(values[peaks])[::-1]
    points = np.stack([m[peaks] for m in mesh], axis=-1)[order]
    heights = values[peaks][order]
    chosen = []
    for point, height in zip(points, heights):
        if all(math.dist(point, other) >= min_separation for other, _ in chosen):
            chosen.append((tuple(float(x) for x in point), float(height)))
        if count is not None and len(chosen) >= count:
            break
    return chosen


def run_phased(phased, geometry, settings=None, log=None):
    """
    Reconstruction from phased data on the measurement plane: propagation, complement,
    tail, the outer/inner iteration and the stopping rule.
    """
    settings = settings or AlgorithmSettings()
    grid, partition = geometry
    settings.check_partition(partition)
    log = log or IterationLog()
    k_values = partition.k_values
    k_bar, h = partition.k_bar, partition.h
    epsilon = settings.epsilon or grid.spacings[0]
    if not k_bar * epsilon < math.pi:
        raise InvalidInput('epsilon %g is too large for k_bar=%g: k_bar * epsilon must stay below pi'
                           % (epsilon, k_bar))

    with stage('propagate'):
        boundary = propagate_to_boundary(phased, grid, epsilon, settings.pad, settings.solver.workers)
        complemented = complement(boundary)

    with stage('tail'):
        vector = boundary_vector(boundary.at(k_bar), boundary.p1, k_bar, grid, epsilon)
        tail, grad_q0 = init_tail(vector, k_bar, grid)
        for report in tail.reports:
            if not report.converged:
                logger.warning('tail Laplace solve residual %.2e' % report.residual)

    state = IterState(grad_q0, tail.grad_V, h, keep_terms=settings.verify_accumulator)
    c_previous = np.ones(grid.shape)
    c_history = [c_previous]
    history = [None]
    vacuum_gradient = 1j * k_bar

    with stage('iterate'):
        for n in range(1, partition.N + 1):
            k_n = k_values[n]
            q_bc = q_boundary(complemented, n, partition)
            for i in range(1, settings.inner_iterations + 1):
                q, grad_q, pde_report = assemble_and_solve_q(state, k_n, q_bc, grid, settings.upwind)
                grad_v = update_v_gradient(grad_q, state.grad_Q_outer, state.grad_V, h)
                update = compute_c(grad_v, k_n, grid, settings.c_max)
                solution = solve_ls(RealField3(grid, update.c), k_bar, settings.solver)
                u = solution.u.values
                state.grad_V = log_gradient(u, grid)
                state.grad_q = grad_q
                state.c = update.c
                if not all(np.all(np.isfinite(g)) for g in state.grad_V):
                    raise NumericalFailure('non-finite tail gradient at n=%d, i=%d' % (n, i))
                log.record(
                    n=n, i=i, k=k_n,
                    pde_residual=pde_report.residual, pde_iterations=pde_report.iterations,
                    pde_converged=pde_report.converged, peclet=pde_report.peclet,
                    ls_residual=solution.residual, ls_iterations=solution.iterations,
                    ls_converged=solution.converged,
                    c_imag_max=update.imag_max, c_clamped_fraction=update.clamped_fraction,
                    c_raw_min=float(np.min(update.c_raw.real)), c_raw_max=float(np.max(update.c_raw.real)),
                    c_minus_one_max=float(np.max(update.c - 1.0)),
                    grad_v_deviation=float(max(
                        np.max(np.abs(state.grad_V[0])), np.max(np.abs(state.grad_V[1])),
                        np.max(np.abs(state.grad_V[2] - vacuum_gradient)))),
                    n_comp_rel=float(np.sqrt(np.max(update.c))))
            state.accumulate(state.grad_q)
            mismatch = state.accumulator_mismatch()
            if mismatch is not None and mismatch > 1e-12:
                logger.warning('accumulated grad Q drifted from its re-summation by %.2e' % mismatch)
            change = _l2(c_previous - state.c, grid) / _l2(state.c, grid)
            history.append(change)
            c_history.append(state.c)
            c_previous = state.c
            log.record(n=n, relative_change=change, accumulator_mismatch=mismatch)
            logger.info('n=%d k=%.4f relative change %.3e, max c %.4f' % (n, k_n, change, np.max(state.c)))

    with stage('select'):
        window = range(settings.window_start, partition.N + 1)
        n_star = min(window, key=lambda m: (history[m], m))
        c = RealField3(grid, c_history[n_star])
        n_rel = RealField3(grid, np.sqrt(c.values))
        n_comp_rel = float(np.max(n_rel.values))
        index = np.unravel_index(int(np.argmax(c.values)), grid.shape)
        axes = grid.axes()
        maximum_at = tuple(float(axes[a][index[a]]) for a in range(3))
        result = ReconstructionResult(
            c=c, n_rel=n_rel, n_comp_rel=n_comp_rel, n_comp=settings.n0 * n_comp_rel,
            history=history[1:], n_star=n_star, maximum_at=maximum_at, maxima=locate_maxima(c))
    logger.info('n*=%d, n_comp=%.4f (relative %.4f) at %s' % (n_star, result.n_comp, n_comp_rel, maximum_at))
    return result


def run(intensity, geometry, settings=None, log=None):
    "full reconstruction from intensity data: phase retrieval, then run_phased"
    with stage('retrieve'):
        held = intensity.k_values
        if not all(np.any(np.isclose(held, k, rtol=1e-12, atol=0.0)) for k in geometry.partition.k_values):
            intensity = interpolate_in_k(intensity, geometry.partition)
        phased = retrieve_phased(intensity)
    return run_phased(phased, geometry, settings, log)
