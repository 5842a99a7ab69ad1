"""
Forward scattering: the Lippmann-Schwinger equation

    u = u_inc + k^2 G_k[(n^2 - 1) u],    G_k(r) = exp(ikr) / (4 pi r)

discretized by the trapezoidal rule on the grid nodes, with the singular self cell
replaced by the kernel integral over a ball of the same volume. The linear convolution
over the contrast support is evaluated exactly by FFT on a doubled cell and the system
is solved by restarted GMRES.
"""

import logging
import math
from collections import namedtuple
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import scipy.fft
from scipy.sparse.linalg import LinearOperator, gmres
from scipy.special import eval_legendre, spherical_jn, spherical_yn

from .errors import InvalidInput, NumericalFailure, ResolutionError
from .grid import ComplexField3, ComplexPlaneData
from .util import setting

logger = logging.getLogger("rainbow")

MieResult = namedtuple('MieResult', ['values', 'order', 'tail'])
PhiSample = namedtuple('PhiSample', ['k', 'phi', 'bound'])


def incident(x, k):
    "the plane wave exp(i k x3); x may be a (..., 3) array"
    x = np.asarray(x, dtype=np.float64)
    value = np.exp(1j * k * x[..., 2])
    return complex(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-6
    maxiter: int = 500
    points_per_wavelength: float = 10.0
    restart: int = 30
    workers: int = None

    def __post_init__(self):
        if not 0 < self.tol < 1:
            raise InvalidInput('solver tolerance must lie in (0, 1), got %r' % (self.tol,))
        if int(self.maxiter) < 1:
            raise InvalidInput('solver needs at least one iteration')
        if self.points_per_wavelength < 2:
            raise InvalidInput('points per wavelength must be >= 2')


def _self_term(k, volume):
    "integral of exp(ikr)/(4 pi r) over the ball of the given volume"
    a = (3.0 * volume / (4.0 * math.pi)) ** (1.0 / 3.0)
    ka = k * a
    if ka < 1e-4:
        return a * a / 2.0 + 1j * k * a ** 3 / 3.0
    return (np.exp(1j * ka) * (1.0 - 1j * ka) - 1.0) / (k * k)


def _wrapped_offsets(count, spacing):
    offsets = np.arange(2 * count)
    offsets[offsets >= count] -= 2 * count
    distance = offsets * spacing
    distance[count] = np.nan
    return distance


@lru_cache(maxsize=4)
def _kernel_hat(shape, spacings, k, workers):
    """
    FFT of the quadrature-weighted Green kernel on the doubled cell of a node box.
    The unused middle offset of every axis is zeroed.
    """
    d1, d2, d3 = (_wrapped_offsets(n, h) for n, h in zip(shape, spacings))
    r = np.sqrt(d1[:, None, None] ** 2 + d2[None, :, None] ** 2 + d3[None, None, :] ** 2)
    volume = spacings[0] * spacings[1] * spacings[2]
    with np.errstate(divide='ignore', invalid='ignore'):
        kernel = np.exp(1j * k * r) / (4.0 * math.pi * r) * volume
    kernel[0, 0, 0] = _self_term(k, volume)
    kernel[~np.isfinite(kernel)] = 0.0
    kernel_hat = scipy.fft.fftn(kernel, workers=workers)
    kernel_hat.setflags(write=False)
    return kernel_hat


def _convolve(kernel_hat, source, workers):
    doubled = kernel_hat.shape
    padded = scipy.fft.fftn(source, s=doubled, workers=workers)
    full = scipy.fft.ifftn(padded * kernel_hat, workers=workers)
    return full[:source.shape[0], :source.shape[1], :source.shape[2]]


def support_box(contrast, pad=1):
    "index box [lo, hi) of the nonzero contrast, widened by pad nodes and clipped to the grid"
    nonzero = np.nonzero(contrast)
    if nonzero[0].size == 0:
        return None
    lo = tuple(max(int(idx.min()) - pad, 0) for idx in nonzero)
    hi = tuple(min(int(idx.max()) + 1 + pad, n) for idx, n in zip(nonzero, contrast.shape))
    return lo, hi


class ForwardSolution:
    """
    Total field of one Lippmann-Schwinger solve.

    The unknowns live on the contrast-support box only; the field on the whole grid is
    produced on demand by `volume_field`.
    """

    def __init__(self, k, n2, lo, u_box, residual, iterations, converged, workers=None):
        self.k = float(k)
        self.n2 = n2
        self.grid = n2.grid
        self.lo = lo
        self.u_box = u_box
        self.residual = float(residual)
        self.iterations = int(iterations)
        self.converged = bool(converged)
        self.workers = workers

    @property
    def is_vacuum(self):
        return self.u_box is None

    def box_slices(self):
        return tuple(slice(l, l + n) for l, n in zip(self.lo, self.u_box.shape))

    def support_sources(self):
        "node coordinates and (n^2 - 1) u values at the nonzero-contrast nodes"
        if self.is_vacuum:
            return np.zeros((0, 3)), np.zeros(0, dtype=complex)
        contrast = self.n2.values[self.box_slices()] - 1.0
        mask = contrast != 0
        axes = [axis[s] for axis, s in zip(self.grid.axes(), self.box_slices())]
        mesh = np.meshgrid(*axes, indexing='ij')
        points = np.stack([m[mask] for m in mesh], axis=-1)
        return points, contrast[mask] * self.u_box[mask]

    @cached_property
    def u(self):
        return self.volume_field()

    def volume_field(self):
        x1, x2, x3 = self.grid.axes()
        u_inc = np.broadcast_to(np.exp(1j * self.k * x3)[None, None, :], self.grid.shape)
        if self.is_vacuum:
            return ComplexField3(self.grid, u_inc)
        source = np.zeros(self.grid.shape, dtype=complex)
        box = self.box_slices()
        source[box] = (self.n2.values[box] - 1.0) * self.u_box
        kernel_hat = _kernel_hat(self.grid.shape, self.grid.spacings, self.k, self.workers)
        scattered = self.k ** 2 * _convolve(kernel_hat, source, self.workers)
        return ComplexField3(self.grid, u_inc + scattered)


def check_resolution(grid, k, points_per_wavelength):
    if k <= 0:
        return
    limit = 2.0 * math.pi / (k * points_per_wavelength)
    coarsest = max(grid.spacings)
    if coarsest > limit * (1.0 + 1e-9):
        raise ResolutionError('grid spacing %.4g exceeds %.4g needed for %g points per wavelength at k=%g' % (
            coarsest, limit, points_per_wavelength, k))


def solve_ls(n2, k, settings=None):
    """
    Solve the discrete Lippmann-Schwinger equation for the total field at wavenumber k.
    Non-convergence is reported on the solution, not raised.
    """
    settings = settings or SolverSettings()
    grid = n2.grid
    if np.any(n2.values < 1.0):
        raise InvalidInput('n^2 must be >= 1 everywhere')
    check_resolution(grid, k, settings.points_per_wavelength)

    contrast = n2.values - 1.0
    box = support_box(contrast)
    if box is None:
        return ForwardSolution(k, n2, (0, 0, 0), None, 0.0, 0, True, settings.workers)

    lo, hi = box
    slices = tuple(slice(l, h) for l, h in zip(lo, hi))
    beta = contrast[slices]
    shape = beta.shape
    x3 = grid.axis(2)[slices[2]]
    rhs = np.broadcast_to(np.exp(1j * k * x3)[None, None, :], shape).ravel().astype(complex)
    kernel_hat = _kernel_hat(shape, grid.spacings, float(k), settings.workers)
    k2 = k * k

    def apply(u):
        u = u.reshape(shape)
        return (u - k2 * _convolve(kernel_hat, beta * u, settings.workers)).ravel()

    operator = LinearOperator((rhs.size, rhs.size), matvec=apply, dtype=complex)
    iterations = [0]

    def count(_residual):
        iterations[0] += 1

    cycles = max(1, math.ceil(settings.maxiter / settings.restart))
    u, info = gmres(operator, rhs, x0=rhs.copy(), rtol=0.5 * settings.tol, atol=0.0,
                    restart=settings.restart, maxiter=cycles, callback=count, callback_type='pr_norm')
    if info < 0:
        raise NumericalFailure('GMRES breakdown (info=%d)' % info, stage='forward')
    if not np.all(np.isfinite(u)):
        raise NumericalFailure('non-finite field at k=%g' % k, stage='forward')
    residual = np.linalg.norm(rhs - apply(u)) / np.linalg.norm(rhs)
    converged = residual <= settings.tol
    if converged:
        logger.debug('LS solve at k=%g: %d iterations, residual %.2e on a %s box' % (k, iterations[0], residual, shape))
    else:
        logger.warning('LS solve at k=%g did not converge: residual %.2e after %d iterations' % (
            k, residual, iterations[0]))
    return ForwardSolution(k, n2, lo, u.reshape(shape), residual, iterations[0], converged, settings.workers)


def ls_residual(solution):
    "relative residual of the stored solution under the discrete operator"
    if solution.is_vacuum:
        return 0.0
    box = solution.box_slices()
    beta = solution.n2.values[box] - 1.0
    x3 = solution.grid.axis(2)[box[2]]
    rhs = np.broadcast_to(np.exp(1j * solution.k * x3)[None, None, :], beta.shape)
    kernel_hat = _kernel_hat(beta.shape, solution.grid.spacings, solution.k, solution.workers)
    applied = solution.u_box - solution.k ** 2 * _convolve(kernel_hat, beta * solution.u_box, solution.workers)
    return float(np.linalg.norm(rhs - applied) / np.linalg.norm(rhs))


def _check_plane_clear(points, plane):
    if points.shape[0] == 0:
        return
    z_lo, z_hi = points[:, 2].min(), points[:, 2].max()
    if z_lo <= plane.z <= z_hi:
        raise InvalidInput('plane x3=%g intersects the contrast support x3 in [%g, %g]' % (plane.z, z_lo, z_hi))


def _green_sum(points, sources, volume, k, plane):
    "k^2 * sum_j G(x - xi_j) sources_j * volume for every node x of the plane"
    x1, x2 = plane.meshgrid()
    targets = np.stack([x1.ravel(), x2.ravel(), np.full(x1.size, plane.z)], axis=-1)
    out = np.zeros(targets.shape[0], dtype=complex)
    if points.shape[0]:
        chunk = max(1, setting('PHASELESS_EVAL_CHUNK') // points.shape[0])
        weights = sources * volume
        for start in range(0, targets.shape[0], chunk):
            block = targets[start:start + chunk]
            r = np.sqrt(((block[:, None, :] - points[None, :, :]) ** 2).sum(axis=-1))
            out[start:start + chunk] = (np.exp(1j * k * r) / (4.0 * math.pi * r)) @ weights
    return (k * k * out).reshape(plane.counts)


def evaluate_exterior(solution, n2, targets):
    "total field on a plane clear of the contrast support, by the same quadrature as the volume solve"
    points, sources = solution.support_sources()
    _check_plane_clear(points, targets)
    volume = float(np.prod(n2.grid.spacings))
    values = np.exp(1j * solution.k * targets.z) + _green_sum(points, sources, volume, solution.k, targets)
    return ComplexPlaneData(targets, [solution.k], values)


def far_field_plane(solution, n2, plane, k):
    """
    Scattered field on the plane from the far-field approximation
    u_sc = k^2 exp(ikR) / (4 pi R) * integral of exp(-ik xi3) (n^2 - 1) u.
    The approximation does not depend on (x1, x2).
    """
    R = plane.z
    if R < 5.0 * plane.half_width:
        logger.warning('far-field approximation used at R=%g, less than five plane half widths (%g)' % (
            R, plane.half_width))
    points, sources = solution.support_sources()
    volume = float(np.prod(n2.grid.spacings))
    integral = np.sum(np.exp(-1j * k * points[:, 2]) * sources) * volume if points.shape[0] else 0.0
    value = k * k * np.exp(1j * k * R) / (4.0 * math.pi * R) * integral
    return ComplexPlaneData(plane, [k], np.full(plane.counts, value, dtype=complex))


def phi_of_k(plane_data, k):
    "max over the plane nodes of |u - u_inc|^2"
    u = plane_data.at(k)
    return float(np.max(np.abs(u - np.exp(1j * k * plane_data.plane.z)) ** 2))


def analytic_bound(k, R, sphere_count):
    if not R > 0:
        raise InvalidInput('R must be > 0')
    return (sphere_count * k / (4.0 * math.pi * R)) ** 2


def phi_profile(n2, k_values, plane, settings=None, sphere_count=1):
    "phi(k) with the smallness bound for every wavenumber of k_values"
    samples = []
    for k in k_values:
        solution = solve_ls(n2, k, settings)
        data = evaluate_exterior(solution, n2, plane)
        samples.append(PhiSample(float(k), phi_of_k(data, k), analytic_bound(k, plane.z, sphere_count)))
        logger.info('phi(%.4f) = %.5f (bound %.5f)' % samples[-1])
    return samples


def _mie_coefficients(m, x, order):
    ls = np.arange(order + 1)
    jx, djx = spherical_jn(ls, x), spherical_jn(ls, x, derivative=True)
    hx = jx + 1j * spherical_yn(ls, x)
    dhx = djx + 1j * spherical_yn(ls, x, derivative=True)
    jmx, djmx = spherical_jn(ls, m * x), spherical_jn(ls, m * x, derivative=True)
    a = (m * djmx * jx - djx * jmx) / (dhx * jmx - m * djmx * hx)
    c = (jx + a * hx) / jmx
    return a, c


def mie_reference(radius, n_inside, k, points, order=None):
    """
    Total field of a plane wave exp(ikx3) on a homogeneous sphere centred at the origin,
    from the scalar partial-wave series. Returns the values, the truncation order and the
    magnitude of the last retained term as a tail bound.
    """
    points = np.asarray(points, dtype=np.float64)
    u_inc = np.exp(1j * k * points[..., 2])
    if order is None:
        order = int(math.ceil(k * radius + 10))
    elif order < k * radius + 10:
        raise InvalidInput('series order %d is below k*radius + 10' % order)
    if n_inside == 1.0 or k == 0:
        return MieResult(u_inc, order, 0.0)

    a, c = _mie_coefficients(n_inside, k * radius, order)
    r = np.sqrt(np.sum(points ** 2, axis=-1))
    cos_theta = np.divide(points[..., 2], r, out=np.ones_like(r), where=r > 0)
    outside = r >= radius
    values = np.where(outside, u_inc, 0.0).astype(complex)
    last = np.zeros(r.shape)
    for l in range(order + 1):
        weight = (1j ** l) * (2 * l + 1) * eval_legendre(l, cos_theta)
        with np.errstate(all='ignore'):
            kr = k * r
            radial_out = a[l] * (spherical_jn(l, kr) + 1j * spherical_yn(l, kr))
            radial_in = c[l] * spherical_jn(l, n_inside * kr)
        term = weight * np.where(outside, radial_out, radial_in)
        values += term
        last = np.abs(term)
    if not np.all(np.isfinite(values)):
        raise NumericalFailure('non-finite partial-wave sum', stage='mie')
    return MieResult(values, order, float(np.max(last)) if last.size else 0.0)


def born_reference(n2, k, plane):
    "first Born approximation on the plane: u_inc + k^2 G[(n^2 - 1) u_inc]"
    contrast = n2.values - 1.0
    mask = contrast != 0
    mesh = n2.grid.meshgrid()
    points = np.stack([m[mask] for m in mesh], axis=-1)
    _check_plane_clear(points, plane)
    sources = contrast[mask] * np.exp(1j * k * points[:, 2])
    volume = float(np.prod(n2.grid.spacings))
    values = np.exp(1j * k * plane.z) + _green_sum(points, sources, volume, k, plane)
    return ComplexPlaneData(plane, [k], values)
