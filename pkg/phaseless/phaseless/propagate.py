"""
Angular-spectrum transfer of phased plane data from the measurement plane to the top
face of Omega, and the boundary data the reconstruction starts from.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.fft
from scipy.interpolate import RegularGridInterpolator

from .errors import InvalidInput
from .grid import ComplexPlaneData

logger = logging.getLogger("rainbow")


def _k_index(k_values, k):
    matches = np.flatnonzero(np.isclose(k_values, k, rtol=1e-12, atol=0.0))
    if matches.size == 0:
        raise InvalidInput("wavenumber %r is not held by this boundary data" % (k,))
    return int(matches[0])


def _propagate_slice(u, spacing, k, dz, pad, workers):
    # the plane mean travels as the exact plane wave; the zero-mean rest is zero padded
    mean = u.mean()
    rest = u - mean
    shape = tuple(int(pad * m) for m in u.shape)
    spectrum = scipy.fft.fft2(rest, s=shape, workers=workers)
    k1 = 2.0 * np.pi * scipy.fft.fftfreq(shape[0], d=spacing[0])
    k2 = 2.0 * np.pi * scipy.fft.fftfreq(shape[1], d=spacing[1])
    k3_squared = k * k - k1[:, None] ** 2 - k2[None, :] ** 2
    propagating = k3_squared > 0
    transfer = np.zeros(shape, dtype=complex)
    transfer[propagating] = np.exp(1j * np.sqrt(k3_squared[propagating]) * dz)
    moved = scipy.fft.ifft2(spectrum * transfer, workers=workers)[:u.shape[0], :u.shape[1]]
    return mean * np.exp(1j * k * dz) + moved


def angular_spectrum(data, target_z, k=None, pad=2, workers=None):
    """
    Move plane data to the parallel plane x3 = target_z, keeping propagating modes only.

    A plane wave exp(ik x3) maps exp(ikR) to exp(ik target_z). With k given only that
    wavenumber is propagated; pad=1 gives the periodic transform.
    """
    if pad < 1:
        raise InvalidInput('padding factor must be >= 1')
    dz = target_z - data.plane.z
    k_values = data.k_values if k is None else [k]
    values = []
    for kk in k_values:
        if not kk > 0:
            raise InvalidInput('propagation needs k > 0, got %r' % (kk,))
        values.append(_propagate_slice(data.at(kk), data.plane.spacing, kk, dz, pad, workers))
    return ComplexPlaneData(data.plane.at(target_z), k_values, np.array(values))


def normal_derivative(data, k_bar, target_z, epsilon, pad=2, workers=None):
    "forward difference [p(target_z + eps) - p(target_z)] / eps of the propagated field at k_bar"
    if not epsilon > 0:
        raise InvalidInput('epsilon must be > 0, got %r' % (epsilon,))
    at = angular_spectrum(data, target_z, k_bar, pad, workers).values[0]
    above = angular_spectrum(data, target_z + epsilon, k_bar, pad, workers).values[0]
    return (above - at) / epsilon


def resample_to_face(values, plane, grid):
    "bilinear resampling of (m1, m2) plane values onto the (n1, n2) nodes of the top face"
    x1, x2 = plane.axes()
    g1, g2 = grid.axis(0), grid.axis(1)
    if len(x1) == len(g1) and len(x2) == len(g2) and np.allclose(x1, g1) and np.allclose(x2, g2):
        return np.array(values, dtype=complex)
    points = np.stack(np.meshgrid(g1, g2, indexing='ij'), axis=-1)
    real = RegularGridInterpolator((x1, x2), values.real, bounds_error=False, fill_value=None)
    imag = RegularGridInterpolator((x1, x2), values.imag, bounds_error=False, fill_value=None)
    return real(points) + 1j * imag(points)


@dataclass(frozen=True)
class PropagatedBoundary:
    """
    p on the top face for every wavenumber (shape (nk, n1, n2)) and its normal
    derivative p1 at k_bar.
    """
    grid: object
    k_values: tuple
    p: np.ndarray
    p1: np.ndarray
    epsilon: float

    @property
    def k_bar(self):
        return max(self.k_values)

    def at(self, k):
        return self.p[_k_index(self.k_values, k)]


@dataclass(frozen=True)
class ComplementedBoundary:
    """
    p~ on every boundary node of Omega: p on Gamma, exp(ik x3) on the other faces.
    values has shape (nk, n1, n2, n3); interior entries are unused zeros.
    """
    grid: object
    k_values: tuple
    values: np.ndarray

    def at(self, k):
        return self.values[_k_index(self.k_values, k)]


def propagate_to_boundary(phased, grid, epsilon=None, pad=2, workers=None):
    """
    Propagate every wavenumber of the phased data to the top face of grid and estimate
    the normal derivative at k_bar; epsilon defaults to one transverse grid spacing.
    """
    epsilon = grid.spacings[0] if epsilon is None else epsilon
    top = grid.upper[2]
    moved = angular_spectrum(phased, top, pad=pad, workers=workers)
    p = np.array([resample_to_face(v, moved.plane, grid) for v in moved.values])
    p1_plane = normal_derivative(phased, phased.k_bar, top, epsilon, pad, workers)
    p1 = resample_to_face(p1_plane, phased.plane, grid)
    logger.info('propagated %d wavenumbers from x3=%g to x3=%g (eps=%.4g)' % (
        len(phased.k_values), phased.plane.z, top, epsilon))
    return PropagatedBoundary(grid, tuple(float(k) for k in phased.k_values), p, p1, float(epsilon))


def complement_at(p_face, k, grid):
    x3 = grid.axis(2)
    out = np.zeros(grid.shape, dtype=complex)
    plane_wave = np.broadcast_to(np.exp(1j * k * x3)[None, None, :], grid.shape)
    boundary = grid.boundary_mask()
    out[boundary] = plane_wave[boundary]
    gamma = grid.gamma_mask()
    out[gamma] = np.asarray(p_face)[gamma[:, :, -1]]
    return out


def complement(boundary):
    values = np.array([complement_at(boundary.at(k), k, boundary.grid) for k in boundary.k_values])
    return ComplementedBoundary(boundary.grid, boundary.k_values, values)


def noise_statistics(clean, noisy):
    "relative L2 deviation of noisy from clean plane data on the interior half, per wavenumber"
    mask = clean.plane.interior_half()
    stats = []
    for k in clean.k_values:
        reference = clean.at(k)[mask]
        deviation = noisy.at(k)[mask] - reference
        stats.append((float(k), float(np.linalg.norm(deviation) / max(np.linalg.norm(reference), 1e-300))))
    return stats
