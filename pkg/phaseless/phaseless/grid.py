"""
Uniform grids, unit scalings and the immutable field containers shared by every stage.

Volume arrays are indexed [i1, i2, i3] with shape (n1, n2, n3); flattening in Fortran
order gives the x1-fastest layout of the field files. Plane × wavenumber arrays have
shape (nk, m1, m2).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, ResourceRefusal
from .libs.constants import MICRONS_PER_UNIT
from .util import setting

logger = logging.getLogger("rainbow")

COMPLEX_BYTES = 16


def to_dimensionless(length_microns):
    return length_microns / MICRONS_PER_UNIT


def from_dimensionless(x):
    return x * MICRONS_PER_UNIT


def to_background_scaled(x_dimensionless, n0):
    if n0 < 1:
        raise InvalidInput('background index must be >= 1, got %r' % (n0,))
    return n0 * x_dimensionless


def from_background_scaled(y, n0):
    if n0 < 1:
        raise InvalidInput('background index must be >= 1, got %r' % (n0,))
    return y / n0


def wavelength_to_wavenumber(lambda_microns):
    "k = 2 pi / lambda' with lambda' the wavelength in dimensionless units"
    return 2.0 * math.pi / to_dimensionless(lambda_microns)


def _freeze(array):
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Grid3:
    counts: tuple
    bbox: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        bbox = tuple(float(b) for b in self.bbox)
        if len(counts) != 3 or len(bbox) != 6:
            raise InvalidInput('Grid3 needs three counts and six bbox values')
        if min(counts) < 2:
            raise InvalidInput('grid counts must be >= 2 per axis, got %s' % (counts,))
        for axis in range(3):
            lo, hi = bbox[2 * axis], bbox[2 * axis + 1]
            if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
                raise InvalidInput('bbox axis %d has max <= min: (%r, %r)' % (axis + 1, lo, hi))
        object.__setattr__(self, 'counts', counts)
        object.__setattr__(self, 'bbox', bbox)

    @property
    def shape(self):
        return self.counts

    @property
    def size(self):
        return self.counts[0] * self.counts[1] * self.counts[2]

    @property
    def spacings(self):
        return tuple(
            (self.bbox[2 * a + 1] - self.bbox[2 * a]) / (self.counts[a] - 1) for a in range(3))

    @property
    def lower(self):
        return tuple(self.bbox[0::2])

    @property
    def upper(self):
        return tuple(self.bbox[1::2])

    @property
    def estimated_bytes(self):
        return self.size * COMPLEX_BYTES

    def axis(self, a):
        return np.linspace(self.bbox[2 * a], self.bbox[2 * a + 1], self.counts[a])

    def axes(self):
        return tuple(self.axis(a) for a in range(3))

    def meshgrid(self):
        return np.meshgrid(*self.axes(), indexing='ij')

    def boundary_mask(self):
        mask = np.zeros(self.shape, dtype=bool)
        mask[0, :, :] = mask[-1, :, :] = True
        mask[:, 0, :] = mask[:, -1, :] = True
        mask[:, :, 0] = mask[:, :, -1] = True
        return mask

    def gamma_mask(self):
        """
        Nodes of the open top face x3 = max; the rim of that face belongs to the
        lateral faces.
        """
        mask = np.zeros(self.shape, dtype=bool)
        mask[1:-1, 1:-1, -1] = True
        return mask

    def contains(self, point, margin=0.0):
        return all(
            self.bbox[2 * a] + margin <= point[a] <= self.bbox[2 * a + 1] - margin for a in range(3))

    def nearest_index(self, point):
        h = self.spacings
        return tuple(
            int(min(max(round((point[a] - self.bbox[2 * a]) / h[a]), 0), self.counts[a] - 1)) for a in range(3))

    def subgrid(self, lo, hi):
        "grid of the index box [lo, hi) sharing this grid's nodes"
        lo = tuple(int(i) for i in lo)
        hi = tuple(int(i) for i in hi)
        axes = self.axes()
        bbox = []
        for a in range(3):
            bbox.extend((axes[a][lo[a]], axes[a][hi[a] - 1]))
        return Grid3(tuple(hi[a] - lo[a] for a in range(3)), tuple(bbox))


@dataclass(frozen=True)
class PlaneGrid:
    z: float
    half_width: float
    counts: tuple = (100, 100)

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) != 2 or min(counts) < 2:
            raise InvalidInput('plane counts must be two integers >= 2, got %s' % (self.counts,))
        if not self.half_width > 0:
            raise InvalidInput('plane half width must be > 0, got %r' % (self.half_width,))
        object.__setattr__(self, 'counts', counts)
        object.__setattr__(self, 'z', float(self.z))
        object.__setattr__(self, 'half_width', float(self.half_width))

    @property
    def spacing(self):
        return tuple(2.0 * self.half_width / (m - 1) for m in self.counts)

    def axes(self):
        return tuple(np.linspace(-self.half_width, self.half_width, m) for m in self.counts)

    def meshgrid(self):
        return np.meshgrid(*self.axes(), indexing='ij')

    def at(self, z):
        return PlaneGrid(z, self.half_width, self.counts)

    def interior_half(self):
        "boolean mask of the central half (per axis) of the plane"
        masks = [np.abs(x) <= 0.5 * self.half_width + 1e-12 for x in self.axes()]
        return masks[0][:, None] & masks[1][None, :]


@dataclass(frozen=True)
class WavenumberPartition:
    """
    Uniform descending partition k_0 = k_bar > k_1 > ... > k_N = k_lower.
    """
    k_values: tuple

    def __post_init__(self):
        k = tuple(float(v) for v in self.k_values)
        if len(k) < 2:
            raise InvalidInput('a partition needs at least two wavenumbers')
        steps = np.diff(k)
        if np.any(steps >= 0):
            raise InvalidInput('partition wavenumbers must be strictly decreasing')
        h = (k[0] - k[-1]) / (len(k) - 1)
        if np.max(np.abs(-steps - h)) > 1e-12 * max(abs(k[0]), 1.0):
            raise InvalidInput('partition is not uniform')
        if k[-1] < 1:
            raise InvalidInput('lowest wavenumber must be >= 1, got %r' % (k[-1],))
        object.__setattr__(self, 'k_values', k)

    @classmethod
    def from_band(cls, k_low, k_high, intervals):
        if not k_low < k_high:
            raise InvalidInput('band needs k_low < k_high, got [%r, %r]' % (k_low, k_high))
        intervals = int(intervals)
        if intervals < 1:
            raise InvalidInput('a partition needs at least one interval')
        h = (k_high - k_low) / intervals
        values = [k_high - n * h for n in range(intervals)] + [k_low]
        return cls(tuple(values))

    @property
    def N(self):
        return len(self.k_values) - 1

    @property
    def h(self):
        return (self.k_values[0] - self.k_values[-1]) / self.N

    @property
    def k_bar(self):
        return self.k_values[0]

    @property
    def k_lower(self):
        return self.k_values[-1]

    def as_array(self):
        return np.array(self.k_values)


class _Field3:
    dtype = None

    def __init__(self, grid, values):
        values = np.array(values, dtype=self.dtype)
        if values.ndim == 1 and values.size == grid.size:
            values = values.reshape(grid.shape, order='F')
        if values.shape != grid.shape:
            raise InvalidInput('field of shape %s does not match grid %s' % (values.shape, grid.shape))
        self.grid = grid
        self.values = _freeze(values)

    def flat(self):
        "values in x1-fastest order"
        return self.values.ravel(order='F')

    def is_finite(self):
        return bool(np.all(np.isfinite(self.values)))

    def __repr__(self):
        return '%s(counts=%s)' % (type(self).__name__, self.grid.counts)


class RealField3(_Field3):
    dtype = np.float64


class ComplexField3(_Field3):
    dtype = np.complex128


class _PlaneStack:
    dtype = None

    def __init__(self, plane, k_values, values):
        k_values = np.atleast_1d(np.array(k_values, dtype=np.float64))
        values = np.array(values, dtype=self.dtype)
        if values.ndim == 2:
            values = values[None, :, :]
        if k_values.size == 0:
            raise InvalidInput('plane data needs at least one wavenumber')
        if values.shape != (k_values.size,) + plane.counts:
            raise InvalidInput('plane values of shape %s do not match %d wavenumbers on a %s plane' % (
                values.shape, k_values.size, plane.counts))
        if not np.all(np.isfinite(values)):
            raise InvalidInput('plane values must be finite')
        self.plane = plane
        self.k_values = _freeze(k_values)
        self.values = _freeze(values)

    def index_of(self, k):
        matches = np.flatnonzero(np.isclose(self.k_values, k, rtol=1e-12, atol=0.0))
        if matches.size == 0:
            raise InvalidInput('wavenumber %r is not held by this data (have %s)' % (k, list(self.k_values)))
        return int(matches[0])

    def at(self, k):
        return self.values[self.index_of(k)]

    @property
    def k_bar(self):
        return float(np.max(self.k_values))

    @property
    def k_lower(self):
        return float(np.min(self.k_values))


class ComplexPlaneData(_PlaneStack):
    dtype = np.complex128


class IntensityData(_PlaneStack):
    dtype = np.float64

    def __init__(self, plane, k_values, values):
        super().__init__(plane, k_values, values)
        if np.any(self.values < 0):
            raise InvalidInput('intensity must be nonnegative')


def make_grid(bbox, points_per_wavelength, k_max, budget=None):
    """
    Smallest uniform grid over bbox resolving k_max with the requested points per
    wavelength. Refuses grids whose complex-field footprint exceeds the memory budget.
    """
    if points_per_wavelength < 2:
        raise InvalidInput('points per wavelength must be >= 2, got %r' % (points_per_wavelength,))
    if not k_max > 0:
        raise InvalidInput('k_max must be > 0, got %r' % (k_max,))
    budget = setting('PHASELESS_MEMORY_BUDGET') if budget is None else budget
    counts = []
    for axis in range(3):
        extent = bbox[2 * axis + 1] - bbox[2 * axis]
        cells = math.ceil(extent * k_max * points_per_wavelength / (2.0 * math.pi) - 1e-9)
        counts.append(max(2, cells + 1))
    estimate = counts[0] * counts[1] * counts[2] * COMPLEX_BYTES
    if estimate > budget:
        logger.error('grid %s at k=%g, ppw=%g refused: %d bytes estimated' % (counts, k_max, points_per_wavelength, estimate))
        raise ResourceRefusal(estimate, budget, what='grid %dx%dx%d' % tuple(counts))
    return Grid3(tuple(counts), tuple(bbox))
