"""
Smooth microsphere phantoms for the refractive index field n^2(x).
"""

import itertools
import logging
import math
from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput
from .grid import PlaneGrid, RealField3, WavenumberPartition, make_grid
from .libs import constants

logger = logging.getLogger("rainbow")

MIN_SEPARATION = 1.0

Preset = namedtuple('Preset', ['phantom', 'grid', 'plane', 'partition'])


def _bump_r2(r2):
    r2 = np.asarray(r2, dtype=np.float64)
    out = np.zeros_like(r2)
    inside = r2 < 1.0
    out[inside] = np.exp(-r2[inside] / (1.0 - r2[inside]))
    return out


def bump(x):
    "exp(-|x|^2 / (1 - |x|^2)) inside the unit ball, 0 outside; accepts (..., 3) arrays"
    x = np.asarray(x, dtype=np.float64)
    r2 = np.sum(x * x, axis=-1)
    value = _bump_r2(r2)
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class MicrosphereSpec:
    center: tuple
    radius: float = constants.MICROSPHERE_RADIUS
    amplitude: float = constants.MICROSPHERE_AMPLITUDE

    def __post_init__(self):
        center = tuple(float(c) for c in self.center)
        if len(center) != 3:
            raise InvalidInput('sphere center needs three coordinates, got %s' % (self.center,))
        if not self.radius > 0:
            raise InvalidInput('sphere radius must be > 0, got %r' % (self.radius,))
        if not self.amplitude >= 0:
            raise InvalidInput('sphere amplitude must be >= 0, got %r' % (self.amplitude,))
        object.__setattr__(self, 'center', center)
        object.__setattr__(self, 'radius', float(self.radius))
        object.__setattr__(self, 'amplitude', float(self.amplitude))

    def sort_key(self):
        return self.center + (self.radius, self.amplitude)

    def to_dict(self):
        return {'center': list(self.center), 'radius': self.radius, 'amplitude': self.amplitude}


@dataclass(frozen=True)
class PhantomSpec:
    spheres: tuple = field(default_factory=tuple)

    def __post_init__(self):
        spheres = tuple(self.spheres)
        object.__setattr__(self, 'spheres', spheres)
        for a, b in itertools.combinations(spheres, 2):
            distance = math.dist(a.center, b.center)
            if distance <= MIN_SEPARATION or distance < a.radius + b.radius:
                logger.warning('spheres at %s and %s are only %.3f apart' % (a.center, b.center, distance))

    @property
    def max_amplitude(self):
        return max((s.amplitude for s in self.spheres), default=0.0)

    def to_list(self):
        return [s.to_dict() for s in self.spheres]


def build_refractive_field(spec, grid):
    """
    n^2 = 1 + sum of amplitude * bump((x - x0) / r) over the spheres of spec.

    Spheres are summed in a canonical order so that permuting the list yields a
    bitwise-identical field.
    """
    for sphere in spec.spheres:
        for a in range(3):
            lo, hi = grid.bbox[2 * a], grid.bbox[2 * a + 1]
            if sphere.center[a] - sphere.radius < lo or sphere.center[a] + sphere.radius > hi:
                raise InvalidInput('sphere at %s with radius %g leaves the grid bbox %s' % (
                    sphere.center, sphere.radius, grid.bbox))

    x1, x2, x3 = grid.axes()
    n2 = np.ones(grid.shape)
    for sphere in sorted(spec.spheres, key=MicrosphereSpec.sort_key):
        c1, c2, c3 = sphere.center
        r2 = (((x1 - c1) / sphere.radius) ** 2)[:, None, None] \
            + (((x2 - c2) / sphere.radius) ** 2)[None, :, None] \
            + (((x3 - c3) / sphere.radius) ** 2)[None, None, :]
        n2 += sphere.amplitude * _bump_r2(r2)
    return RealField3(grid, n2)


def homogeneous_sphere_field(radius, n_inside, grid, center=(0.0, 0.0, 0.0), subsamples=4):
    """
    Piecewise-constant sphere with cell-averaged n^2 on the boundary cells.

    Only used to compare the volume solver with the partial-wave series.
    """
    if not radius > 0:
        raise InvalidInput('sphere radius must be > 0')
    if not grid.contains(np.array(center) - radius) or not grid.contains(np.array(center) + radius):
        raise InvalidInput('sphere leaves the grid bbox')
    h = np.array(grid.spacings)
    offsets = (np.arange(subsamples) + 0.5) / subsamples - 0.5
    x1, x2, x3 = grid.axes()
    fraction = np.zeros(grid.shape)
    for o1, o2, o3 in itertools.product(offsets, repeat=3):
        r2 = ((x1 + o1 * h[0] - center[0]) ** 2)[:, None, None] \
            + ((x2 + o2 * h[1] - center[1]) ** 2)[None, :, None] \
            + ((x3 + o3 * h[2] - center[2]) ** 2)[None, None, :]
        fraction += r2 < radius * radius
    fraction /= subsamples ** 3
    return RealField3(grid, 1.0 + (n_inside ** 2 - 1.0) * fraction)


def preset_geometry():
    return (-constants.HALF_WIDTH, constants.HALF_WIDTH,
            -constants.HALF_WIDTH, constants.HALF_WIDTH,
            -constants.D1, constants.D2)


def preset_spheres(case):
    if case == 'one_sphere':
        centers = [(0.0, 0.0, 0.0)]
    elif case == 'two_spheres':
        half = constants.MICROSPHERE_SEPARATION / 2.0
        centers = [(-half, 0.0, 0.0), (half, 0.0, 0.0)]
    elif case == 'vacuum':
        centers = []
    else:
        raise InvalidInput('unknown preset case %r' % (case,))
    return PhantomSpec(tuple(MicrosphereSpec(c) for c in centers))


def paper_preset(case, k_scale=1.0, intervals=constants.PARTITION_SIZE, points_per_wavelength=6.0):
    """
    The microsphere experiment geometry with the wavenumber band scaled by k_scale.

    The returned Omega grid resolves the top wavenumber at the requested points per
    wavelength; it is a descriptor only, the memory budget is enforced when a stage
    allocates on it.
    """
    if not 0 < k_scale <= 1:
        raise InvalidInput('k_scale must lie in (0, 1], got %r' % (k_scale,))
    partition = WavenumberPartition.from_band(
        k_scale * constants.K_LOWER, k_scale * constants.K_UPPER, intervals)
    grid = make_grid(preset_geometry(), points_per_wavelength, partition.k_bar, budget=math.inf)
    plane = PlaneGrid(constants.PLANE_Z, constants.HALF_WIDTH, constants.PLANE_COUNTS)
    return Preset(preset_spheres(case), grid, plane, partition)

