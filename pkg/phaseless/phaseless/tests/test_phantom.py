import math

import numpy as np
from django.test import SimpleTestCase

from ..errors import InvalidInput
from ..grid import Grid3
from ..phantom import (MicrosphereSpec, PhantomSpec, build_refractive_field, bump, homogeneous_sphere_field,
                       paper_preset, preset_spheres)


class BumpTests(SimpleTestCase):
    def test_values(self):
        self.assertEqual(bump((0.0, 0.0, 0.0)), 1.0)
        self.assertEqual(bump((1.0, 0.0, 0.0)), 0.0)
        self.assertAlmostEqual(bump((0.5, 0.0, 0.0)), math.exp(-0.25 / 0.75))
        self.assertEqual(bump(np.zeros((4, 3))).shape, (4,))


class RefractiveFieldTests(SimpleTestCase):
    def setUp(self):
        self.grid = Grid3((21, 21, 21), (-1.5, 1.5, -1.5, 1.5, -1.5, 1.5))

    def test_single_sphere_peak(self):
        n2 = build_refractive_field(preset_spheres('one_sphere'), self.grid)
        self.assertAlmostEqual(float(n2.values.max()), 2.04)
        self.assertEqual(float(n2.values.min()), 1.0)
        self.assertEqual(n2.values[10, 10, 10], n2.values.max())

    def test_permutation_is_bitwise_identical(self):
        a = MicrosphereSpec((-0.6, 0.0, 0.1))
        b = MicrosphereSpec((0.6, 0.2, 0.0), radius=0.5, amplitude=0.7)
        first = build_refractive_field(PhantomSpec((a, b)), self.grid)
        second = build_refractive_field(PhantomSpec((b, a)), self.grid)
        np.testing.assert_array_equal(first.values, second.values)

    def test_sphere_outside_grid(self):
        with self.assertRaises(InvalidInput):
            build_refractive_field(PhantomSpec((MicrosphereSpec((1.3, 0.0, 0.0)),)), self.grid)

    def test_close_spheres_warn(self):
        with self.assertLogs('rainbow', 'WARNING'):
            PhantomSpec((MicrosphereSpec((0.0, 0.0, 0.0)), MicrosphereSpec((0.5, 0.0, 0.0))))

    def test_invalid_sphere(self):
        with self.assertRaises(InvalidInput):
            MicrosphereSpec((0.0, 0.0, 0.0), radius=0.0)
        with self.assertRaises(InvalidInput):
            MicrosphereSpec((0.0, 0.0))

    def test_homogeneous_sphere_volume(self):
        n2 = homogeneous_sphere_field(1.0, 1.2, self.grid)
        self.assertGreaterEqual(float(n2.values.min()), 1.0)
        self.assertLessEqual(float(n2.values.max()), 1.44 + 1e-12)
        volume = float(np.sum(n2.values - 1.0) / 0.44) * float(np.prod(self.grid.spacings))
        self.assertAlmostEqual(volume, 4.0 * math.pi / 3.0, delta=0.05 * 4.0 * math.pi / 3.0)


class PresetTests(SimpleTestCase):
    def test_two_spheres(self):
        spec = preset_spheres('two_spheres')
        self.assertEqual([s.center for s in spec.spheres], [(-0.6, 0.0, 0.0), (0.6, 0.0, 0.0)])
        self.assertEqual(spec.max_amplitude, 1.04)

    def test_scaled_preset(self):
        preset = paper_preset('one_sphere', k_scale=0.1)
        self.assertAlmostEqual(preset.partition.k_bar, 11.97)
        self.assertAlmostEqual(preset.partition.k_lower, 10.83)
        self.assertEqual(preset.plane.z, 49.5)
        self.assertEqual(preset.grid.bbox, (-3.75, 3.75, -3.75, 3.75, -6.8, 0.7))

    def test_unknown_case(self):
        with self.assertRaises(InvalidInput):
            preset_spheres('three_spheres')
        with self.assertRaises(InvalidInput):
            paper_preset('one_sphere', k_scale=1.5)
