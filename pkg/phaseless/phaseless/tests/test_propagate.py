import numpy as np
from django.test import SimpleTestCase

from ..errors import InvalidInput
from ..grid import ComplexPlaneData, Grid3, PlaneGrid
from ..propagate import (angular_spectrum, complement, complement_at, noise_statistics, normal_derivative,
                         propagate_to_boundary, resample_to_face)

R = 49.5
D2 = 0.7


def band_limited(plane, k, modes=((3, 2, 0.2), (-1, 4, 0.1j))):
    "exp(ikR) plus a few periodic transverse modes well inside the propagating disc"
    m1, m2 = plane.counts
    j1, j2 = np.meshgrid(np.arange(m1), np.arange(m2), indexing='ij')
    values = np.full(plane.counts, np.exp(1j * k * plane.z), dtype=complex)
    for p1, p2, amplitude in modes:
        values += amplitude * np.exp(2j * np.pi * (p1 * j1 / m1 + p2 * j2 / m2))
    return values


class AngularSpectrumTests(SimpleTestCase):
    def setUp(self):
        self.plane = PlaneGrid(R, 3.75, (64, 64))

    def test_plane_wave_maps_exactly(self):
        k = 11.97
        data = ComplexPlaneData(self.plane, [k], np.full((64, 64), np.exp(1j * k * R)))
        moved = angular_spectrum(data, D2)
        self.assertEqual(moved.plane.z, D2)
        np.testing.assert_allclose(moved.at(k), np.exp(1j * k * D2), rtol=0, atol=1e-12)

    def test_round_trip(self):
        k = 11.97
        values = band_limited(self.plane, k)
        data = ComplexPlaneData(self.plane, [k], values)
        back = angular_spectrum(angular_spectrum(data, D2, pad=1), R, pad=1)
        mask = self.plane.interior_half()
        error = np.linalg.norm(back.at(k)[mask] - values[mask]) / np.linalg.norm(values[mask])
        self.assertLessEqual(error, 1e-8)

    def test_zero_mean_energy_does_not_grow(self):
        rng = np.random.default_rng(3)
        values = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
        values -= values.mean()
        data = ComplexPlaneData(self.plane, [11.97], values)
        for pad in (1, 2):
            moved = angular_spectrum(data, D2, pad=pad)
            self.assertLessEqual(np.linalg.norm(moved.values), np.linalg.norm(values) * (1 + 1e-12))

    def test_selected_wavenumber(self):
        data = ComplexPlaneData(self.plane, [12.0, 11.0], np.ones((2, 64, 64)))
        moved = angular_spectrum(data, D2, k=11.0)
        self.assertEqual(list(moved.k_values), [11.0])

    def test_linearity(self):
        k_values = (11.97, 10.83)
        rng = np.random.default_rng(7)
        shape = (2, 64, 64)
        u = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        v = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        alpha, beta = 0.3 - 1.2j, 2.0 + 0.5j

        def moved(values):
            return angular_spectrum(ComplexPlaneData(self.plane, k_values, values), D2).values

        combined = moved(alpha * u + beta * v)
        expected = alpha * moved(u) + beta * moved(v)
        np.testing.assert_allclose(combined, expected, rtol=0, atol=1e-12 * float(np.max(np.abs(expected))))

    def test_worker_count_does_not_change_the_result(self):
        k = 11.97
        data = ComplexPlaneData(self.plane, [k], band_limited(self.plane, k))
        serial = angular_spectrum(data, D2, workers=1).at(k)
        threaded = angular_spectrum(data, D2, workers=3).at(k)
        np.testing.assert_allclose(threaded, serial, rtol=1e-12, atol=0)

    def test_invalid(self):
        data = ComplexPlaneData(self.plane, [12.0], np.ones((64, 64)))
        with self.assertRaises(InvalidInput):
            angular_spectrum(data, D2, pad=0)
        with self.assertRaises(InvalidInput):
            angular_spectrum(data, D2, k=13.0)
        with self.assertRaises(InvalidInput):
            normal_derivative(data, 12.0, D2, 0.0)

    def test_normal_derivative_of_plane_wave(self):
        k, eps = 12.0, 0.05
        data = ComplexPlaneData(self.plane, [k], np.full((64, 64), np.exp(1j * k * R)))
        p1 = normal_derivative(data, k, D2, eps)
        expected = (np.exp(1j * k * (D2 + eps)) - np.exp(1j * k * D2)) / eps
        np.testing.assert_allclose(p1, expected, rtol=1e-12)


class BoundaryTests(SimpleTestCase):
    def setUp(self):
        self.grid = Grid3((9, 9, 7), (-1, 1, -1, 1, -1, 0.5))

    def test_resample_identity_and_bilinear(self):
        plane = PlaneGrid(5.0, 1.0, (9, 9))
        values = np.arange(81, dtype=complex).reshape(9, 9)
        np.testing.assert_array_equal(resample_to_face(values, plane, self.grid), values)
        fine = PlaneGrid(5.0, 1.0, (17, 17))
        x1, x2 = fine.meshgrid()
        linear = 2.0 * x1 - x2 + 1j * x2
        g1, g2 = np.meshgrid(self.grid.axis(0), self.grid.axis(1), indexing='ij')
        np.testing.assert_allclose(resample_to_face(linear, fine, self.grid), 2.0 * g1 - g2 + 1j * g2, atol=1e-12)

    def test_complement(self):
        k = 2.0
        face = np.full((9, 9), 7.0 + 0j)
        out = complement_at(face, k, self.grid)
        self.assertTrue(np.all(out[self.grid.gamma_mask()] == 7.0))
        x3 = self.grid.axis(2)
        np.testing.assert_array_equal(out[0, 4, :], np.exp(1j * k * x3))
        np.testing.assert_array_equal(out[3, 3, 0], np.exp(1j * k * x3[0]))
        self.assertEqual(out[4, 4, 3], 0)

    def test_propagate_vacuum_to_boundary(self):
        plane = PlaneGrid(5.0, 1.0, (9, 9))
        k_values = (3.0, 2.5)
        data = ComplexPlaneData(plane, k_values, np.stack([np.full((9, 9), np.exp(1j * k * 5.0)) for k in k_values]))
        boundary = propagate_to_boundary(data, self.grid)
        self.assertEqual(boundary.epsilon, 0.25)
        self.assertEqual(boundary.k_bar, 3.0)
        np.testing.assert_allclose(boundary.at(2.5), np.exp(2.5j * 0.5), atol=1e-12)
        complemented = complement(boundary)
        mask = self.grid.boundary_mask()
        x3 = np.broadcast_to(self.grid.axis(2), self.grid.shape)
        np.testing.assert_allclose(complemented.at(3.0)[mask], np.exp(3j * x3[mask]), atol=1e-12)


class NoiseStatisticsTests(SimpleTestCase):
    def test_relative_deviation(self):
        plane = PlaneGrid(R, 1.0, (9, 9))
        clean = ComplexPlaneData(plane, [2.0], np.ones((9, 9)))
        self.assertEqual(noise_statistics(clean, clean), [(2.0, 0.0)])
        noisy = ComplexPlaneData(plane, [2.0], np.full((9, 9), 1.1))
        self.assertAlmostEqual(noise_statistics(clean, noisy)[0][1], 0.1)
