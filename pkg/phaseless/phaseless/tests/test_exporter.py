import os
import tempfile

import numpy as np
from django.test import SimpleTestCase

from ..errors import InvalidInput
from ..exporter import export_slice, sidecar_path, slice_values
from ..grid import ComplexPlaneData, Grid3, PlaneGrid, RealField3


class ExportTests(SimpleTestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.grid = Grid3((4, 3, 5), (0, 1, 0, 1, 0, 1))

    def tearDown(self):
        self.directory.cleanup()

    def path(self, name):
        return os.path.join(self.directory.name, name)

    def test_constant_field_is_constant_gray(self):
        field = RealField3(self.grid, np.full(self.grid.shape, 2.5))
        path = export_slice(field, 2, 1, self.path('c.pgm'), 'pgm')
        with open(path, 'rb') as fd:
            blob = fd.read()
        header = b'P5\n4 3\n65535\n'
        self.assertTrue(blob.startswith(header))
        pixels = np.frombuffer(blob[len(header):], dtype='>u2')
        self.assertEqual(pixels.size, 12)
        self.assertEqual(len(np.unique(pixels)), 1)
        with open(sidecar_path(path)) as fd:
            self.assertEqual(fd.read(), 'min 2.5\nmax 2.5\n')

    def test_pgm_scaling(self):
        values = np.zeros(self.grid.shape)
        values[3, 2, 0] = 4.0
        export_slice(RealField3(self.grid, values), 2, 0, self.path('s.pgm'), 'pgm')
        with open(self.path('s.pgm'), 'rb') as fd:
            pixels = np.frombuffer(fd.read()[len(b'P5\n4 3\n65535\n'):], dtype='>u2').reshape(3, 4)
        self.assertEqual(pixels[2, 3], 65535)
        self.assertEqual(int(pixels.sum()), 65535)

    def test_vacuum_modulus_csv(self):
        plane = PlaneGrid(49.5, 3.75, (6, 5))
        data = ComplexPlaneData(plane, [11.97], np.full((6, 5), np.exp(1j * 11.97 * 49.5)))
        path = export_slice(data, 0, 0, self.path('u.csv'), 'csv')
        with open(path) as fd:
            rows = [line.split(',') for line in fd.read().splitlines()]
        self.assertEqual((len(rows), len(rows[0])), (5, 6))
        np.testing.assert_allclose(np.array(rows, dtype=float), 1.0, rtol=1e-15)

    def test_parts(self):
        field = RealField3(self.grid, np.arange(60.0))
        np.testing.assert_array_equal(slice_values(field, 0, 1, 'real'), field.values[1])
        np.testing.assert_array_equal(slice_values(field, 0, 1, 'imag'), 0.0)

    def test_out_of_range(self):
        field = RealField3(self.grid, np.ones(self.grid.shape))
        with self.assertRaises(InvalidInput):
            export_slice(field, 2, 5, self.path('x.csv'))
        with self.assertRaises(InvalidInput):
            export_slice(field, 3, 0, self.path('x.csv'))
        with self.assertRaises(InvalidInput):
            export_slice(field, 0, 0, self.path('x.png'), 'png')
