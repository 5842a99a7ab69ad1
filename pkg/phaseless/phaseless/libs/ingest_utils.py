"""
Intensity tables: one row per (plane node, wavenumber) with header x1,x2,k,f.
"""

import csv
import logging
import math

import numpy as np

from ..errors import FieldFormatError
from ..grid import IntensityData, PlaneGrid

logger = logging.getLogger("rainbow")

CSV_HEADER = ['x1', 'x2', 'k', 'f']


def format_float(value):
    "shortest round-tripping text for a float"
    return repr(float(value))


def get_clean_number(val, row_number, column):
    try:
        number = float(val)
    except (TypeError, ValueError):
        raise FieldFormatError('row %d: `%s` is not a number: %r' % (row_number, column, val))
    if not math.isfinite(number):
        raise FieldFormatError('row %d: `%s` is not finite: %r' % (row_number, column, val))
    return number


def write_intensity_csv(path, intensity):
    "rows sorted by (k, x2, x1) with k ascending"
    x1, x2 = intensity.plane.axes()
    order = np.argsort(intensity.k_values, kind='stable')
    with open(path, 'w', newline='', encoding='utf-8') as fd:
        w = csv.writer(fd, lineterminator='\n')
        w.writerow(CSV_HEADER)
        for index in order:
            k = format_float(intensity.k_values[index])
            values = intensity.values[index]
            for j, b in enumerate(x2):
                for i, a in enumerate(x1):
                    w.writerow([format_float(a), format_float(b), k, format_float(values[i, j])])


def _plane_from_axes(x1, x2, z, path):
    half_width = float(x1[-1])
    plane = PlaneGrid(z, half_width, (len(x1), len(x2)))
    e1, e2 = plane.axes()
    if not (np.allclose(x1, e1, rtol=0, atol=1e-9 * half_width) and np.allclose(x2, e2, rtol=0, atol=1e-9 * half_width)):
        raise FieldFormatError('%s: nodes do not form a centred uniform square plane grid' % path)
    return plane


def read_intensity_csv(path, z):
    """
    Read an intensity table into IntensityData on the plane x3 = z. The plane nodes are
    recovered from the rows; every (node, k) pair must be present exactly once.
    """
    rows = []
    with open(path, newline='', encoding='utf-8') as fd:
        reader = csv.reader(fd)
        header = next(reader, None)
        if header is None:
            raise FieldFormatError('%s: empty intensity file' % path)
        if [h.strip() for h in header] != CSV_HEADER:
            raise FieldFormatError('%s: header must be %s, got %s' % (path, ','.join(CSV_HEADER), ','.join(header)))
        for row_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise FieldFormatError('%s: row %d has %d columns' % (path, row_number, len(row)))
            values = [get_clean_number(v, row_number, c) for v, c in zip(row, CSV_HEADER)]
            if values[3] < 0:
                raise FieldFormatError('%s: row %d: negative intensity %r' % (path, row_number, values[3]))
            rows.append(values)
    if not rows:
        raise FieldFormatError('%s: no intensity rows' % path)
    table = np.array(rows)
    x1 = np.unique(table[:, 0])
    x2 = np.unique(table[:, 1])
    k_values = np.unique(table[:, 2])
    if table.shape[0] != x1.size * x2.size * k_values.size:
        raise FieldFormatError('%s: %d rows do not cover %d x %d nodes at %d wavenumbers exactly once' % (
            path, table.shape[0], x1.size, x2.size, k_values.size))
    values = np.full((k_values.size, x1.size, x2.size), np.nan)
    ik = np.searchsorted(k_values, table[:, 2])
    i1 = np.searchsorted(x1, table[:, 0])
    i2 = np.searchsorted(x2, table[:, 1])
    values[ik, i1, i2] = table[:, 3]
    if np.any(np.isnan(values)):
        raise FieldFormatError('%s: duplicated (node, k) rows' % path)
    plane = _plane_from_axes(x1, x2, z, path)
    logger.info('read %d intensity rows from %s (%d wavenumbers)' % (table.shape[0], path, k_values.size))
    return IntensityData(plane, k_values[::-1], values[::-1])
