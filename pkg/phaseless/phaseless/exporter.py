"""
Plot-ready slices of volume fields and plane data: a CSV matrix, or a 16-bit binary
PGM with the min/max of the scaling kept in a sidecar text file.
"""

import csv
import logging
import os

import numpy as np

from .errors import InvalidInput
from .libs.ingest_utils import format_float

logger = logging.getLogger("rainbow")

PGM_MAXVAL = 65535
PARTS = {
    'abs': np.abs,
    'real': np.real,
    'imag': np.imag,
}


def slice_values(field, axis, index, part='abs'):
    """
    The 2D slice values[..., index, ...] along axis of a volume field (axes x1, x2, x3)
    or of plane data (axis 0 picks a wavenumber). Returned with shape (columns, rows).
    """
    values = np.asarray(field.values)
    if axis not in (0, 1, 2):
        raise InvalidInput('slice axis must be 0, 1 or 2, got %r' % (axis,))
    if not 0 <= index < values.shape[axis]:
        raise InvalidInput('slice index %r is out of range [0, %d) along axis %d' % (index, values.shape[axis], axis))
    if part not in PARTS:
        raise InvalidInput('unknown part %r, expected one of %s' % (part, sorted(PARTS)))
    return PARTS[part](np.take(values, index, axis=axis))


def sidecar_path(path):
    return os.path.splitext(path)[0] + '.txt'


def write_csv_matrix(path, matrix):
    "one CSV row per second-axis index, one column per first-axis index"
    with open(path, 'w', newline='', encoding='utf-8') as fd:
        w = csv.writer(fd, lineterminator='\n')
        for row in matrix.T:
            w.writerow([format_float(v) for v in row])


def write_pgm(path, matrix):
    lo, hi = float(np.min(matrix)), float(np.max(matrix))
    if hi > lo:
        scaled = np.rint((matrix - lo) / (hi - lo) * PGM_MAXVAL)
    else:
        scaled = np.full(matrix.shape, (PGM_MAXVAL + 1) // 2)
    pixels = scaled.T.astype('>u2')
    height, width = pixels.shape
    with open(path, 'wb') as fd:
        fd.write(b'P5\n%d %d\n%d\n' % (width, height, PGM_MAXVAL))
        fd.write(pixels.tobytes())
    with open(sidecar_path(path), 'w', encoding='utf-8') as fd:
        fd.write('min %s\nmax %s\n' % (format_float(lo), format_float(hi)))


def export_slice(field, axis, index, path, fmt='csv', part='abs'):
    matrix = slice_values(field, axis, index, part)
    if fmt == 'csv':
        write_csv_matrix(path, matrix)
    elif fmt == 'pgm':
        write_pgm(path, matrix)
    else:
        raise InvalidInput('unknown export format %r, expected csv or pgm' % (fmt,))
    logger.info('exported %s slice %d along axis %d to %s' % (part, index, axis, path))
    return path
