"""
Binary field files and HDF5 result bundles.

A field file is a fixed little-endian header followed by the payload:

    magic "PSF1" | version u32 | kind u8 (0 real, 1 complex) | dims 3 x u64 | bbox 6 x f64

then dims[0] * dims[1] * dims[2] float64 values (re/im interleaved when complex), x1 fastest.
Plane x wavenumber data reuses the format with dims (m1, m2, nk) and bbox
(-b, b, -b, b, k_first, k_last); the wavenumbers must then be uniformly spaced.
"""

import json
import logging
import struct

import h5py
import numpy as np

from ..errors import FieldFormatError
from ..grid import ComplexField3, ComplexPlaneData, Grid3, PlaneGrid, RealField3

logger = logging.getLogger("rainbow")

MAGIC = b'PSF1'
VERSION = 1
HEADER = struct.Struct('<4sIB3Q6d')
KIND_REAL = 0
KIND_COMPLEX = 1


def _payload(values, kind):
    flat = np.asarray(values).ravel(order='F')
    if kind == KIND_COMPLEX:
        interleaved = np.empty(2 * flat.size, dtype='<f8')
        interleaved[0::2] = flat.real
        interleaved[1::2] = flat.imag
        return interleaved.tobytes()
    return flat.astype('<f8').tobytes()


def _write(path, kind, dims, bbox, values):
    header = HEADER.pack(MAGIC, VERSION, kind, *[int(d) for d in dims], *[float(b) for b in bbox])
    with open(path, 'wb') as fd:
        fd.write(header)
        fd.write(_payload(values, kind))


def _read(path):
    with open(path, 'rb') as fd:
        blob = fd.read()
    if len(blob) < HEADER.size:
        raise FieldFormatError('%s: truncated header (%d bytes)' % (path, len(blob)))
    magic, version, kind, d1, d2, d3, *bbox = HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FieldFormatError('%s: bad magic %r' % (path, magic))
    if version != VERSION:
        raise FieldFormatError('%s: unsupported version %d' % (path, version))
    if kind not in (KIND_REAL, KIND_COMPLEX):
        raise FieldFormatError('%s: unknown kind %d' % (path, kind))
    dims = (d1, d2, d3)
    width = 16 if kind == KIND_COMPLEX else 8
    expected = d1 * d2 * d3 * width
    payload = blob[HEADER.size:]
    if len(payload) != expected:
        raise FieldFormatError('%s: payload has %d bytes, header promises %d' % (path, len(payload), expected))
    flat = np.frombuffer(payload, dtype='<f8').astype(np.float64)
    if kind == KIND_COMPLEX:
        flat = flat[0::2] + 1j * flat[1::2]
    return kind, dims, tuple(bbox), flat.reshape(dims, order='F')


def write_field(path, field):
    kind = KIND_COMPLEX if np.iscomplexobj(field.values) else KIND_REAL
    _write(path, kind, field.grid.shape, field.grid.bbox, field.values)


def read_field(path):
    kind, dims, bbox, values = _read(path)
    grid = Grid3(dims, bbox)
    return (ComplexField3 if kind == KIND_COMPLEX else RealField3)(grid, values)


def write_plane_data(path, data):
    k = np.asarray(data.k_values, dtype=float)
    if k.size > 2 and np.max(np.abs(np.diff(k) - (k[-1] - k[0]) / (k.size - 1))) > 1e-12 * np.max(np.abs(k)):
        raise FieldFormatError('plane data files need uniformly spaced wavenumbers')
    b = data.plane.half_width
    values = np.moveaxis(np.asarray(data.values), 0, -1)
    kind = KIND_COMPLEX if np.iscomplexobj(values) else KIND_REAL
    _write(path, kind, values.shape, (-b, b, -b, b, k[0], k[-1]), values)


def read_plane_data(path, z, data_class=ComplexPlaneData):
    "plane data written by write_plane_data; the plane height is not stored and comes from the caller"
    _, dims, bbox, values = _read(path)
    m1, m2, nk = dims
    if bbox[0] != -bbox[1] or bbox[2] != -bbox[3] or bbox[1] != bbox[3]:
        raise FieldFormatError('%s: plane extent %s is not a centred square' % (path, bbox[:4]))
    if nk == 1:
        k_values = [bbox[4]]
    else:
        k_values = np.linspace(bbox[4], bbox[5], nk)
    plane = PlaneGrid(z, bbox[1], (m1, m2))
    return data_class(plane, k_values, np.moveaxis(values, -1, 0))


def write_result_bundle(path, result, config=None):
    "one HDF5 file holding the reconstruction, its history and the config echo"
    with h5py.File(path, 'w') as bundle:
        grid = result.c.grid
        for name, field in (('c', result.c), ('n_rel', result.n_rel)):
            dataset = bundle.create_dataset(name, data=np.asarray(field.values))
            dataset.attrs['bbox'] = np.asarray(grid.bbox, dtype=float)
        bundle.create_dataset('history', data=np.asarray([(h['n'], h['relative_change']) for h in result.summary()['history']],
                                                          dtype=float).reshape(-1, 2))
        bundle.attrs['n_star'] = int(result.n_star)
        bundle.attrs['n_comp_rel'] = float(result.n_comp_rel)
        bundle.attrs['n_comp'] = float(result.n_comp)
        bundle.attrs['maxima'] = json.dumps(result.summary()['maxima'], sort_keys=True)
        bundle.attrs['config'] = json.dumps(config or {}, sort_keys=True)
    logger.info('wrote result bundle %s' % path)


def read_result_bundle(path):
    "the bundle contents as plain python values and fields"
    try:
        bundle = h5py.File(path, 'r')
    except OSError as e:
        raise FieldFormatError('%s: not a result bundle: %s' % (path, e))
    with bundle:
        if 'c' not in bundle or 'n_rel' not in bundle:
            raise FieldFormatError('%s: result bundle lacks c or n_rel' % path)
        grid = Grid3(bundle['c'].shape, tuple(bundle['c'].attrs['bbox']))
        return {
            'c': RealField3(grid, bundle['c'][()]),
            'n_rel': RealField3(grid, bundle['n_rel'][()]),
            'history': [{'n': int(n), 'relative_change': float(r)} for n, r in bundle['history'][()]],
            'n_star': int(bundle.attrs['n_star']),
            'n_comp_rel': float(bundle.attrs['n_comp_rel']),
            'n_comp': float(bundle.attrs['n_comp']),
            'maxima': json.loads(bundle.attrs['maxima']),
            'config': json.loads(bundle.attrs['config']),
        }
