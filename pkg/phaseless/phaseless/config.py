# _*_ coding: utf-8 _*_
'''
Run configuration documents.

A config is a JSON object of named blocks. Each block is read through a field spec
mapping JSON keys to attributes, with a coercion function per key; every violation is
collected and reported together in one ConfigError.
'''

import json
import math
from collections import namedtuple, Counter

from .errors import ConfigError
from .forward import SolverSettings
from .grid import PlaneGrid, WavenumberPartition
from .libs import constants
from .phantom import MicrosphereSpec, PhantomSpec, preset_geometry
from .reconstruct import AlgorithmSettings


FieldDefinition = namedtuple('FieldSpec', ['attribute', 'key', 'coerce', 'optional', 'default'])
field_definition_default = FieldDefinition('<replace>', '<replace>', None, True, None)


def make_field_definition(attribute, key, **kwargs):
    return field_definition_default._replace(attribute=attribute, key=key, **kwargs)


def get_float(value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError('expected a number, got %r' % (value,))
    value = float(value)
    if not math.isfinite(value):
        raise ValueError('expected a finite number, got %r' % (value,))
    return value


def get_optional_float(value):
    return None if value is None else get_float(value)


def get_int(value):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError('expected an integer, got %r' % (value,))
    return value


def get_optional_int(value):
    return None if value is None else get_int(value)


def get_bool(value):
    if not isinstance(value, bool):
        raise ValueError('expected true or false, got %r' % (value,))
    return value


def float_list(length):
    def coerce(value):
        if not isinstance(value, list) or len(value) != length:
            raise ValueError('expected a list of %d numbers, got %r' % (length, value))
        return [get_float(v) for v in value]
    return coerce


def int_list(length):
    def coerce(value):
        if not isinstance(value, list) or len(value) != length:
            raise ValueError('expected a list of %d integers, got %r' % (length, value))
        return [get_int(v) for v in value]
    return coerce


def get_spheres(value):
    if not isinstance(value, list):
        raise ValueError('expected a list of spheres, got %r' % (value,))
    spheres = []
    for index, entry in enumerate(value):
        if not isinstance(entry, dict):
            raise ValueError('sphere %d is not an object' % index)
        unknown = sorted(set(entry) - {'center', 'radius', 'amplitude'})
        if unknown:
            raise ValueError('sphere %d has unknown keys %s' % (index, unknown))
        if 'center' not in entry:
            raise ValueError('sphere %d has no center' % index)
        spheres.append({
            'center': float_list(3)(entry['center']),
            'radius': get_float(entry.get('radius', constants.MICROSPHERE_RADIUS)),
            'amplitude': get_float(entry.get('amplitude', constants.MICROSPHERE_AMPLITUDE)),
        })
    return spheres


geometry_field_spec = [
    make_field_definition('bbox', 'bbox', coerce=float_list(6), default=list(preset_geometry())),
    make_field_definition('gamma_level', 'gamma_level', coerce=get_float, default=constants.D2),
    make_field_definition('plane_z', 'plane_z', coerce=get_float, default=constants.PLANE_Z),
    make_field_definition('half_width', 'half_width', coerce=get_float, default=constants.HALF_WIDTH),
    make_field_definition('plane_counts', 'plane_counts', coerce=int_list(2), default=list(constants.PLANE_COUNTS)),
]

band_field_spec = [
    make_field_definition('k_low', 'k_low', coerce=get_float, default=constants.K_LOWER),
    make_field_definition('k_high', 'k_high', coerce=get_float, default=constants.K_UPPER),
    make_field_definition('N', 'N', coerce=get_int, default=constants.PARTITION_SIZE),
    make_field_definition('k_scale', 'k_scale', coerce=get_float, default=1.0),
]

phantom_field_spec = [
    make_field_definition('spheres', 'spheres', coerce=get_spheres,
                          default=[{'center': [0.0, 0.0, 0.0],
                                    'radius': constants.MICROSPHERE_RADIUS,
                                    'amplitude': constants.MICROSPHERE_AMPLITUDE}]),
]

solver_field_spec = [
    make_field_definition('tol', 'tol', coerce=get_float, default=1e-6),
    make_field_definition('maxiter', 'maxiter', coerce=get_int, default=500),
    make_field_definition('restart', 'restart', coerce=get_int, default=30),
    make_field_definition('ppw', 'ppw', coerce=get_float, default=10.0),
    make_field_definition('memory_budget', 'memory_budget', coerce=get_optional_int, default=None),
]

pipeline_field_spec = [
    make_field_definition('noise', 'noise', coerce=get_float, default=0.0),
    make_field_definition('seed', 'seed', coerce=get_int, default=0),
    make_field_definition('epsilon', 'epsilon', coerce=get_optional_float, default=None),
    make_field_definition('inner_iterations', 'inner_iterations', coerce=get_int, default=constants.INNER_ITERATIONS),
    make_field_definition('c_max', 'c_max', coerce=get_float, default=constants.C_MAX),
    make_field_definition('reconstruction_ppw', 'reconstruction_ppw', coerce=get_float, default=6.0),
    make_field_definition('window_start', 'window_start', coerce=get_int, default=constants.STOPPING_WINDOW_START),
    make_field_definition('n0', 'n0', coerce=get_float, default=constants.BACKGROUND_INDEX),
    make_field_definition('pad', 'pad', coerce=get_int, default=2),
    make_field_definition('upwind', 'upwind', coerce=get_bool, default=False),
]

BLOCKS = (
    ('geometry', geometry_field_spec, True),
    ('band', band_field_spec, True),
    ('phantom', phantom_field_spec, False),
    ('solver', solver_field_spec, False),
    ('pipeline', pipeline_field_spec, False),
)


class BlockReader(object):
    '''
    Reads one block of a config document against its field spec, logging every
    problem instead of stopping at the first.
    '''

    def __init__(self, name, field_spec, block):
        self._log = []
        self.name = name
        self.field_spec = field_spec
        names = [spec.attribute for spec in field_spec]
        if len(set(names)) != len(names):
            raise Exception("duplicate `attribute` in field definition: %s" % [t for (t, c) in Counter(names).items() if c > 1])
        self.values = self._read(block)

    def _error(self, s):
        self._log.append(s)

    def get_errors(self):
        return self._log.copy()

    def _read(self, block):
        if not isinstance(block, dict):
            self._error('block `%s` must be an object' % self.name)
            return {}
        known = {spec.key for spec in self.field_spec}
        for key in sorted(set(block) - known):
            self._error('unknown key `%s.%s`' % (self.name, key))
        values = {}
        for spec in self.field_spec:
            if spec.key not in block:
                if not spec.optional:
                    self._error('missing key `%s.%s`' % (self.name, spec.key))
                values[spec.attribute] = spec.default
                continue
            try:
                values[spec.attribute] = spec.coerce(block[spec.key])
            except ValueError as e:
                self._error('`%s.%s`: %s' % (self.name, spec.key, e))
                values[spec.attribute] = spec.default
        return values


class ConfigDoc(object):
    def __init__(self, blocks):
        self.blocks = blocks

    def __getattr__(self, name):
        blocks = self.__dict__.get('blocks', {})
        if name in blocks:
            return blocks[name]
        raise AttributeError(name)

    def to_dict(self):
        "the normalized document, defaults included; reading it back gives the same document"
        return json.loads(json.dumps(self.blocks))

    def with_overrides(self, k_scale=None, noise=None, seed=None):
        blocks = self.to_dict()
        if k_scale is not None:
            blocks['band']['k_scale'] = float(k_scale)
        if noise is not None:
            blocks['pipeline']['noise'] = float(noise)
        if seed is not None:
            blocks['pipeline']['seed'] = int(seed)
        return parse_config(blocks)

    @property
    def bbox(self):
        return tuple(self.geometry['bbox'])

    def plane(self):
        g = self.geometry
        return PlaneGrid(g['plane_z'], g['half_width'], tuple(g['plane_counts']))

    def partition(self):
        b = self.band
        return WavenumberPartition.from_band(b['k_scale'] * b['k_low'], b['k_scale'] * b['k_high'], b['N'])

    def phantom_spec(self):
        return PhantomSpec(tuple(MicrosphereSpec(tuple(s['center']), s['radius'], s['amplitude'])
                                 for s in self.phantom['spheres']))

    def solver_settings(self, workers=None, ppw=None):
        s = self.solver
        return SolverSettings(tol=s['tol'], maxiter=s['maxiter'], restart=s['restart'],
                              points_per_wavelength=ppw or s['ppw'], workers=workers)

    def algorithm_settings(self, workers=None):
        p = self.pipeline
        return AlgorithmSettings(
            inner_iterations=p['inner_iterations'], c_max=p['c_max'], epsilon=p['epsilon'],
            window_start=p['window_start'], n0=p['n0'], pad=p['pad'], upwind=p['upwind'],
            solver=self.solver_settings(workers, ppw=p['reconstruction_ppw']))


def _check_consistency(blocks):
    errors = []
    g, b, s, p = blocks['geometry'], blocks['band'], blocks['solver'], blocks['pipeline']
    bbox = g['bbox']
    for axis in range(3):
        if bbox[2 * axis + 1] <= bbox[2 * axis]:
            errors.append('geometry.bbox axis %d has max <= min' % (axis + 1))
    if g['gamma_level'] != bbox[5]:
        errors.append('geometry.gamma_level %r differs from the top of the bbox %r' % (g['gamma_level'], bbox[5]))
    if g['plane_z'] <= bbox[5]:
        errors.append('geometry.plane_z %r must lie above Omega (x3 > %r)' % (g['plane_z'], bbox[5]))
    if not g['half_width'] > 0:
        errors.append('geometry.half_width must be > 0')
    if min(g['plane_counts']) < 2:
        errors.append('geometry.plane_counts must be >= 2')
    if not b['k_low'] < b['k_high']:
        errors.append('band.k_low %r must be below band.k_high %r' % (b['k_low'], b['k_high']))
    if b['N'] < 3:
        errors.append('band.N must be >= 3, got %r' % b['N'])
    if not 0 < b['k_scale'] <= 1:
        errors.append('band.k_scale must lie in (0, 1], got %r' % b['k_scale'])
    elif b['k_scale'] * b['k_low'] < 1:
        errors.append('band.k_low after scaling must be >= 1')
    for index, sphere in enumerate(blocks['phantom']['spheres']):
        if not sphere['radius'] > 0:
            errors.append('phantom.spheres[%d].radius must be > 0' % index)
        if sphere['amplitude'] < 0:
            errors.append('phantom.spheres[%d].amplitude must be >= 0' % index)
        for axis in range(3):
            c, r = sphere['center'][axis], sphere['radius']
            if c - r < bbox[2 * axis] or c + r > bbox[2 * axis + 1]:
                errors.append('phantom.spheres[%d] leaves the bbox along x%d' % (index, axis + 1))
                break
    if not 0 < s['tol'] < 1:
        errors.append('solver.tol must lie in (0, 1)')
    if s['maxiter'] < 1 or s['restart'] < 1:
        errors.append('solver.maxiter and solver.restart must be >= 1')
    if s['ppw'] < 2:
        errors.append('solver.ppw must be >= 2')
    if s['memory_budget'] is not None and s['memory_budget'] <= 0:
        errors.append('solver.memory_budget must be > 0')
    if p['noise'] < 0:
        errors.append('pipeline.noise must be >= 0')
    if p['epsilon'] is not None and not p['epsilon'] > 0:
        errors.append('pipeline.epsilon must be > 0')
    elif p['epsilon'] is not None and not p['epsilon'] * b['k_scale'] * b['k_high'] < math.pi:
        errors.append('pipeline.epsilon %r times the scaled k_high must stay below pi' % p['epsilon'])
    if p['inner_iterations'] < 1:
        errors.append('pipeline.inner_iterations must be >= 1')
    if not p['c_max'] > 1:
        errors.append('pipeline.c_max must be > 1')
    if p['reconstruction_ppw'] < 3:
        errors.append('pipeline.reconstruction_ppw must be >= 3')
    if not 1 <= p['window_start'] <= b['N']:
        errors.append('pipeline.window_start must lie in [1, band.N]')
    if p['n0'] < 1:
        errors.append('pipeline.n0 must be >= 1')
    if p['pad'] < 1:
        errors.append('pipeline.pad must be >= 1')
    return errors


def parse_config(document):
    if not isinstance(document, dict):
        raise ConfigError('a config must be a JSON object')
    errors = []
    known = [name for name, _, _ in BLOCKS]
    for key in sorted(set(document) - set(known)):
        errors.append('unknown block `%s`' % key)
    missing = [name for name, _, required in BLOCKS if required and name not in document]
    if missing:
        errors.append('missing required block(s): %s' % ', '.join(missing))
    blocks = {}
    for name, spec, _ in BLOCKS:
        reader = BlockReader(name, spec, document.get(name, {}))
        errors.extend(reader.get_errors())
        blocks[name] = reader.values
    if not errors:
        errors.extend(_check_consistency(blocks))
    if errors:
        raise ConfigError(errors)
    return ConfigDoc(blocks)


def read_config(path):
    try:
        with open(path, encoding='utf-8') as fd:
            text = fd.read()
    except OSError as e:
        raise ConfigError('cannot read config %s: %s' % (path, e))
    if not text.strip():
        return parse_config({})
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError('%s: parse error: %s' % (path, e))
    return parse_config(document)


def default_config():
    return parse_config({'geometry': {}, 'band': {}})
