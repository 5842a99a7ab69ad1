import json
import os

from django.conf import settings
from django.test import SimpleTestCase

from ..config import default_config, parse_config, read_config
from ..errors import ConfigError
from ..util import temporary_file


def shipped(name):
    return os.path.join(settings.PHASELESS_CONFIG_DIRECTORY, name)


class ReadConfigTests(SimpleTestCase):
    def test_experiment_preset(self):
        config = read_config(shipped('paper_one_sphere.json'))
        plane = config.plane()
        self.assertEqual(plane.z, 49.5)
        self.assertEqual(plane.half_width, 3.75)
        self.assertEqual(plane.counts, (100, 100))
        self.assertEqual(config.partition().k_bar, 119.7)
        self.assertEqual(len(config.phantom_spec().spheres), 1)

    def test_shipped_configs_parse(self):
        for name in sorted(os.listdir(settings.PHASELESS_CONFIG_DIRECTORY)):
            if name.endswith('.json'):
                read_config(shipped(name))

    def test_defaults_are_the_experiment_preset(self):
        self.assertEqual(default_config().to_dict(), read_config(shipped('paper_one_sphere.json')).to_dict())

    def test_empty_file_names_required_blocks(self):
        with temporary_file('', suffix='.json') as path:
            with self.assertRaises(ConfigError) as raised:
                read_config(path)
        self.assertIn('geometry', str(raised.exception))
        self.assertIn('band', str(raised.exception))

    def test_parse_error(self):
        with temporary_file('{"geometry": ', suffix='.json') as path:
            with self.assertRaisesMessage(ConfigError, 'parse error'):
                read_config(path)

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            read_config('/nonexistent/phaseless.json')


class ValidationTests(SimpleTestCase):
    def test_band_order(self):
        with self.assertRaisesMessage(ConfigError, 'k_low'):
            parse_config({'geometry': {}, 'band': {'k_low': 120.0, 'k_high': 110.0}})

    def test_every_violation_is_listed(self):
        with self.assertRaises(ConfigError) as raised:
            parse_config({'geometry': {'colour': 1}, 'band': {'N': 'six'}, 'extra': {}})
        errors = raised.exception.errors
        self.assertEqual(len(errors), 3)
        self.assertTrue(any('geometry.colour' in e for e in errors))
        self.assertTrue(any('band.N' in e for e in errors))
        self.assertTrue(any('extra' in e for e in errors))

    def test_inconsistent_geometry(self):
        with self.assertRaisesMessage(ConfigError, 'gamma_level'):
            parse_config({'geometry': {'gamma_level': 0.5}, 'band': {}})
        with self.assertRaisesMessage(ConfigError, 'plane_z'):
            parse_config({'geometry': {'plane_z': 0.0}, 'band': {}})

    def test_sphere_outside_box(self):
        with self.assertRaisesMessage(ConfigError, 'leaves the bbox'):
            parse_config({'geometry': {}, 'band': {}, 'phantom': {'spheres': [{'center': [3.6, 0, 0]}]}})

    def test_epsilon_against_the_band(self):
        with self.assertRaisesMessage(ConfigError, 'pipeline.epsilon'):
            parse_config({'geometry': {}, 'band': {'k_scale': 1.0}, 'pipeline': {'epsilon': 0.05}})
        config = parse_config({'geometry': {}, 'band': {'k_scale': 0.1}, 'pipeline': {'epsilon': 0.05}})
        self.assertEqual(config.algorithm_settings().epsilon, 0.05)

    def test_booleans_are_not_numbers(self):
        with self.assertRaises(ConfigError):
            parse_config({'geometry': {}, 'band': {'N': True}})


class DocumentTests(SimpleTestCase):
    def test_echo_round_trips(self):
        config = read_config(shipped('scaled_two_spheres.json'))
        echo = json.loads(json.dumps(config.to_dict()))
        self.assertEqual(parse_config(echo).to_dict(), config.to_dict())

    def test_overrides(self):
        config = default_config().with_overrides(k_scale=0.1, noise=0.05, seed=3)
        self.assertAlmostEqual(config.partition().k_bar, 11.97)
        self.assertEqual(config.pipeline['noise'], 0.05)
        self.assertEqual(config.pipeline['seed'], 3)
        self.assertEqual(default_config().band['k_scale'], 1.0)
        with self.assertRaises(ConfigError):
            default_config().with_overrides(k_scale=2.0)

    def test_settings_objects(self):
        config = default_config()
        algorithm = config.algorithm_settings(workers=2)
        self.assertEqual(algorithm.inner_iterations, 3)
        self.assertEqual(algorithm.c_max, 6.0)
        self.assertEqual(algorithm.solver.points_per_wavelength, 6.0)
        self.assertEqual(algorithm.solver.workers, 2)
        self.assertEqual(config.solver_settings().points_per_wavelength, 10.0)
