import logging
import os

import scipy.fft
from django.conf import settings
from django.core.management.base import BaseCommand

from ...config import default_config, read_config
from ...errors import ConfigError
from ...util import ensure_directory

logger = logging.getLogger("rainbow")


def resolve_config_path(name):
    "a path, or the name of a config shipped in PHASELESS_CONFIG_DIRECTORY"
    if os.path.exists(name):
        return name
    shipped = os.path.join(settings.PHASELESS_CONFIG_DIRECTORY, name if name.endswith('.json') else name + '.json')
    if os.path.exists(shipped):
        return shipped
    raise ConfigError('config %s not found' % name)


class PhaselessCommand(BaseCommand):
    "flags shared by every subcommand; subclasses implement run()"

    def add_arguments(self, parser):
        parser.add_argument('--config', type=str, default=None, help='JSON run configuration (path or shipped name)')
        parser.add_argument('--out', type=str, default='.', help='output directory')
        parser.add_argument('--noise', type=float, default=None, help='multiplicative noise level on intensity')
        parser.add_argument('--seed', type=int, default=None, help='noise seed')
        parser.add_argument('--k-scale', type=float, default=None, dest='k_scale', help='wavenumber band scale in (0, 1]')
        parser.add_argument('--threads', type=int, default=None, help='FFT worker threads')

    def load_config(self, options):
        config = read_config(resolve_config_path(options['config'])) if options['config'] else default_config()
        return config.with_overrides(k_scale=options['k_scale'], noise=options['noise'], seed=options['seed'])

    def handle(self, *args, **options):
        config = self.load_config(options)
        threads = options['threads'] or settings.PHASELESS_THREADS
        if threads < 1:
            raise ConfigError('--threads must be >= 1')
        out = ensure_directory(options['out'])
        logger.debug('%s: out=%s threads=%d' % (type(self).__module__, out, threads))
        with scipy.fft.set_workers(threads):
            rest = {key: value for key, value in options.items() if key not in ('config', 'out', 'workers')}
            self.run(config, out, threads, **rest)

    def run(self, config, out, workers, **options):
        raise NotImplementedError
