import os

from ._base import PhaselessCommand
from ...libs.field_io import read_plane_data
from ...pipeline import PHASED_FILE, base_summary, reconstruct, write_summary


class Command(PhaselessCommand):
    help = 'Reconstruct n^2 in Omega from phased data on the measurement plane'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--input', type=str, default=None, help='phased plane data (default: OUT/phased.psf)')

    def run(self, config, out, workers, **options):
        path = options['input'] or os.path.join(out, PHASED_FILE)
        phased = read_plane_data(path, config.geometry['plane_z'])
        result = reconstruct(phased, config, out, workers)
        summary = base_summary(config, 'reconstruct')
        summary['reconstruction'] = result.summary()
        write_summary(out, summary)
