import os

from ._base import PhaselessCommand
from ...exporter import PARTS, export_slice
from ...libs.field_io import read_field, read_plane_data


class Command(PhaselessCommand):
    help = 'Write one slice of a field file as a CSV matrix or a 16-bit PGM image'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--input', type=str, required=True, help='PSF1 field or plane data file')
        parser.add_argument('--plane', action='store_true', help='the input holds plane x wavenumber data')
        parser.add_argument('--axis', type=int, default=2)
        parser.add_argument('--index', type=int, default=0)
        parser.add_argument('--format', choices=('csv', 'pgm'), default='csv')
        parser.add_argument('--part', choices=sorted(PARTS), default='abs')

    def run(self, config, out, workers, **options):
        path = options['input']
        if options['plane']:
            field = read_plane_data(path, config.geometry['plane_z'])
        else:
            field = read_field(path)
        stem = os.path.splitext(os.path.basename(path))[0]
        target = os.path.join(out, '%s_%s_axis%d_%d.%s' % (
            stem, options['part'], options['axis'], options['index'], options['format']))
        export_slice(field, options['axis'], options['index'], target, options['format'], options['part'])
