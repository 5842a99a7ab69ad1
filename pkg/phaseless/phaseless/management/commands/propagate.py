import os

import numpy as np

from ._base import PhaselessCommand
from ...libs.field_io import read_plane_data, write_plane_data
from ...pipeline import PHASED_FILE, PROPAGATED_FILE, base_summary, write_summary
from ...propagate import angular_spectrum
from ...reconstruct import stage


class Command(PhaselessCommand):
    help = 'Propagate phased plane data to the top face of Omega'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--input', type=str, default=None, help='phased plane data (default: OUT/phased.psf)')

    def run(self, config, out, workers, **options):
        path = options['input'] or os.path.join(out, PHASED_FILE)
        phased = read_plane_data(path, config.geometry['plane_z'])
        top = config.bbox[5]
        with stage('propagate'):
            moved = angular_spectrum(phased, top, pad=config.pipeline['pad'], workers=workers)
        write_plane_data(os.path.join(out, PROPAGATED_FILE), moved)
        summary = base_summary(config, 'propagate')
        summary['propagation'] = {
            'from_z': phased.plane.z,
            'to_z': top,
            'max_modulus': [{'k': float(k), 'value': float(np.max(np.abs(moved.at(k))))} for k in moved.k_values],
        }
        write_summary(out, summary)
