import os

import numpy as np

from ._base import PhaselessCommand
from ...libs.field_io import write_plane_data
from ...libs.ingest_utils import read_intensity_csv
from ...phase import interpolate_in_k, retrieved_phi
from ...pipeline import INTENSITY_FILE, PHASED_FILE, base_summary, clamp_summary, pairs, retrieve, write_summary


class Command(PhaselessCommand):
    help = 'Recover the complex field on the measurement plane from intensity data'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--input', type=str, default=None, help='intensity CSV (default: OUT/intensity.csv)')

    def run(self, config, out, workers, **options):
        path = options['input'] or os.path.join(out, INTENSITY_FILE)
        intensity = read_intensity_csv(path, config.geometry['plane_z'])
        partition = config.partition()
        if intensity.k_values.size != len(partition.k_values) or \
                not np.allclose(np.sort(intensity.k_values), np.sort(partition.as_array()), rtol=1e-12, atol=0):
            intensity = interpolate_in_k(intensity, partition)
        phased, clamp = retrieve(intensity)
        write_plane_data(os.path.join(out, PHASED_FILE), phased)
        summary = base_summary(config, 'retrieve')
        summary['retrieval'] = clamp_summary(clamp)
        summary['retrieval']['phi'] = pairs(retrieved_phi(phased))
        write_summary(out, summary)
