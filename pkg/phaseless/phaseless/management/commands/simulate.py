import os

from ._base import PhaselessCommand
from ...libs.field_io import write_plane_data
from ...libs.ingest_utils import write_intensity_csv
from ...phase import add_noise
from ...pipeline import INTENSITY_FILE, TRUE_FIELD_FILE, base_summary, simulate, write_summary


class Command(PhaselessCommand):
    help = 'Simulate intensity data on the measurement plane from the configured phantom'

    def run(self, config, out, workers, **options):
        simulation = simulate(config, workers)
        intensity = add_noise(simulation.intensity, config.pipeline['noise'], config.pipeline['seed'])
        write_intensity_csv(os.path.join(out, INTENSITY_FILE), intensity)
        write_plane_data(os.path.join(out, TRUE_FIELD_FILE), simulation.field)
        summary = base_summary(config, 'simulate')
        summary['simulation'] = {'grid': list(simulation.grid.counts), 'phi': simulation.phi}
        write_summary(out, summary)
