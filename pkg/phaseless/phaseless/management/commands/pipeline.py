from ._base import PhaselessCommand
from ...pipeline import run_pipeline


class Command(PhaselessCommand):
    help = 'Simulate, retrieve, propagate and reconstruct in one run'

    def run(self, config, out, workers, **options):
        run_pipeline(config, out, workers)
