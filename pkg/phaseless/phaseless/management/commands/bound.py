from ._base import PhaselessCommand
from ...forward import analytic_bound
from ...libs.constants import K_BOUND


class Command(PhaselessCommand):
    help = 'Print the smallness bound on the scattered intensity for one and two spheres'

    def run(self, config, out, workers, **options):
        k = K_BOUND * config.band['k_scale']
        R = config.geometry['plane_z']
        for count in (1, 2):
            self.stdout.write('%.4f' % analytic_bound(k, R, count))
