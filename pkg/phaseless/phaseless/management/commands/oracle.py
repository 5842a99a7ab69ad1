from ._base import PhaselessCommand
from ...oracle import born_rows, format_rows, mie_rows
from ...pipeline import base_summary, write_summary


class Command(PhaselessCommand):
    help = 'Compare the volume solver with the Born approximation and the partial-wave series'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--case', choices=('born', 'mie', 'all'), default='all')

    def run(self, config, out, workers, **options):
        rows = []
        if options['case'] in ('born', 'all'):
            rows.extend(born_rows())
        if options['case'] in ('mie', 'all'):
            rows.extend(mie_rows())
        self.stdout.write(format_rows(rows))
        summary = base_summary(config, 'oracle')
        summary['oracle'] = [row._asdict() for row in rows]
        write_summary(out, summary)
