from core.fileio import write_curve, write_json, write_vector
from core.inference import WidthMode, bootstrap_band
from core.management.base import TdaCommand, positive_int, unit_interval


class Command(TdaCommand):
    help = 'Bootstrap confidence band for the mean of a set of summary curves'
    stochastic = True

    def add_command_arguments(self, parser):
        parser.add_argument('curves', nargs='+', help='curve CSV files sharing one grid')
        self.add_kind_argument(parser)
        parser.add_argument('--alpha', type=unit_interval, default=0.05, help='one minus the coverage level')
        parser.add_argument('--B', type=positive_int, default=1000, help='number of bootstrap replicates')
        parser.add_argument('--mode', choices=WidthMode.values, default=WidthMode.FIXED,
                            help='fixed width, or width proportional to the pointwise standard deviation')

    def run(self, **options):
        curves = self.read_curves(options['curves'], options['kind'])
        band = bootstrap_band(curves, options['alpha'], options['B'], options['mode'], options['seed'], self.threads)
        self.summary['half_width'] = f'{band.half_width:.6g}'
        return {
            'band_center.csv': lambda path: write_curve(band.center, path),
            'band_lower.csv': lambda path: write_curve(band.lower, path),
            'band_upper.csv': lambda path: write_curve(band.upper, path),
            'band_sigma.csv': lambda path: write_curve(band.sigma, path),
            'band_replicates.csv': lambda path: write_vector(band.replicates, path, column='statistic'),
            'band.json': lambda path: write_json(band.describe(), path),
        }
