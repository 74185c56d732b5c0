import pandas as pd

from core.domain import MetricWeight
from core.fileio import write_curve, write_json, write_table, write_vector
from core.inference import prediction_band
from core.management.base import TdaCommand, non_negative_int, unit_interval


class Command(TdaCommand):
    help = 'Prediction set for a new summary curve, optionally checking new curves against it'

    def add_command_arguments(self, parser):
        parser.add_argument('curves', nargs='+', help='curve CSV files sharing one grid')
        self.add_kind_argument(parser)
        self.add_metric_arguments(parser, p='inf', weight=MetricWeight.SIGMA)
        parser.add_argument('--gamma', type=unit_interval, default=0.9, help='coverage level of the prediction set')
        parser.add_argument('--new', nargs='*', default=[], help='curve CSVs to check against the set')
        parser.add_argument('--seed', type=non_negative_int, default=None,
                            help='recorded in the manifest; the construction draws nothing')

    def run(self, **options):
        curves = self.read_curves(options['curves'], options['kind'])
        prediction = prediction_band(curves, options['gamma'], self.metric_from(options), options['seed'])
        new = self.read_curves(options['new'], options['kind'])
        self.summary['q_hat'] = f'{prediction.q_hat:.6g}'

        outputs = {
            'prediction.json': lambda path: write_json(prediction.describe(), path),
            'prediction_center.csv': lambda path: write_curve(prediction.center, path),
            'residuals.csv': lambda path: write_vector(prediction.residuals, path, column='residual'),
        }
        if prediction.lower is not None:
            outputs['prediction_lower.csv'] = lambda path: write_curve(prediction.lower, path)
            outputs['prediction_upper.csv'] = lambda path: write_curve(prediction.upper, path)
        if new:
            residuals = [prediction.residual(curve) for curve in new]
            table = pd.DataFrame({
                'file': options['new'],
                'residual': residuals,
                'inside': [int(r <= prediction.q_hat) for r in residuals],
            })
            self.summary['inside'] = f"{int(table['inside'].sum())} of {len(new)}"
            outputs['predict_new.csv'] = lambda path: write_table(table, path)
        return outputs
