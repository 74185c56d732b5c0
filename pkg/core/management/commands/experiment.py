from core.experiments import (
    run_fibrin_experiment,
    run_gland_experiment,
    run_stix_experiment,
    validate_config,
)
from core.fileio import read_field, write_embedding, write_json, write_table
from core.management.base import TdaCommand


class Command(TdaCommand):
    help = 'Run a batch experiment (stix, gland or fibrin) described by a key=value config file'

    def add_command_arguments(self, parser):
        parser.add_argument('config', help='experiment config; the seed is one of its keys')

    def run(self, **options):
        values = validate_config(self.read_config(options['config']))
        self.seed = values['seed']
        runner = getattr(self, f"run_{values['experiment']}")
        outputs = runner(values)
        self.summary['experiment'] = values['experiment']
        return outputs

    def run_stix(self, values):
        table = run_stix_experiment(values, self.threads)
        level = 0.05
        rejection = (table <= level).mean()
        summary = {
            'median_p_value': table.median().to_dict(),
            'rejection_rate': rejection.to_dict(),
            'level': level,
            'seed': values['seed'],
        }
        self.summary['reps'] = len(table)
        return {
            'pvalues.csv': lambda path: write_table(table, path, index=True),
            'summary.json': lambda path: write_json(summary, path),
        }

    def run_gland(self, values):
        result = run_gland_experiment(values, self.threads)
        self.summary['k'] = result.k
        self.summary['test_error'] = f'{result.test_error:.4f}'
        outputs = {
            'confusion.csv': lambda path: write_table(result.confusion, path, index=True),
            'predictions.csv': lambda path: write_table(result.predictions, path),
            'gland.json': lambda path: write_json({**result.describe(), 'seed': values['seed']}, path),
        }
        if result.loocv_table is not None:
            outputs['loocv.csv'] = lambda path: write_table(result.loocv_table, path)
        if result.embedding is not None:
            outputs['embedding.csv'] = lambda path: write_embedding(result.embedding, path)
        return outputs

    def run_fibrin(self, values):
        self.inputs.extend([values['field_a'], values['field_b']])
        fields = [read_field(values['field_a']), read_field(values['field_b'])]
        table = run_fibrin_experiment(values, fields, self.threads)
        self.summary['tests'] = len(table)
        return {'fibrin.csv': lambda path: write_table(table, path)}
