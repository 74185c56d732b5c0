from core.fileio import write_json, write_vector
from core.inference import permutation_test
from core.management.base import TdaCommand, positive_int


class Command(TdaCommand):
    help = 'Two-sample permutation test between groups of summary curves'
    stochastic = True

    def add_command_arguments(self, parser):
        parser.add_argument('--group-a', nargs='+', required=True, help='curve CSVs of the first group')
        parser.add_argument('--group-b', nargs='+', required=True, help='curve CSVs of the second group')
        self.add_kind_argument(parser)
        self.add_metric_arguments(parser)
        parser.add_argument('--B', type=positive_int, default=1000, help='number of random relabelings')
        orders = parser.add_mutually_exclusive_group()
        orders.add_argument('--order', type=positive_int, default=None,
                            help='test a single function order instead of all orders')
        orders.add_argument('--leading', type=positive_int, default=None,
                            help='test orders 1..J jointly instead of all orders')
        parser.add_argument('--exhaustive', action='store_true', help='enumerate every split instead of sampling')
        parser.add_argument('--add-one', action='store_true', help='report (1 + count) / (B + 1)')

    def run(self, **options):
        group_a = self.read_curves(options['group_a'], options['kind'])
        group_b = self.read_curves(options['group_b'], options['kind'])
        if options['order'] is not None:
            group_a = [c.order(options['order']) for c in group_a]
            group_b = [c.order(options['order']) for c in group_b]
        elif options['leading'] is not None:
            group_a = [c.leading(options['leading']) for c in group_a]
            group_b = [c.leading(options['leading']) for c in group_b]
        result = permutation_test(
            group_a,
            group_b,
            self.metric_from(options),
            B=options['B'],
            seed=options['seed'],
            exhaustive=options['exhaustive'],
            add_one=options['add_one'],
            threads=self.threads,
        )
        self.summary['statistic'] = f'{result.statistic:.6g}'
        self.summary['p_value'] = f'{result.p_value:.6g}'
        return {
            'test.json': lambda path: write_json(result.describe(), path),
            'replicates.csv': lambda path: write_vector(result.replicates, path, column='statistic'),
        }
