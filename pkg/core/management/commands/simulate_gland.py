from core.fileio import write_cloud
from core.management.base import TdaCommand, positive_int
from core.rng import derive_seed
from core.simulate import GLAND_TYPES, GlandConfig, gland

DEFAULTS = {
    'gland_type': 'A',
    'irregularity': -1.0,
    'n_points': 300,
    'radius': 0.3,
    'jitter': 0.02,
    'count': 1,
}


class Command(TdaCommand):
    help = 'Sample gland point clouds: a jittered ring mixed with uniform points'
    stochastic = True

    def add_command_arguments(self, parser):
        parser.add_argument('--gland-type', choices=list(GLAND_TYPES), default=DEFAULTS['gland_type'],
                            help='grade A (regular ring) to D (uniform points)')
        parser.add_argument('--irregularity', type=float, default=DEFAULTS['irregularity'],
                            help='share of uniform points in [0, 1]; negative means use --gland-type')
        parser.add_argument('--n-points', type=positive_int, default=DEFAULTS['n_points'], help='points per cloud')
        parser.add_argument('--radius', type=float, default=DEFAULTS['radius'], help='ring radius')
        parser.add_argument('--jitter', type=float, default=DEFAULTS['jitter'], help='radial noise of ring points')
        parser.add_argument('--count', type=positive_int, default=DEFAULTS['count'], help='number of clouds')
        parser.add_argument('--config', default=None, help='key=value file supplying any of the flags above')

    def run(self, **options):
        values = self.merge_config(options, DEFAULTS)
        count = values.pop('count')
        gland_type = values.pop('gland_type')
        irregularity = values.pop('irregularity')
        if gland_type not in GLAND_TYPES:
            raise self.usage_error(f"unknown gland type {gland_type!r}")
        if irregularity < 0:
            irregularity = GLAND_TYPES[gland_type]

        def config(seed):
            return GlandConfig(irregularity=irregularity, seed=seed, **values)

        if count == 1:
            clouds = {'gland.csv': gland(config(options['seed']))}
        else:
            clouds = {f'gland_{i:03d}.csv': gland(config(derive_seed(options['seed'], i))) for i in range(count)}
        self.summary['clouds'] = count
        self.summary['irregularity'] = f'{irregularity:g}'
        return {name: (lambda path, c=c: write_cloud(c, path)) for name, c in clouds.items()}
