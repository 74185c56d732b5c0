from core.fileio import write_field
from core.management.base import TdaCommand, non_negative_int, positive_float, positive_int
from core.rng import derive_seed
from core.simulate import StixConfig, stix

DEFAULTS = {
    'n_sticks': 50,
    'thickness_df': 5.0,
    'rows': 128,
    'cols': 128,
    'foreground': 1.0,
    'background': 0.0,
    'antialias': False,
    'count': 1,
}


class Command(TdaCommand):
    help = 'Draw STIX images: random sticks with chi-square widths on a blank canvas'
    stochastic = True

    def add_command_arguments(self, parser):
        parser.add_argument('--n-sticks', type=non_negative_int, default=DEFAULTS['n_sticks'], help='sticks per image')
        parser.add_argument('--thickness-df', type=positive_float, default=DEFAULTS['thickness_df'],
                            help='degrees of freedom of the chi-square stick width')
        parser.add_argument('--rows', type=positive_int, default=DEFAULTS['rows'], help='image height in pixels')
        parser.add_argument('--cols', type=positive_int, default=DEFAULTS['cols'], help='image width in pixels')
        parser.add_argument('--foreground', type=float, default=DEFAULTS['foreground'], help='stick intensity')
        parser.add_argument('--background', type=float, default=DEFAULTS['background'], help='canvas intensity')
        parser.add_argument('--antialias', action='store_true', help='paint the covered fraction of edge pixels')
        parser.add_argument('--count', type=positive_int, default=DEFAULTS['count'], help='number of images')
        parser.add_argument('--config', default=None, help='key=value file supplying any of the flags above')

    def run(self, **options):
        values = self.merge_config(options, DEFAULTS)
        count = values.pop('count')
        if count == 1:
            fields = {'stix.txt': stix(StixConfig(seed=options['seed'], **values))}
        else:
            fields = {
                f'stix_{i:03d}.txt': stix(StixConfig(seed=derive_seed(options['seed'], i), **values))
                for i in range(count)
            }
        self.summary['images'] = count
        return {name: (lambda path, f=f: write_field(f, path)) for name, f in fields.items()}
