from core.domain import KernelFamily
from core.fileio import read_cloud, read_field, write_diagram
from core.homology import METHODS, superlevel_diagram, tile_field
from core.management.base import TdaCommand, positive_float, positive_int, unit_interval
from core.smoothing import KdeSpec, LoessSpec, kde, loess_smooth


class Command(TdaCommand):
    help = 'Compute the superlevel persistence diagram of an image or of a KDE of a point cloud'

    def add_command_arguments(self, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--field', help='scalar field file (header "rows cols x0 y0 x1 y1")')
        source.add_argument('--cloud', help='point cloud CSV with columns x,y')
        parser.add_argument('--max-dim', type=int, choices=[0, 1], default=1, help='highest homology dimension')
        parser.add_argument('--smooth', action='store_true', help='loess-smooth the field first')
        parser.add_argument('--loess-fraction', type=unit_interval, default=None,
                            help='loess neighbour fraction; falls back to TDASUM_LOESS_FRACTION')
        parser.add_argument('--kde-h', type=positive_float, default=None, help='KDE bandwidth (required with --cloud)')
        parser.add_argument('--kde-grid', type=positive_int, default=128, help='KDE grid size per side')
        parser.add_argument('--kernel', choices=KernelFamily.values, default=KernelFamily.TRUNCATED_GAUSSIAN,
                            help='KDE kernel')
        parser.add_argument('--tiles', type=positive_int, nargs=2, metavar=('R', 'C'), default=None,
                            help='split the field into R x C tiles, one diagram per tile')
        parser.add_argument('--method', choices=METHODS, default=None,
                            help='homology algorithm; falls back to TDASUM_HOMOLOGY_METHOD')
        parser.add_argument('--name', default='diagram', help='stem of the output file names')

    def run(self, **options):
        if options['cloud'] is not None:
            if options['kde_h'] is None:
                raise self.usage_error('--kde-h is required with --cloud')
            if options['tiles'] or options['smooth']:
                raise self.usage_error('--tiles and --smooth apply to --field only')
            self.inputs.append(options['cloud'])
            spec = KdeSpec(h=options['kde_h'], kernel=options['kernel'],
                           rows=options['kde_grid'], cols=options['kde_grid'])
            fields = [kde(read_cloud(options['cloud']), spec)]
        else:
            self.inputs.append(options['field'])
            field = read_field(options['field'])
            fields = tile_field(field, *options['tiles']) if options['tiles'] else [field]
            if options['smooth']:
                loess = LoessSpec.from_settings(options['loess_fraction'])
                fields = [loess_smooth(f, loess) for f in fields]

        diagrams = [superlevel_diagram(f, options['max_dim'], options['method']) for f in fields]
        name = options['name']
        if len(diagrams) == 1:
            outputs = {f'{name}.csv': diagrams[0]}
        else:
            outputs = {f'{name}_{index:02d}.csv': d for index, d in enumerate(diagrams)}
        self.summary['points'] = sum(len(d) for d in diagrams)
        return {file_name: (lambda path, d=d: write_diagram(d, path)) for file_name, d in outputs.items()}
