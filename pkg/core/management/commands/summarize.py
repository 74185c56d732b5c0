from pathlib import Path

from django.conf import settings

from core.domain import Grid1D, Kernel, KernelFamily, SummaryKind
from core.fileio import read_curve, read_diagram, write_curve, write_surface, write_vector
from core.management.base import TdaCommand, non_negative_int, positive_float, positive_int
from core.summaries import SummarySpec, default_grid, intensity, persistence_image, summarize, upper_bound

INTENSITY = 'intensity'


class Command(TdaCommand):
    help = 'Turn persistence diagrams into functional summaries on a shared grid'

    def add_command_arguments(self, parser):
        parser.add_argument('diagrams', nargs='+', help='diagram CSV files')
        parser.add_argument('--kind', required=True, choices=SummaryKind.values + [INTENSITY],
                            help='summary to compute')
        parser.add_argument('--dim', type=non_negative_int, default=1, help='homology dimension summarised')
        parser.add_argument('--k', type=positive_int, default=1, help='number of landscape orders')
        parser.add_argument('--kernel', choices=KernelFamily.values, default=None,
                            help='kernel; triangle for glandscape, gaussian for intensity')
        parser.add_argument('--h', type=positive_float, default=0.1, help='kernel bandwidth')
        parser.add_argument('--p', type=positive_float, default=1.0, help='silhouette exponent')
        parser.add_argument('--p-weight', type=float, default=1.0, help='lifetime exponent of the intensity weight')
        parser.add_argument('--t0', type=float, default=None, help='first grid point')
        parser.add_argument('--t1', type=float, default=None, help='last grid point')
        parser.add_argument('--m', type=positive_int, default=None, help='grid size; falls back to TDASUM_GRID_SIZE')
        parser.add_argument('--grid-from', default=None, help='reuse the grid of an existing curve CSV')
        parser.add_argument('--image-m', type=positive_int, default=32,
                            help='birth and death grid size of the intensity surface')

    def grid(self, diagrams, options):
        explicit = (options['t0'], options['t1'])
        if options['grid_from'] is not None:
            if any(v is not None for v in explicit):
                raise self.usage_error('--grid-from cannot be combined with --t0/--t1')
            self.inputs.append(options['grid_from'])
            return read_curve(options['grid_from']).grid
        if all(v is not None for v in explicit):
            return Grid1D(options['t0'], options['t1'], options['m'] or settings.TDASUM_GRID_SIZE)
        if any(v is not None for v in explicit):
            raise self.usage_error('--t0 and --t1 must be given together')
        return default_grid(diagrams, dim=options['dim'], m=options['m'])

    def run(self, **options):
        paths = options['diagrams']
        stems = [Path(p).stem for p in paths]
        if len(set(stems)) != len(stems):
            raise self.usage_error('diagram file names must be distinct')
        self.inputs.extend(paths)
        diagrams = [read_diagram(p) for p in paths]
        kind = options['kind']
        outputs = {}

        if kind == INTENSITY:
            kernel = Kernel(options['kernel'] or KernelFamily.TRUNCATED_GAUSSIAN)
            axis = Grid1D.covering(diagrams, dim=options['dim'], m=max(options['image_m'], 2))
            for stem, diagram in zip(stems, diagrams):
                surface = intensity(diagram, kernel, options['h'], options['p_weight'], axis, axis, options['dim'])
                outputs[f'{stem}_intensity.csv'] = lambda path, s=surface: write_surface(s, path)
                outputs[f'{stem}_image.csv'] = lambda path, s=surface: write_vector(persistence_image(s), path)
            return outputs

        spec = SummarySpec(
            kind=kind,
            dim=options['dim'],
            k_max=options['k'],
            kernel=options['kernel'] or KernelFamily.TRIANGLE,
            h=options['h'],
            p=options['p'],
        )
        grid = self.grid(diagrams, options)
        for stem, diagram in zip(stems, diagrams):
            curve = summarize(diagram, spec, grid)
            outputs[f'{stem}_{kind}.csv'] = lambda path, c=curve: write_curve(c, path)
        self.summary['grid'] = f'[{grid.t0:g}, {grid.t1:g}] with {grid.m} samples'
        self.summary['bound'] = f'{max(upper_bound(d, spec) for d in diagrams):.6g}'
        return outputs
