from core.fileio import read_matrix, write_embedding, write_matrix
from core.learn import DistanceMatrix, classical_mds, distance_matrix
from core.management.base import TdaCommand, positive_int


class Command(TdaCommand):
    help = 'Classical multidimensional scaling of a distance matrix or of a set of curves'

    def add_command_arguments(self, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--matrix', help='headerless square distance matrix CSV')
        source.add_argument('--curves', nargs='+', help='curve CSVs; their pairwise distances are embedded')
        self.add_kind_argument(parser)
        self.add_metric_arguments(parser)
        parser.add_argument('--out-dim', type=positive_int, default=2, help='embedding dimension')

    def run(self, **options):
        outputs = {}
        if options['matrix'] is not None:
            self.inputs.append(options['matrix'])
            dm = DistanceMatrix(read_matrix(options['matrix']))
        else:
            curves = self.read_curves(options['curves'], options['kind'])
            dm = distance_matrix(curves, self.metric_from(options), self.threads)
            outputs['distances.csv'] = lambda path: write_matrix(dm.values, path)
        coords = classical_mds(dm, options['out_dim'])
        self.summary['points'] = len(dm)
        outputs['embedding.csv'] = lambda path: write_embedding(coords, path)
        return outputs
