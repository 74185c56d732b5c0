import pandas as pd

from core.domain import KernelFamily, SummaryKind
from core.fileio import read_diagram, read_labels, write_json, write_labels, write_table
from core.learn import LabeledCurveSet, knn_classify, loocv_select_bandwidth, loocv_select_k
from core.management.base import TdaCommand, non_negative_int, positive_float, positive_int
from core.summaries import SummarySpec, default_grid, summarize


class Command(TdaCommand):
    help = 'k-nearest-neighbour classification of summary curves, k chosen by leave-one-out if asked'

    def add_command_arguments(self, parser):
        parser.add_argument('--train', nargs='+', required=True,
                            help='training curve CSVs, or diagram CSVs with --bandwidths')
        parser.add_argument('--labels', required=True, help='CSV id,label of the training files, in order')
        parser.add_argument('--query', nargs='+', required=True, help='files to classify, same format as --train')
        self.add_kind_argument(parser)
        self.add_metric_arguments(parser)
        choice = parser.add_mutually_exclusive_group(required=True)
        choice.add_argument('--k', type=positive_int, help='number of neighbours')
        choice.add_argument('--k-candidates', type=positive_int, nargs='+', help='choose k by leave-one-out')
        parser.add_argument('--bandwidths', type=positive_float, nargs='+', default=None,
                            help='choose a generalized-landscape bandwidth by leave-one-out; inputs are diagrams')
        parser.add_argument('--kernel', choices=KernelFamily.values, default=KernelFamily.TRIANGLE,
                            help='generalized-landscape kernel used with --bandwidths')
        parser.add_argument('--dim', type=non_negative_int, default=1, help='homology dimension used with --bandwidths')
        parser.add_argument('--k-max', type=positive_int, default=1, help='landscape orders used with --bandwidths')
        parser.add_argument('--m', type=positive_int, default=None,
                            help='grid size used with --bandwidths; falls back to TDASUM_GRID_SIZE')

    def run(self, **options):
        self.inputs.append(options['labels'])
        labels = read_labels(options['labels'])
        metric = self.metric_from(options)
        report = {'metric': metric.describe()}
        outputs = {}

        if options['bandwidths']:
            if not options['k_candidates']:
                raise self.usage_error('--bandwidths needs --k-candidates')
            self.inputs.extend(options['train'] + options['query'])
            train_diagrams = [read_diagram(p) for p in options['train']]
            query_diagrams = [read_diagram(p) for p in options['query']]
            if len(train_diagrams) != len(labels):
                raise ValueError(f"{len(train_diagrams)} training files but {len(labels)} labels")
            grid = default_grid(train_diagrams, dim=options['dim'], m=options['m'])
            base = SummarySpec(SummaryKind.GENERALIZED_LANDSCAPE, options['dim'], options['k_max'], options['kernel'])
            h, k, error, table = loocv_select_bandwidth(
                train_diagrams, labels, options['bandwidths'], options['k_candidates'], metric, grid,
                spec=base, threads=self.threads,
            )
            spec = SummarySpec(base.kind, base.dim, base.k_max, base.kernel, h)
            train = LabeledCurveSet([summarize(d, spec, grid) for d in train_diagrams], labels)
            queries = [summarize(d, spec, grid) for d in query_diagrams]
            report.update(h=h, loocv_error=error)
            outputs['loocv.csv'] = lambda path: write_table(table, path)
        else:
            train = LabeledCurveSet(self.read_curves(options['train'], options['kind']), labels)
            queries = self.read_curves(options['query'], options['kind'])
            if options['k_candidates']:
                k, error = loocv_select_k(train, options['k_candidates'], metric, self.threads)
                report['loocv_error'] = error
            else:
                k = options['k']

        predicted = [knn_classify(train, query, k, metric) for query in queries]
        report['k'] = k
        self.summary['k'] = k
        if 'loocv_error' in report:
            self.summary['loocv_error'] = f"{report['loocv_error']:.4f}"
        outputs['predictions.csv'] = lambda path: write_labels(predicted, path)
        outputs['classify.json'] = lambda path: write_json(report, path)
        files = pd.DataFrame({'file': options['query'], 'label': predicted})
        outputs['predictions_by_file.csv'] = lambda path: write_table(files, path)
        return outputs
