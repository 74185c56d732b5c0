"""
Tests for the shared domain types and the run registry model.
"""

import math

import numpy as np
import pytest
from django.test import SimpleTestCase, TestCase
from scipy.integrate import trapezoid

from .domain import (
    DiagramPoint,
    Grid1D,
    Kernel,
    KernelFamily,
    MetricSpec,
    MetricWeight,
    Orientation,
    PersistenceDiagram,
    PointCloud,
    ScalarField,
    canonicalize_superlevel,
    check_matched,
    filter_by_dim,
    parse_metric_p,
)
from .exceptions import BadConfig, BadP, EmptyField, GridMismatch, MalformedFile, RawPairInverted
from .models import RunManifest
from .parallel import parallel_map
from .rng import derive_seed, stream
from .testing import constant_curve, diagram


@pytest.mark.unit
class CanonicalizeTest(SimpleTestCase):
    """Superlevel pairs mapped to canonical coordinates"""

    def test_negates_levels(self):
        """A raw pair (2.0, 0.5) becomes (-2.0, -0.5)"""
        result = canonicalize_superlevel([(0, 2.0, 0.5)])
        point = result.points[0]
        self.assertEqual((point.birth, point.death), (-2.0, -0.5))
        self.assertEqual(point.lifetime, 1.5)
        self.assertEqual(result.orientation, Orientation.SUPERLEVEL_NEGATED)

    def test_empty_list(self):
        """No pairs give an empty diagram"""
        self.assertEqual(len(canonicalize_superlevel([])), 0)

    def test_zero_lifetime(self):
        """Equal levels give a point of lifetime zero"""
        point = canonicalize_superlevel([(1, 1.0, 1.0)]).points[0]
        self.assertEqual(point.lifetime, 0.0)

    def test_inverted_pair_rejected(self):
        """A superlevel pair cannot die above its birth level"""
        with self.assertRaises(RawPairInverted):
            canonicalize_superlevel([(0, 0.5, 2.0)])

    def test_raw_levels_round_trip(self):
        """raw_levels recovers the superlevel coordinates"""
        result = canonicalize_superlevel([(0, 3.0, -1.0, True), (1, 2.0, 1.5)])
        raw = result.raw_levels()
        self.assertEqual((raw[0].birth_level, raw[0].death_level, raw[0].essential), (3.0, -1.0, True))
        self.assertEqual((raw[1].birth_level, raw[1].death_level), (2.0, 1.5))

    def test_zero_level_stays_positive_zero(self):
        """A zero level is stored as +0.0"""
        point = canonicalize_superlevel([(0, 0.0, 0.0)]).points[0]
        self.assertEqual(math.copysign(1.0, point.birth), 1.0)


@pytest.mark.unit
class DiagramTest(SimpleTestCase):
    """PersistenceDiagram helpers and filter_by_dim"""

    def setUp(self):
        self.mixed = PersistenceDiagram((DiagramPoint(0, 0.0, 1.0), DiagramPoint(1, 1.0, 4.0)))

    def test_filter_keeps_requested_dim(self):
        """Only dim-1 points survive"""
        filtered = filter_by_dim(self.mixed, 1)
        self.assertEqual([p.dim for p in filtered], [1])

    def test_filter_missing_dim(self):
        """A dimension with no points gives an empty diagram"""
        self.assertEqual(len(filter_by_dim(self.mixed, 99)), 0)
        self.assertEqual(len(filter_by_dim(PersistenceDiagram(), 0)), 0)

    def test_filter_negative_dim(self):
        """Negative dimensions are rejected"""
        with self.assertRaises(ValueError):
            filter_by_dim(self.mixed, -1)

    def test_aggregates(self):
        """Lifetimes, half lifetimes and total persistence per dimension"""
        self.assertEqual(list(self.mixed.lifetimes(1)), [3.0])
        self.assertEqual(self.mixed.max_half_lifetime(1), 1.5)
        self.assertEqual(self.mixed.total_persistence(), 4.0)
        self.assertEqual(PersistenceDiagram().max_half_lifetime(1), 0.0)

    def test_point_validation(self):
        """Points need death >= birth and finite coordinates"""
        with self.assertRaises(RawPairInverted):
            DiagramPoint(0, 2.0, 1.0)
        with self.assertRaises(ValueError):
            DiagramPoint(0, 0.0, math.inf)
        with self.assertRaises(ValueError):
            DiagramPoint(-1, 0.0, 1.0)


@pytest.mark.unit
class FieldAndCloudTest(SimpleTestCase):
    """ScalarField and PointCloud construction"""

    def test_default_extent(self):
        """The default extent is the pixel box"""
        field = ScalarField(np.zeros((3, 4)))
        self.assertEqual(field.extent, (0.0, 0.0, 4.0, 3.0))
        self.assertEqual(field.shape, (3, 4))

    def test_empty_field(self):
        """A field needs at least one pixel"""
        with self.assertRaises(EmptyField):
            ScalarField.from_flat(0, 3, [])

    def test_from_flat_size_mismatch(self):
        """The value count must match rows x cols"""
        with self.assertRaises(ValueError):
            ScalarField.from_flat(2, 2, [1.0, 2.0, 3.0])

    def test_values_read_only(self):
        """Field values cannot be modified in place"""
        field = ScalarField(np.ones((2, 2)))
        with self.assertRaises(ValueError):
            field.values[0, 0] = 5.0

    def test_empty_cloud_shape(self):
        """An empty cloud is a 0 x 2 array"""
        self.assertEqual(PointCloud([]).points.shape, (0, 2))


@pytest.mark.unit
class GridTest(SimpleTestCase):
    """Grid1D sampling and quadrature weights"""

    def test_samples_hit_both_ends(self):
        """First and last samples are t0 and t1 exactly"""
        grid = Grid1D(0.1, 0.7, 7)
        self.assertEqual(grid.samples[0], 0.1)
        self.assertEqual(grid.samples[-1], 0.7)

    def test_trapezoid_weights_sum_to_length(self):
        """Weights integrate the constant one exactly"""
        grid = Grid1D(-1.0, 3.0, 9)
        self.assertAlmostEqual(grid.trapezoid_weights.sum(), 4.0, places=12)

    def test_invalid_grids(self):
        """Degenerate grids are rejected"""
        with self.assertRaises(ValueError):
            Grid1D(1.0, 1.0, 5)
        with self.assertRaises(ValueError):
            Grid1D(0.0, 1.0, 1)

    def test_covering_pads_the_range(self):
        """[min birth, max death] padded by 5% on each side"""
        grid = Grid1D.covering([diagram((0.0, 2.0)), diagram((1.0, 1.5))], dim=1, m=5)
        self.assertAlmostEqual(grid.t0, -0.1)
        self.assertAlmostEqual(grid.t1, 2.1)

    def test_covering_empty(self):
        """No points fall back to the unit interval"""
        self.assertEqual(Grid1D.covering([PersistenceDiagram()], m=3), Grid1D(0.0, 1.0, 3))


@pytest.mark.unit
class SummaryCurveTest(SimpleTestCase):
    """Order selection and grid matching"""

    def test_order_and_leading(self):
        """order(k) picks one row, leading(j) the first j rows"""
        curve = constant_curve(0.0, k_max=3).with_orders(np.arange(33, dtype=float).reshape(3, 11))
        self.assertEqual(curve.order(2).orders[0, 0], 11.0)
        self.assertEqual(curve.leading(2).k_max, 2)
        with self.assertRaises(ValueError):
            curve.order(4)

    def test_grid_mismatch(self):
        """Curves on different grids cannot be combined"""
        other = constant_curve(0.0, grid=Grid1D(0.0, 2.0, 11))
        with self.assertRaises(GridMismatch):
            check_matched([constant_curve(0.0), other])

    def test_order_count_mismatch(self):
        """Curves with different order counts cannot be combined"""
        with self.assertRaises(GridMismatch):
            check_matched([constant_curve(0.0), constant_curve(0.0, k_max=2)])


@pytest.mark.unit
class KernelTest(SimpleTestCase):
    """Kernel shapes and the radial density profile"""

    def test_peak_and_support(self):
        """K(0) = 1 and K vanishes outside [-1, 1]"""
        for family in KernelFamily.values:
            kernel = Kernel(family)
            self.assertEqual(float(kernel(0.0)), 1.0)
            self.assertEqual(float(kernel(1.5)), 0.0)

    def test_epanechnikov_value(self):
        """Epanechnikov is 1 - u^2"""
        self.assertAlmostEqual(float(Kernel(KernelFamily.EPANECHNIKOV)(0.5)), 0.75)

    def test_density_profile_integrates_to_one(self):
        """2 pi integral of s * profile(s) is one for every family"""
        for family in KernelFamily.values:
            kernel = Kernel(family)
            s = np.linspace(0.0, kernel.kde_radius, 200001)
            total = trapezoid(2.0 * np.pi * s * kernel.density_profile(s), s)
            self.assertAlmostEqual(total, 1.0, places=5, msg=family)


@pytest.mark.unit
class MetricSpecTest(SimpleTestCase):
    """Metric parameters"""

    def test_parse_inf(self):
        """'inf' and 'sup' mean the supremum metric"""
        self.assertTrue(math.isinf(parse_metric_p("inf")))
        self.assertTrue(math.isinf(parse_metric_p("sup")))
        self.assertEqual(parse_metric_p("2"), 2.0)

    def test_bad_exponent(self):
        """p must be positive"""
        with self.assertRaises(BadP):
            MetricSpec(p=0)

    def test_describe(self):
        """describe is JSON friendly"""
        self.assertEqual(MetricSpec(math.inf, MetricWeight.SIGMA).describe(), {"p": "inf", "weight": "sigma"})


@pytest.mark.unit
class RandomnessTest(SimpleTestCase):
    """Seeded streams and the order-preserving map"""

    def test_stream_is_deterministic(self):
        """Same seed and path, same draws"""
        self.assertEqual(list(stream(7, 1, 2).random(3)), list(stream(7, 1, 2).random(3)))
        self.assertNotEqual(list(stream(7, 1, 2).random(3)), list(stream(7, 2, 1).random(3)))

    def test_derive_seed_range(self):
        """Child seeds are 32-bit and reproducible"""
        seed = derive_seed(3, 0, 1)
        self.assertEqual(seed, derive_seed(3, 0, 1))
        self.assertTrue(0 <= seed < 2 ** 32)

    def test_seed_required(self):
        """There is no implicit entropy"""
        with self.assertRaises(ValueError):
            stream(None)

    def test_parallel_map_keeps_order(self):
        """Results come back in input order whatever the thread count"""
        items = list(range(50))
        self.assertEqual(parallel_map(lambda x: x * x, items, 4), [x * x for x in items])
        self.assertEqual(parallel_map(lambda x: x * x, items, 1), [x * x for x in items])


@pytest.mark.unit
class ErrorTest(SimpleTestCase):
    """Error messages and exit codes"""

    def test_malformed_file_context(self):
        """The message starts with path:line"""
        error = MalformedFile("d.csv", "bad value", line=4)
        self.assertEqual(str(error), "d.csv:4: bad value")
        self.assertEqual(error.exit_code, 3)

    def test_bad_config_lists_every_field(self):
        """Every field problem appears in the message"""
        error = BadConfig({"seed": ["required"], "B": ["must be >= 1"]})
        self.assertIn("seed: required", str(error))
        self.assertIn("B: must be >= 1", str(error))


class RunManifestModelTest(TestCase):
    """Run registry rows"""

    def test_manifest_creation(self):
        """A manifest keeps its options and digests"""
        manifest = RunManifest.objects.create(
            command="band",
            options={"alpha": 0.05},
            seed=3,
            version="0.1.0",
            inputs={"a.csv": "00"},
            outputs={"band.json": "11", "band_center.csv": "22"},
            out_dir="results",
            wall_time=0.5,
        )
        self.assertEqual(str(manifest), "band -> results")
        self.assertEqual(len(manifest.outputs), 2)
        self.assertEqual(RunManifest.objects.get(pk=manifest.pk).options, {"alpha": 0.05})
