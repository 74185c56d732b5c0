"""
Tests for landscapes, generalized landscapes, silhouettes, APFs and intensities.
"""

import numpy as np
import pytest
from django.test import SimpleTestCase

from .domain import Grid1D, Kernel, KernelFamily, PersistenceDiagram, SummaryKind
from .exceptions import BadBandwidth, BadP, EmptyDiagram, EmptySilhouette
from .summaries import (
    SummarySpec,
    SummarySurface,
    apf,
    generalized_landscape,
    intensity,
    landscape,
    persistence_image,
    rotate,
    silhouette,
    summarize,
    summarize_or_zero,
    upper_bound,
)
from .testing import diagram


def brute_landscape(points, t, k):
    tents = sorted((max(min(t - b, d - t), 0.0) for b, d in points), reverse=True)
    return tents[k - 1] if k <= len(tents) else 0.0


def brute_apf(points, t):
    total = 0.0
    for b, d in points:
        total += (d - b) if b + d <= 2.0 * t else 0.0
    return total


def random_points(rng):
    n = int(rng.integers(1, 11))
    ends = rng.uniform(0.0, 5.0, size=(n, 2))
    return [(float(min(a, b)), float(max(a, b))) for a, b in ends]


@pytest.mark.unit
class LandscapeTest(SimpleTestCase):

    def test_single_triangle_peak(self):
        """The peak of the triangle over (0, 2) is 1 at t = 1"""
        curve = landscape(diagram((0.0, 2.0)), 1, 1, Grid1D(0.0, 2.0, 5))
        self.assertEqual(list(curve.orders[0]), [0.0, 0.5, 1.0, 0.5, 0.0])

    def test_missing_orders_are_zero(self):
        """Orders beyond the number of points vanish"""
        curve = landscape(diagram((0.0, 2.0)), 1, 3, Grid1D(0.0, 2.0, 5))
        self.assertTrue(np.all(curve.orders[1:] == 0.0))

    def test_two_points(self):
        """Both orders are 0.5 at t = 1.5 for (0, 2) and (1, 3)"""
        curve = landscape(diagram((0.0, 2.0), (1.0, 3.0)), 1, 2, Grid1D(0.0, 3.0, 7))
        self.assertEqual((curve.orders[0, 3], curve.orders[1, 3]), (0.5, 0.5))

    def test_orders_are_decreasing(self):
        """Order k never exceeds order k - 1"""
        rng = np.random.default_rng(1)
        curve = landscape(diagram(*random_points(rng)), 1, 4, Grid1D(0.0, 5.0, 101))
        self.assertTrue(np.all(np.diff(curve.orders, axis=0) <= 0.0))

    def test_other_dimensions_ignored(self):
        """Only points of the requested dimension count"""
        curve = landscape(diagram((0.0, 2.0), dim=0), 1, 1, Grid1D(0.0, 2.0, 5))
        self.assertTrue(np.all(curve.orders == 0.0))

    def test_rotate(self):
        """Rotated coordinates are midpoint and half-lifetime"""
        self.assertEqual(rotate(diagram((1.0, 3.0)))[0], (2.0, 1.0))


@pytest.mark.unit
class GeneralizedLandscapeTest(SimpleTestCase):

    def test_passes_through_the_rotated_point(self):
        """At t = x_j the curve equals y_j"""
        curve = generalized_landscape(diagram((0.0, 2.0)), 1, Kernel(KernelFamily.TRIANGLE), 0.3, 1,
                                      Grid1D(0.0, 2.0, 5))
        self.assertEqual(curve.orders[0, 2], 1.0)

    def test_epanechnikov_value(self):
        """Epanechnikov with h = 0.5 gives 0.75 at t = 1.25"""
        curve = generalized_landscape(diagram((0.0, 2.0)), 1, Kernel(KernelFamily.EPANECHNIKOV), 0.5, 1,
                                      Grid1D(0.0, 2.0, 9))
        self.assertAlmostEqual(curve.orders[0, 5], 0.75, places=15)

    def test_outside_support(self):
        """Far from the midpoint every kernel vanishes"""
        for family in KernelFamily.values:
            curve = generalized_landscape(diagram((0.0, 2.0)), 1, Kernel(family), 0.1, 1, Grid1D(0.0, 2.0, 5))
            self.assertEqual(curve.orders[0, -1], 0.0)

    def test_bad_bandwidth(self):
        """h must be positive"""
        with self.assertRaises(BadBandwidth):
            generalized_landscape(diagram((0.0, 2.0)), 1, Kernel(), 0.0, 1, Grid1D(0.0, 2.0, 5))


@pytest.mark.unit
class SilhouetteTest(SimpleTestCase):

    def test_single_feature_is_its_tent(self):
        """With one point the weights cancel"""
        grid = Grid1D(0.0, 2.0, 21)
        single = diagram((0.0, 2.0))
        for p in (0.5, 1.0, 2.0):
            np.testing.assert_allclose(silhouette(single, 1, p, grid).orders, landscape(single, 1, 1, grid).orders,
                                       atol=1e-15)

    def test_weighted_average(self):
        """(2 * 0 + 4 * 1) / 6 at t = 3"""
        curve = silhouette(diagram((0.0, 2.0), (0.0, 4.0)), 1, 1.0, Grid1D(0.0, 4.0, 9))
        self.assertAlmostEqual(curve.orders[0, 6], 2.0 / 3.0, places=15)

    def test_empty(self):
        """No positive lifetime, no silhouette"""
        with self.assertRaises(EmptySilhouette):
            silhouette(PersistenceDiagram(), 1, 1.0, Grid1D(0.0, 1.0, 3))
        with self.assertRaises(EmptySilhouette):
            silhouette(diagram((1.0, 1.0)), 1, 1.0, Grid1D(0.0, 1.0, 3))

    def test_bad_exponent(self):
        """p must be positive"""
        with self.assertRaises(BadP):
            silhouette(diagram((0.0, 2.0)), 1, 0.0, Grid1D(0.0, 1.0, 3))

    def test_zero_curve_substitute(self):
        """summarize_or_zero turns an empty silhouette into zeros"""
        spec = SummarySpec(SummaryKind.SILHOUETTE)
        curve = summarize_or_zero(PersistenceDiagram(), spec, Grid1D(0.0, 1.0, 4))
        self.assertTrue(np.all(curve.orders == 0.0))
        self.assertEqual(curve.kind, SummaryKind.SILHOUETTE)


@pytest.mark.unit
class ApfTest(SimpleTestCase):

    def test_empty(self):
        """An empty diagram accumulates nothing"""
        curve = apf(PersistenceDiagram(), 1, Grid1D(0.0, 1.0, 4))
        self.assertTrue(np.all(curve.orders == 0.0))

    def test_step_at_the_midpoint(self):
        """(0, 2) adds 2 from t = 1 on"""
        curve = apf(diagram((0.0, 2.0)), 1, Grid1D(0.0, 2.0, 5))
        self.assertEqual(list(curve.orders[0]), [0.0, 0.0, 2.0, 2.0, 2.0])

    def test_two_points(self):
        """Both midpoints are passed by t = 2.5"""
        curve = apf(diagram((0.0, 2.0), (1.0, 3.0)), 1, Grid1D(0.0, 3.0, 7))
        self.assertEqual(curve.orders[0, 5], 4.0)

    def test_non_decreasing(self):
        """The APF only grows"""
        curve = apf(diagram(*random_points(np.random.default_rng(2))), 1, Grid1D(0.0, 5.0, 50))
        self.assertTrue(np.all(np.diff(curve.orders[0]) >= 0.0))


@pytest.mark.unit
class SummaryInvariantTest(SimpleTestCase):

    def test_shift_equivariance(self):
        """Shifting the diagram and the grid by c leaves every summary unchanged"""
        rng = np.random.default_rng(21)
        grid = Grid1D(0.0, 5.0, 41)
        shifted_grid = Grid1D(1.5, 6.5, 41)
        specs = [
            lambda d, g: landscape(d, 1, 3, g),
            lambda d, g: generalized_landscape(d, 1, Kernel(KernelFamily.EPANECHNIKOV), 0.4, 2, g),
            lambda d, g: silhouette(d, 1, 2.0, g),
            lambda d, g: apf(d, 1, g),
        ]
        for _ in range(25):
            points = random_points(rng)
            plain = diagram(*points)
            moved = diagram(*[(b + 1.5, d + 1.5) for b, d in points])
            for summary in specs:
                np.testing.assert_allclose(summary(moved, shifted_grid).orders, summary(plain, grid).orders,
                                           rtol=0.0, atol=1e-12)

    def test_landscape_dominates_silhouette(self):
        """The first landscape is never below a silhouette"""
        rng = np.random.default_rng(22)
        grid = Grid1D(0.0, 5.0, 101)
        for _ in range(100):
            d = diagram(*random_points(rng))
            top = landscape(d, 1, 1, grid).orders[0]
            for p in (0.5, 1.0, 3.0):
                self.assertTrue(np.all(top >= silhouette(d, 1, p, grid).orders[0] - 1e-12))

    def test_triangle_at_half_lifetime_is_the_tent(self):
        """A triangle bump of width y through (x, y) is the landscape tent"""
        grid = Grid1D(-1.0, 6.0, 141)
        for birth, death in [(0.0, 2.0), (1.0, 1.5), (0.25, 4.75)]:
            d = diagram((birth, death))
            bump = generalized_landscape(d, 1, Kernel(KernelFamily.TRIANGLE), (death - birth) / 2.0, 1, grid)
            np.testing.assert_allclose(bump.orders, landscape(d, 1, 1, grid).orders, rtol=0.0, atol=1e-12)

    def test_triangle_on_equal_lifetimes(self):
        """With one shared half-lifetime every order matches the landscape"""
        grid = Grid1D(0.0, 6.0, 121)
        d = diagram((0.0, 2.0), (0.5, 2.5), (3.0, 5.0))
        bumps = generalized_landscape(d, 1, Kernel(KernelFamily.TRIANGLE), 1.0, 3, grid)
        np.testing.assert_allclose(bumps.orders, landscape(d, 1, 3, grid).orders, rtol=0.0, atol=1e-12)


@pytest.mark.unit
class BruteForceOracleTest(SimpleTestCase):
    """Vectorised summaries against pointwise evaluation"""

    def test_random_diagrams(self):
        """Landscapes and APFs bit-equal, weighted sums within 1e-12"""
        rng = np.random.default_rng(2024)
        grid = Grid1D(0.0, 5.0, 41)
        for _ in range(100):
            points = random_points(rng)
            d = diagram(*points)
            land = landscape(d, 1, 3, grid)
            accumulated = apf(d, 1, grid)
            for i, t in enumerate(grid.samples.tolist()):
                for k in (1, 2, 3):
                    self.assertEqual(land.orders[k - 1, i], brute_landscape(points, t, k))
                self.assertEqual(accumulated.orders[0, i], brute_apf(points, t))
            for family in KernelFamily.values:
                kernel = Kernel(family)
                for h in (0.05, 0.25, 1.0):
                    curve = generalized_landscape(d, 1, kernel, h, 2, grid)
                    for i, t in enumerate(grid.samples.tolist()):
                        bumps = sorted(
                            ((d_ - b) / 2.0 * float(kernel(((t - (b + d_) / 2.0)) / h)) for b, d_ in points),
                            reverse=True,
                        )
                        self.assertAlmostEqual(curve.orders[0, i], bumps[0], delta=1e-12)
            if any(d_ > b for b, d_ in points):
                for p in (0.5, 1.0, 2.0):
                    curve = silhouette(d, 1, p, grid)
                    weights = [(d_ - b) ** p for b, d_ in points]
                    for i, t in enumerate(grid.samples.tolist()):
                        tents = [max(min(t - b, d_ - t), 0.0) for b, d_ in points]
                        expected = sum(w * v for w, v in zip(weights, tents)) / sum(weights)
                        self.assertAlmostEqual(curve.orders[0, i], expected, delta=1e-12)


@pytest.mark.unit
class IntensityTest(SimpleTestCase):

    def setUp(self):
        self.birth_grid = Grid1D(-1.0, 1.0, 3)
        self.death_grid = Grid1D(1.0, 3.0, 3)

    def test_value_at_the_point(self):
        """omega(d - b) K(0) at (b, d)"""
        surface = intensity(diagram((0.0, 2.0)), Kernel(), 0.5, 1.0, self.birth_grid, self.death_grid)
        self.assertEqual(surface.values[1, 1], 2.0)

    def test_vanishes_beyond_h(self):
        """Cells farther than h get nothing"""
        surface = intensity(diagram((0.0, 2.0)), Kernel(), 0.5, 1.0, self.birth_grid, self.death_grid)
        self.assertEqual(surface.values[2, 2], 0.0)

    def test_duplicated_point(self):
        """Doubling the only point leaves the surface unchanged"""
        once = intensity(diagram((0.0, 2.0)), Kernel(), 0.7, 1.0, self.birth_grid, self.death_grid)
        twice = intensity(diagram((0.0, 2.0), (0.0, 2.0)), Kernel(), 0.7, 1.0, self.birth_grid, self.death_grid)
        np.testing.assert_allclose(once.values, twice.values, rtol=1e-15)

    def test_empty(self):
        """No points, no intensity"""
        with self.assertRaises(EmptyDiagram):
            intensity(PersistenceDiagram(), Kernel(), 0.5, 1.0, self.birth_grid, self.death_grid)

    def test_persistence_image_is_row_major(self):
        """[[1, 2], [3, 4]] becomes [1, 2, 3, 4]"""
        grid = Grid1D(0.0, 1.0, 2)
        surface = SummarySurface(grid, grid, [[1.0, 2.0], [3.0, 4.0]])
        self.assertEqual(list(persistence_image(surface)), [1.0, 2.0, 3.0, 4.0])
        self.assertEqual(persistence_image(surface).sum(), surface.values.sum())


@pytest.mark.unit
class SummarySpecTest(SimpleTestCase):

    def test_parse(self):
        """kind[:param[:kernel]]"""
        spec = SummarySpec.parse("glandscape:0.05:tricube", dim=1, k_max=2)
        self.assertEqual((spec.kind, spec.h, spec.kernel, spec.k_max), (
            SummaryKind.GENERALIZED_LANDSCAPE, 0.05, KernelFamily.TRICUBE, 2,
        ))
        self.assertEqual(SummarySpec.parse("silhouette:2").p, 2.0)
        self.assertEqual(spec.label, "glandscape(h=0.05)")

    def test_single_order_kinds(self):
        """Silhouettes and APFs have one order"""
        self.assertEqual(SummarySpec(SummaryKind.APF, k_max=3).k_max, 1)

    def test_unknown_kind(self):
        """Unknown kinds are rejected"""
        with self.assertRaises(ValueError):
            SummarySpec.parse("wavelet")

    def test_summarize_dispatch(self):
        """summarize picks the formula its SummarySpec names"""
        grid = Grid1D(0.0, 2.0, 5)
        d = diagram((0.0, 2.0))
        np.testing.assert_array_equal(summarize(d, SummarySpec(), grid).orders, landscape(d, 1, 1, grid).orders)
        np.testing.assert_array_equal(summarize(d, SummarySpec(SummaryKind.APF), grid).orders,
                                      apf(d, 1, grid).orders)

    def test_upper_bound(self):
        """Half the longest lifetime, or total persistence for the APF"""
        d = diagram((0.0, 2.0), (1.0, 4.0))
        self.assertEqual(upper_bound(d, SummarySpec()), 1.5)
        self.assertEqual(upper_bound(d, SummarySpec(SummaryKind.APF)), 5.0)
