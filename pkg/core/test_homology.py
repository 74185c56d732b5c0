"""
Tests for cubical superlevel persistence, the Betti oracle and tiling.
"""

import numpy as np
import pytest
from django.test import SimpleTestCase, override_settings

from .domain import ScalarField
from .exceptions import BadDim, BadTiling
from .homology import (
    CubicalComplex,
    alive_counts,
    betti_at_level,
    persistence_pairs,
    superlevel_diagram,
    tile_field,
)
from .testing import peaks_field, ring_field


def random_field(seed, rows=6, cols=6, levels=3):
    rng = np.random.default_rng(seed)
    return ScalarField(rng.integers(0, levels, size=(rows, cols)).astype(float), source=f"random {seed}")


def assert_matches_oracle(testcase, field):
    for method in ("reduction", "union_find"):
        diagram = superlevel_diagram(field, max_dim=1, method=method)
        for level in np.unique(field.values):
            testcase.assertEqual(
                alive_counts(diagram, level), betti_at_level(field, level),
                msg=f"{field.source}, {method}, level {level}",
            )


@pytest.mark.unit
class SuperlevelDiagramTest(SimpleTestCase):
    """Hand-checked diagrams"""

    def test_constant_field(self):
        """One essential class of lifetime zero and nothing else"""
        diagram = superlevel_diagram(ScalarField(np.full((4, 3), 2.5)))
        self.assertEqual(len(diagram), 1)
        point = diagram.points[0]
        self.assertTrue(point.essential)
        self.assertEqual((point.birth, point.death), (-2.5, -2.5))

    def test_two_peaks_elder_rule(self):
        """The younger peak dies where it meets the older one"""
        diagram = superlevel_diagram(peaks_field())
        raw = diagram.raw_levels()
        self.assertEqual([(p.dim, p.birth_level, p.death_level, p.essential) for p in raw], [
            (0, 2.0, 0.0, True),
            (0, 1.0, 0.0, False),
        ])

    def test_ring_has_one_loop(self):
        """A ring of ones around a zero centre carries one H1 class from 1 to 0"""
        diagram = superlevel_diagram(ring_field())
        loops = [p for p in diagram.raw_levels() if p.dim == 1]
        self.assertEqual([(p.birth_level, p.death_level) for p in loops], [(1.0, 0.0)])

    def test_max_dim_zero_drops_loops(self):
        """max_dim=0 reports components only"""
        diagram = superlevel_diagram(ring_field(), max_dim=0)
        self.assertEqual(len(diagram.births(1)), 0)

    def test_single_pixel(self):
        """A 1x1 field is one essential point"""
        diagram = superlevel_diagram(ScalarField([[3.0]]))
        self.assertEqual(len(diagram), 1)

    def test_single_row(self):
        """A 1xN field has no squares and no loops"""
        field = ScalarField([[3.0, 0.0, 2.0, 0.0, 1.0]])
        raw = superlevel_diagram(field).raw_levels()
        self.assertEqual(sorted((p.birth_level, p.death_level) for p in raw), [(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)])

    def test_canonical_coordinates(self):
        """Every stored point has death >= birth"""
        diagram = superlevel_diagram(random_field(11, 8, 8, 5))
        self.assertTrue(np.all(diagram.deaths() >= diagram.births()))

    def test_bad_max_dim(self):
        """Only dimensions 0 and 1 exist on a 2D grid"""
        with self.assertRaises(BadDim):
            superlevel_diagram(ring_field(), max_dim=2)

    def test_unknown_method(self):
        """Unknown algorithms are rejected"""
        with self.assertRaises(ValueError):
            persistence_pairs(CubicalComplex(ring_field()), method="magic")

    @override_settings(TDASUM_HOMOLOGY_METHOD="union_find")
    def test_method_from_settings(self):
        """The default algorithm comes from settings"""
        diagram = superlevel_diagram(ring_field())
        self.assertEqual(len(diagram.births(1)), 1)


@pytest.mark.unit
class MethodAgreementTest(SimpleTestCase):
    """Both algorithms give identical diagrams"""

    def test_random_fields(self):
        """Reduction and dual union-find agree point for point"""
        for seed in range(40):
            field = random_field(seed, rows=7, cols=9, levels=4)
            self.assertEqual(
                superlevel_diagram(field, method="reduction").points,
                superlevel_diagram(field, method="union_find").points,
                msg=f"seed {seed}",
            )

    def test_continuous_values(self):
        """Agreement also holds without ties"""
        rng = np.random.default_rng(5)
        field = ScalarField(rng.standard_normal((12, 10)))
        self.assertEqual(
            superlevel_diagram(field, method="reduction").points,
            superlevel_diagram(field, method="union_find").points,
        )


@pytest.mark.unit
class MonotoneRescalingTest(SimpleTestCase):
    """A strictly increasing map of the values moves every pair, never changes which cells pair"""

    def test_exponential_rescaling(self):
        """Raw levels of exp(f) are exp of the raw levels of f"""
        for seed in range(30):
            values = np.random.default_rng(seed).standard_normal((8, 8))
            for method in ("reduction", "union_find"):
                plain = superlevel_diagram(ScalarField(values), method=method).raw_levels()
                scaled = superlevel_diagram(ScalarField(np.exp(values)), method=method).raw_levels()
                self.assertEqual([(p.dim, p.essential) for p in scaled], [(p.dim, p.essential) for p in plain])
                np.testing.assert_allclose([p.birth_level for p in scaled], np.exp([p.birth_level for p in plain]),
                                           rtol=1e-12)
                np.testing.assert_allclose([p.death_level for p in scaled], np.exp([p.death_level for p in plain]),
                                           rtol=1e-12)

    def test_integer_levels_shifted_and_scaled(self):
        """3f + 1 on a three-level field keeps the alive counts at the mapped levels"""
        field = random_field(5)
        mapped = ScalarField(3.0 * field.values + 1.0)
        diagram = superlevel_diagram(field)
        mapped_diagram = superlevel_diagram(mapped)
        for level in np.unique(field.values):
            self.assertEqual(alive_counts(mapped_diagram, 3.0 * level + 1.0), alive_counts(diagram, level))


@pytest.mark.unit
class BettiOracleTest(SimpleTestCase):
    """betti_at_level and agreement with the diagrams"""

    def test_constant_field(self):
        """Above the field nothing is left; at or below it one component"""
        field = ScalarField(np.ones((3, 3)))
        self.assertEqual(betti_at_level(field, 0.0), (1, 0))
        self.assertEqual(betti_at_level(field, 2.0), (0, 0))

    def test_ring(self):
        """The thresholded ring is one component with one hole"""
        self.assertEqual(betti_at_level(ring_field(), 1.0), (1, 1))

    def test_diagonal_pixels_are_separate(self):
        """Pixels touching only at a corner are two components"""
        field = ScalarField(np.array([[1.0, 0.0], [0.0, 1.0]]))
        self.assertEqual(betti_at_level(field, 1.0), (2, 0))
        self.assertEqual(alive_counts(superlevel_diagram(field), 1.0), (2, 0))

    def test_alive_counts_match_oracle(self):
        """Alive features equal Betti numbers at every level"""
        for seed in range(60):
            assert_matches_oracle(self, random_field(seed))

    def test_alive_counts_on_ring(self):
        """The ring's loop is alive at level 1 only"""
        diagram = superlevel_diagram(ring_field())
        self.assertEqual(alive_counts(diagram, 1.0), (1, 1))
        self.assertEqual(alive_counts(diagram, 0.0), (1, 0))


@pytest.mark.unit
class GudhiCrossCheckTest(SimpleTestCase):
    """Finite pairs agree with an independent cubical implementation"""

    def test_against_gudhi(self):
        """Vertex-based cubical complexes give the same finite pairs"""
        gudhi = pytest.importorskip("gudhi")
        rng = np.random.default_rng(21)
        field = ScalarField(rng.standard_normal((9, 7)))
        try:
            complex_ = gudhi.CubicalComplex(vertices=-field.values)
        except TypeError:
            pytest.skip("gudhi without vertex-based cubical complexes")
        complex_.compute_persistence()
        expected = sorted(
            (dim, -birth, -death)
            for dim, (birth, death) in complex_.persistence()
            if np.isfinite(death) and death > birth
        )
        raw = superlevel_diagram(field).raw_levels()
        found = sorted((p.dim, p.birth_level, p.death_level) for p in raw if not p.essential)
        self.assertEqual(len(found), len(expected))
        for ours, theirs in zip(found, expected):
            self.assertEqual(ours[0], theirs[0])
            self.assertAlmostEqual(ours[1], theirs[1], places=12)
            self.assertAlmostEqual(ours[2], theirs[2], places=12)


@pytest.mark.unit
class TileFieldTest(SimpleTestCase):
    """Splitting images into tiles"""

    def test_three_by_four(self):
        """300x400 gives twelve 100x100 tiles"""
        tiles = tile_field(ScalarField(np.zeros((300, 400)), source="img"), 3, 4)
        self.assertEqual(len(tiles), 12)
        self.assertTrue(all(tile.shape == (100, 100) for tile in tiles))
        self.assertEqual(tiles[5].source, "img tile 1,1")

    def test_one_by_one(self):
        """A single tile is the field itself"""
        field = ring_field()
        self.assertIs(tile_field(field, 1, 1)[0], field)

    def test_truncation(self):
        """5x5 into 2x2 drops the last row and column"""
        values = np.arange(25, dtype=float).reshape(5, 5)
        tiles = tile_field(ScalarField(values, source="f"), 2, 2)
        self.assertEqual([tile.shape for tile in tiles], [(2, 2)] * 4)
        np.testing.assert_array_equal(tiles[3].values, values[2:4, 2:4])
        self.assertIn("(truncated)", tiles[0].source)

    def test_tile_extent(self):
        """Tiles carry their own part of the extent"""
        tiles = tile_field(ScalarField(np.zeros((4, 4)), (0.0, 0.0, 2.0, 2.0)), 2, 2)
        self.assertEqual(tiles[1].extent, (1.0, 0.0, 2.0, 1.0))

    def test_bad_tiling(self):
        """Counts must be positive and fit the field"""
        with self.assertRaises(BadTiling):
            tile_field(ring_field(), 0, 1)
        with self.assertRaises(BadTiling):
            tile_field(ring_field(), 6, 1)
