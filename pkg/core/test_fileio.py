"""
Tests for the file formats.
"""

import json
import math
import tempfile
from pathlib import Path

import numpy as np
import pytest
from django.test import SimpleTestCase

from .domain import DiagramPoint, Grid1D, Orientation, PersistenceDiagram, PointCloud, ScalarField
from .exceptions import MalformedFile
from .fileio import (
    file_digest,
    read_cloud,
    read_config,
    read_curve,
    read_diagram,
    read_field,
    read_labels,
    read_matrix,
    write_cloud,
    write_curve,
    write_diagram,
    write_field,
    write_json,
    write_labels,
)
from .testing import curve


@pytest.mark.unit
class FileFormatTest(SimpleTestCase):

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def write(self, name, text):
        path = self.tmp / name
        path.write_text(text, encoding="utf-8")
        return path

    def test_diagram_survives_a_round_trip(self):
        """Points and essential flags come back bit for bit"""
        original = PersistenceDiagram((
            DiagramPoint(0, -2.0, -0.1, True),
            DiagramPoint(1, 0.1 + 0.2, 1.0 / 3.0),
        ), Orientation.SUPERLEVEL_NEGATED)
        path = write_diagram(original, self.tmp / "d.csv")
        self.assertEqual(path.read_text(encoding="utf-8").splitlines()[0], "dim,birth,death,essential")
        back = read_diagram(path)
        self.assertEqual(back.points, original.points)
        self.assertEqual(back.orientation, Orientation.SUPERLEVEL_NEGATED)

    def test_sublevel_orientation_round_trip(self):
        """A sublevel diagram names its orientation on line 1 and keeps it"""
        original = PersistenceDiagram((DiagramPoint(1, 0.5, 2.0),), Orientation.SUBLEVEL_CANONICAL)
        path = write_diagram(original, self.tmp / "d.csv")
        self.assertEqual(path.read_text(encoding="utf-8").splitlines()[0], "# orientation: sublevel_canonical")
        back = read_diagram(path)
        self.assertEqual(back.orientation, Orientation.SUBLEVEL_CANONICAL)
        self.assertEqual(back.points, original.points)

    def test_orientation_line_overrides_default(self):
        """The file's orientation line wins over the superlevel default"""
        path = self.write("d.csv", "# orientation: sublevel_canonical\ndim,birth,death,essential\n1,0,1,0\n")
        self.assertEqual(read_diagram(path).orientation, Orientation.SUBLEVEL_CANONICAL)
        self.assertEqual(read_diagram(path, Orientation.SUBLEVEL_CANONICAL).orientation,
                         Orientation.SUBLEVEL_CANONICAL)

    def test_orientation_line_conflict(self):
        """Asking for another orientation than the file states is malformed"""
        path = self.write("d.csv", "# orientation: sublevel_canonical\ndim,birth,death,essential\n1,0,1,0\n")
        with self.assertRaises(MalformedFile) as ctx:
            read_diagram(path, Orientation.SUPERLEVEL_NEGATED)
        self.assertEqual(ctx.exception.line, 1)

    def test_unknown_orientation(self):
        """An unknown orientation is reported on line 1"""
        path = self.write("d.csv", "# orientation: sideways\ndim,birth,death,essential\n1,0,1,0\n")
        with self.assertRaises(MalformedFile) as ctx:
            read_diagram(path)
        self.assertEqual(ctx.exception.line, 1)

    def test_line_numbers_count_the_orientation_line(self):
        """Row errors after an orientation line point at the right line"""
        path = self.write("d.csv", "# orientation: sublevel_canonical\ndim,birth,death,essential\n1,0,1,0\n1,x,2,0\n")
        with self.assertRaises(MalformedFile) as ctx:
            read_diagram(path)
        self.assertEqual(ctx.exception.line, 4)

    def test_diagram_bad_header(self):
        """A wrong header is reported on line 1"""
        path = self.write("d.csv", "dim,b,d,essential\n0,0,1,0\n")
        with self.assertRaises(MalformedFile) as ctx:
            read_diagram(path)
        self.assertEqual(ctx.exception.line, 1)

    def test_diagram_bad_value_line(self):
        """A non-number is reported with its line"""
        path = self.write("d.csv", "dim,birth,death,essential\n1,0,1,0\n1,x,2,0\n")
        with self.assertRaises(MalformedFile) as ctx:
            read_diagram(path)
        self.assertEqual(ctx.exception.line, 3)
        self.assertIn(f"{path}:3:", str(ctx.exception))

    def test_diagram_inverted_point(self):
        """death < birth is malformed"""
        path = self.write("d.csv", "dim,birth,death,essential\n1,2,1,0\n")
        with self.assertRaises(MalformedFile):
            read_diagram(path)

    def test_missing_file(self):
        """Missing files raise FileNotFoundError"""
        with self.assertRaises(FileNotFoundError):
            read_diagram(self.tmp / "absent.csv")

    def test_field_round_trip(self):
        """Field values, shape and extent are preserved"""
        field = ScalarField(np.arange(6, dtype=float).reshape(2, 3) / 7.0, (0.0, 0.0, 1.5, 2.0))
        back = read_field(write_field(field, self.tmp / "f.txt"))
        np.testing.assert_array_equal(back.values, field.values)
        self.assertEqual(back.extent, field.extent)

    def test_field_short_row(self):
        """A row with too few values names its line"""
        path = self.write("f.txt", "2 2 0 0 2 2\n1 2\n3\n")
        with self.assertRaises(MalformedFile) as ctx:
            read_field(path)
        self.assertEqual(ctx.exception.line, 3)

    def test_field_trailing_data(self):
        """Extra rows are rejected"""
        path = self.write("f.txt", "1 2 0 0 2 1\n1 2\n3 4\n")
        with self.assertRaises(MalformedFile):
            read_field(path)

    def test_cloud_round_trip(self):
        """Point coordinates are preserved"""
        cloud = PointCloud([[0.25, 0.5], [1.0 / 3.0, 2.0]])
        back = read_cloud(write_cloud(cloud, self.tmp / "c.csv"))
        np.testing.assert_array_equal(back.points, cloud.points)

    def test_curve_round_trip_keeps_grid(self):
        """A written curve reads back onto an equal grid"""
        original = curve([[0.0, 0.5, 1.0, 0.5], [0.0, 0.0, 0.25, 0.0]], grid=Grid1D(-0.3, 1.7, 4))
        back = read_curve(write_curve(original, self.tmp / "c.csv"))
        self.assertEqual(back.grid, original.grid)
        np.testing.assert_array_equal(back.orders, original.orders)

    def test_curve_non_uniform_grid(self):
        """A t column that is not evenly spaced is rejected"""
        path = self.write("c.csv", "t,k1\n0,1\n0.1,1\n1,1\n")
        with self.assertRaises(MalformedFile):
            read_curve(path)

    def test_curve_bad_header(self):
        """Order columns must be k1..kK"""
        path = self.write("c.csv", "t,k2\n0,1\n1,1\n")
        with self.assertRaises(MalformedFile):
            read_curve(path)

    def test_labels(self):
        """Labels are non-negative integers"""
        labels = read_labels(write_labels([0, 2, 1], self.tmp / "l.csv"))
        self.assertEqual(labels, [0, 2, 1])
        with self.assertRaises(MalformedFile):
            read_labels(self.write("bad.csv", "id,label\n0,-1\n"))

    def test_matrix_must_be_square(self):
        """A rectangular matrix is malformed"""
        with self.assertRaises(MalformedFile):
            read_matrix(self.write("m.csv", "0,1,2\n1,0,3\n"))

    def test_config_ignores_comments(self):
        """Blank lines and comments are skipped"""
        path = self.write("c.env", "# STIX run\nexperiment=stix\n\nseed=4\n")
        self.assertEqual(read_config(path), {"experiment": "stix", "seed": "4"})

    def test_json_writes_infinity_as_text(self):
        """Infinite values become the string 'inf'"""
        path = write_json({"p": math.inf, "values": np.array([1.0, 2.0])}, self.tmp / "r.json")
        self.assertEqual(json.loads(path.read_text()), {"p": "inf", "values": [1.0, 2.0]})

    def test_identical_writes_share_a_digest(self):
        """Writing the same diagram twice gives byte-identical files"""
        diagram = PersistenceDiagram((DiagramPoint(1, 0.1, 0.7),))
        first = write_diagram(diagram, self.tmp / "a.csv")
        second = write_diagram(diagram, self.tmp / "b.csv")
        self.assertEqual(file_digest(first), file_digest(second))
