"""
Small builders shared by the test modules.
"""

import numpy as np

from .domain import DiagramPoint, Grid1D, PersistenceDiagram, ScalarField, SummaryCurve, SummaryKind

UNIT_GRID = Grid1D(0.0, 1.0, 11)


def diagram(*points, dim=1, source="test"):
    """Canonical diagram of (birth, death) points, all of one dimension."""
    return PersistenceDiagram(tuple(DiagramPoint(dim, b, d) for b, d in points), source=source)


def constant_curve(value, grid=UNIT_GRID, k_max=1, kind=SummaryKind.LANDSCAPE):
    return SummaryCurve(grid, np.full((k_max, grid.m), float(value)), kind)


def curve(values, grid=None, kind=SummaryKind.LANDSCAPE):
    values = np.atleast_2d(np.asarray(values, dtype=float))
    grid = grid or Grid1D(0.0, 1.0, values.shape[1])
    return SummaryCurve(grid, values, kind)


def ring_field():
    values = np.zeros((5, 5))
    values[1:4, 1:4] = 1.0
    values[2, 2] = 0.0
    return ScalarField(values, source="ring")


def peaks_field():
    """Corner peaks 2 and 1 joined through zeros."""
    return ScalarField(np.array([[2.0, 0.0, 1.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]), source="peaks")
