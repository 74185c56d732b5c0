"""
Functional summaries of persistence diagrams.

Curves (landscape, generalized landscape, silhouette, APF) are sampled on a
Grid1D; the persistence intensity is sampled on a pair of grids over the
(birth, death) plane. All formulas assume canonical diagrams (death >= birth).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from django.conf import settings

from .domain import Grid1D, Kernel, KernelFamily, SummaryCurve, SummaryKind, _frozen_array
from .exceptions import BadBandwidth, BadP, EmptyDiagram, EmptySilhouette

logger = logging.getLogger(__name__)


class RotatedPoint(NamedTuple):
    x: float
    y: float


def rotate(diagram, dim=None):
    """Midpoint and half-lifetime of every point: x = (b + d) / 2, y = (d - b) / 2."""
    return [
        RotatedPoint((b + d) / 2.0, (d - b) / 2.0)
        for b, d in zip(diagram.births(dim), diagram.deaths(dim))
    ]


def default_grid(diagrams, dim=None, m=None, padding=None):
    return Grid1D.covering(
        diagrams,
        dim=dim,
        m=settings.TDASUM_GRID_SIZE if m is None else m,
        padding=settings.TDASUM_GRID_PADDING if padding is None else padding,
    )


def _tents(diagram, dim, grid):
    """(n, m) matrix of min(t - b_j, d_j - t)_+."""
    t = grid.samples
    births = diagram.births(dim)[:, None]
    deaths = diagram.deaths(dim)[:, None]
    return np.maximum(np.minimum(t - births, deaths - t), 0.0)


def _kth_largest(values, k_max, m):
    """Rows 1..k_max of the column-wise descending sort, zero-padded."""
    orders = np.zeros((k_max, m))
    if len(values):
        ranked = np.sort(values, axis=0)[::-1]
        top = min(k_max, ranked.shape[0])
        orders[:top] = ranked[:top]
    return orders


def _check_bandwidth(h):
    if not (math.isfinite(h) and h > 0):
        raise BadBandwidth(f"bandwidth must be positive, got {h}")


def landscape(diagram, dim, k_max, grid):
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    orders = _kth_largest(_tents(diagram, dim, grid), k_max, grid.m)
    return SummaryCurve(grid, orders, SummaryKind.LANDSCAPE, {"dim": dim, "k_max": k_max})


def generalized_landscape(diagram, dim, kernel, h, k_max, grid):
    """k-th largest of y_j K((t - x_j) / h) / K(0); each bump passes through (x_j, y_j)."""
    _check_bandwidth(h)
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    kernel = kernel if isinstance(kernel, Kernel) else Kernel(kernel)
    births, deaths = diagram.births(dim), diagram.deaths(dim)
    x = ((births + deaths) / 2.0)[:, None]
    y = ((deaths - births) / 2.0)[:, None]
    peak = float(kernel(0.0))
    bumps = y * kernel((grid.samples - x) / h) / peak
    orders = _kth_largest(bumps, k_max, grid.m)
    params = {"dim": dim, "k_max": k_max, "kernel": str(kernel.family), "h": h}
    return SummaryCurve(grid, orders, SummaryKind.GENERALIZED_LANDSCAPE, params)


def silhouette(diagram, dim, p, grid):
    """Average of the tent functions weighted by lifetime^p."""
    if not p > 0:
        raise BadP(f"silhouette exponent must be positive, got {p}")
    weights = np.abs(diagram.lifetimes(dim)) ** p
    total = weights.sum()
    if not total > 0:
        raise EmptySilhouette(
            f"no dim-{dim} point with positive lifetime in {diagram.source or 'diagram'}"
        )
    values = weights @ _tents(diagram, dim, grid) / total
    return SummaryCurve(grid, values, SummaryKind.SILHOUETTE, {"dim": dim, "p": p})


def apf(diagram, dim, grid):
    """Sum of lifetimes of the points whose midpoint is at or before t."""
    t2 = 2.0 * grid.samples
    values = np.zeros(grid.m)
    for birth, death in zip(diagram.births(dim), diagram.deaths(dim)):
        values += np.where(birth + death <= t2, death - birth, 0.0)
    return SummaryCurve(grid, values, SummaryKind.APF, {"dim": dim})


# Surfaces

@dataclass(frozen=True, eq=False)
class SummarySurface:
    birth_grid: Grid1D
    death_grid: Grid1D
    values: np.ndarray
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        values = _frozen_array(self.values, ndim=2)
        if values.shape != (self.birth_grid.m, self.death_grid.m):
            raise ValueError(
                f"surface of shape {values.shape} does not fit {self.birth_grid.m}x{self.death_grid.m} grids"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("surface values must be finite")
        object.__setattr__(self, "values", values)


def intensity(diagram, kernel, h, p_weight, birth_grid, death_grid, dim=None):
    """(1 / |D|) sum_j |d_j - b_j|^p_weight K(|(b_j, d_j) - (t, s)| / h)."""
    _check_bandwidth(h)
    kernel = kernel if isinstance(kernel, Kernel) else Kernel(kernel)
    births, deaths = diagram.births(dim), diagram.deaths(dim)
    if len(births) == 0:
        raise EmptyDiagram(f"no points of dim {dim} in {diagram.source or 'diagram'}")
    weights = np.abs(deaths - births) ** p_weight
    t = birth_grid.samples[:, None]
    s = death_grid.samples[None, :]
    values = np.zeros((birth_grid.m, death_grid.m))
    for weight, birth, death in zip(weights, births, deaths):
        values += weight * kernel(np.hypot(t - birth, s - death) / h)
    values /= len(births)
    params = {"dim": dim, "kernel": str(kernel.family), "h": h, "p_weight": p_weight}
    return SummarySurface(birth_grid, death_grid, values, params)


def persistence_image(surface):
    """Row-major vectorisation of the surface."""
    return np.array(surface.values).ravel()


# Dispatch

@dataclass(frozen=True)
class SummarySpec:
    """Everything needed to turn a diagram into one kind of curve."""

    kind: str = SummaryKind.LANDSCAPE
    dim: int = 1
    k_max: int = 1
    kernel: str = KernelFamily.TRIANGLE
    h: float = 0.1
    p: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", SummaryKind(self.kind))
        object.__setattr__(self, "kernel", KernelFamily(self.kernel))
        if self.kind in (SummaryKind.SILHOUETTE, SummaryKind.APF):
            object.__setattr__(self, "k_max", 1)
        if self.kind == SummaryKind.GENERALIZED_LANDSCAPE:
            _check_bandwidth(self.h)

    @property
    def label(self):
        if self.kind == SummaryKind.GENERALIZED_LANDSCAPE:
            return f"glandscape(h={self.h:g})"
        if self.kind == SummaryKind.SILHOUETTE:
            return f"silhouette(p={self.p:g})"
        return str(self.kind)

    @classmethod
    def parse(cls, text, dim=1, k_max=1):
        """Read ``kind[:param[:kernel]]``, e.g. ``glandscape:0.05:tricube`` or ``silhouette:2``."""
        parts = [part.strip() for part in text.split(":")]
        kind = SummaryKind(parts[0])
        options = {"kind": kind, "dim": dim, "k_max": k_max}
        if kind == SummaryKind.GENERALIZED_LANDSCAPE:
            if len(parts) > 1:
                options["h"] = float(parts[1])
            if len(parts) > 2:
                options["kernel"] = parts[2]
        elif kind == SummaryKind.SILHOUETTE and len(parts) > 1:
            options["p"] = float(parts[1])
        return cls(**options)


def summarize(diagram, spec, grid):
    if spec.kind == SummaryKind.LANDSCAPE:
        return landscape(diagram, spec.dim, spec.k_max, grid)
    if spec.kind == SummaryKind.GENERALIZED_LANDSCAPE:
        return generalized_landscape(diagram, spec.dim, Kernel(spec.kernel), spec.h, spec.k_max, grid)
    if spec.kind == SummaryKind.SILHOUETTE:
        return silhouette(diagram, spec.dim, spec.p, grid)
    return apf(diagram, spec.dim, grid)


def upper_bound(diagram, spec):
    """Largest value any curve of ``spec`` can take for ``diagram``."""
    if spec.kind == SummaryKind.APF:
        return diagram.total_persistence(spec.dim)
    return diagram.max_half_lifetime(spec.dim)


def zero_curve(spec, grid):
    return SummaryCurve(grid, np.zeros((spec.k_max, grid.m)), spec.kind, {"dim": spec.dim, "empty": True})


def summarize_or_zero(diagram, spec, grid):
    """Summary of ``diagram``, or the zero curve when a silhouette has no weight."""
    try:
        return summarize(diagram, spec, grid)
    except EmptySilhouette:
        logger.warning("%s: empty silhouette replaced by zero", diagram.source or "diagram")
        return zero_curve(spec, grid)
