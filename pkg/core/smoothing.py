"""
Kernel density estimation on grids and local quadratic (loess) smoothing of images.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from django.conf import settings
from scipy.spatial import cKDTree

from .domain import Kernel, KernelFamily, ScalarField
from .exceptions import BadBandwidth, EmptyCloud, SingularFit, TooFewPixels
from .homology import superlevel_diagram

logger = logging.getLogger(__name__)

# padding of the default KDE extent, in bandwidths
KDE_PADDING = 3.0


@dataclass(frozen=True)
class KdeSpec:
    h: float
    kernel: Kernel = field(default_factory=lambda: Kernel(KernelFamily.TRUNCATED_GAUSSIAN))
    rows: int = 128
    cols: int = 128
    extent: Optional[tuple] = None

    def __post_init__(self):
        if not (math.isfinite(self.h) and self.h > 0):
            raise BadBandwidth(f"bandwidth must be positive, got {self.h}")
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"KDE grid must be at least 1x1, got {self.rows}x{self.cols}")
        if not isinstance(self.kernel, Kernel):
            object.__setattr__(self, "kernel", Kernel(self.kernel))
        if self.extent is not None:
            extent = tuple(float(v) for v in self.extent)
            if len(extent) != 4 or not (extent[2] > extent[0] and extent[3] > extent[1]):
                raise ValueError(f"extent must be (x0, y0, x1, y1) with x1 > x0 and y1 > y0, got {extent}")
            object.__setattr__(self, "extent", extent)

    def resolve_extent(self, points):
        if self.extent is not None:
            return self.extent
        pad = KDE_PADDING * self.h
        lo = points.min(axis=0) - pad
        hi = points.max(axis=0) + pad
        return (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))


def grid_centres(rows, cols, extent):
    """(rows * cols, 2) array of (x, y) cell centres, row-major; row i runs along y."""
    x0, y0, x1, y1 = extent
    xs = x0 + (np.arange(cols) + 0.5) * (x1 - x0) / cols
    ys = y0 + (np.arange(rows) + 0.5) * (y1 - y0) / rows
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel()])


def kde(points, spec):
    """p(x) = 1 / (n h^2) * sum_i K(|X_i - x| / h) evaluated at every cell centre.

    K is the kernel's radial profile normalised to integrate to one over the
    plane, so the field is a density.
    """
    if len(points) == 0:
        raise EmptyCloud("cannot estimate a density from an empty point cloud")
    if points.dim != 2:
        raise ValueError(f"KDE needs 2D points, got dimension {points.dim}")
    data = points.points
    extent = spec.resolve_extent(data)
    centres = grid_centres(spec.rows, spec.cols, extent)
    radius = spec.kernel.kde_radius * spec.h

    tree = cKDTree(centres)
    neighbours = tree.query_ball_point(data, r=radius)
    counts = np.fromiter((len(n) for n in neighbours), dtype=np.int64, count=len(neighbours))
    cell = np.concatenate([np.asarray(n, dtype=np.int64) for n in neighbours]) if counts.sum() else np.empty(0, int)
    owner = np.repeat(np.arange(len(data)), counts)
    distance = np.hypot(*(centres[cell] - data[owner]).T)

    weights = spec.kernel.density_profile(distance / spec.h)
    density = np.bincount(cell, weights=weights, minlength=spec.rows * spec.cols)
    density /= len(data) * spec.h * spec.h
    logger.debug("kde: %d points on a %dx%d grid, h=%g", len(data), spec.rows, spec.cols, spec.h)
    return ScalarField(density.reshape(spec.rows, spec.cols), extent, source=f"kde(h={spec.h:g})")


def point_cloud_diagram(points, spec, max_dim=1, method=None):
    return superlevel_diagram(kde(points, spec), max_dim, method)


# Loess

@dataclass(frozen=True)
class LoessSpec:
    """Local quadratic regression over the nearest ``neighbor_fraction`` of all pixels.

    The window never holds fewer than ``min_neighbours`` pixels. Tricube
    weights vanish at the farthest neighbour, so 13 is the least window that
    leaves a full 3x3 block carrying weight.
    """

    neighbor_fraction: float = 0.001
    min_neighbours: int = 13
    degree: int = 2

    def __post_init__(self):
        if not 0 < self.neighbor_fraction <= 1:
            raise ValueError(f"neighbor_fraction must lie in (0, 1], got {self.neighbor_fraction}")
        if self.degree != 2:
            raise ValueError("only local quadratic fits are supported")
        if self.min_neighbours < 6:
            raise ValueError(f"a quadratic fit needs at least 6 neighbours, got {self.min_neighbours}")

    @classmethod
    def from_settings(cls, neighbor_fraction=None):
        return cls(
            neighbor_fraction=settings.TDASUM_LOESS_FRACTION if neighbor_fraction is None else neighbor_fraction,
            min_neighbours=settings.TDASUM_LOESS_MIN_NEIGHBOURS,
        )

    def window_size(self, n_pixels):
        return min(n_pixels, max(math.ceil(self.neighbor_fraction * n_pixels - 1e-9), self.min_neighbours))


def _tricube(u):
    return np.where(u < 1.0, (1.0 - u ** 3) ** 3, 0.0)


def _hat_row(dy, dx, weights):
    """Weights that map window values to the fitted value at the centre."""
    design = np.column_stack([np.ones_like(dy), dy, dx, dy * dy, dy * dx, dx * dx])
    root = np.sqrt(weights)
    scaled = design * root[:, None]
    if np.linalg.matrix_rank(scaled) < design.shape[1]:
        raise SingularFit(f"local design of {len(dy)} pixels is rank deficient")
    return np.linalg.pinv(scaled)[0] * root


def _axis_classes(n, reach):
    """Group positions 0..n-1 by how far they may look back and ahead (capped at ``reach``)."""
    index = np.arange(n)
    back = np.minimum(index, reach)
    ahead = np.minimum(n - 1 - index, reach)
    keys = np.column_stack([back, ahead])
    classes, inverse = np.unique(keys, axis=0, return_inverse=True)
    return [(int(b), int(a), index[inverse.ravel() == c]) for c, (b, a) in enumerate(classes)]


def _window_reach(rows, cols, k):
    """Smallest radius such that every pixel has at least k pixels within it."""
    reach = max(1, math.ceil(math.sqrt(4.0 * k / math.pi)) + 1)
    limit = max(rows, cols)
    while reach < limit:
        # the corner pixel is the worst case
        dy = np.arange(min(rows, reach + 1))
        dx = np.arange(min(cols, reach + 1))
        inside = (dy[:, None] ** 2 + dx[None, :] ** 2) <= reach * reach
        if inside.sum() >= k:
            return reach
        reach *= 2
    return limit


def loess_smooth(field, spec=None):
    """Replace every pixel by a tricube-weighted local quadratic fit over its k nearest pixels.

    Distances are Euclidean in pixel index space. Where the local design is
    rank deficient the pixel falls back to the weighted local mean.
    """
    spec = spec or LoessSpec.from_settings()
    rows, cols = field.shape
    n_pixels = rows * cols
    if n_pixels < 6:
        raise TooFewPixels(f"loess needs at least 6 pixels, got {n_pixels}")
    k = spec.window_size(n_pixels)
    reach = _window_reach(rows, cols, k)

    values = field.values
    smoothed = np.empty_like(values)
    singular = 0
    row_classes = _axis_classes(rows, reach)
    col_classes = _axis_classes(cols, reach)
    for up, down, row_index in row_classes:
        for left, right, col_index in col_classes:
            dy, dx = np.meshgrid(np.arange(-up, down + 1), np.arange(-left, right + 1), indexing="ij")
            dy, dx = dy.ravel().astype(float), dx.ravel().astype(float)
            squared = dy * dy + dx * dx
            kth = math.sqrt(np.partition(squared, k - 1)[k - 1])
            weights = _tricube(np.sqrt(squared) / kth) if kth > 0 else (squared == 0).astype(float)
            keep = weights > 0
            dy, dx, weights = dy[keep], dx[keep], weights[keep]
            try:
                hat = _hat_row(dy, dx, weights)
            except SingularFit:
                singular += len(row_index) * len(col_index)
                hat = weights / weights.sum()
            block = np.zeros((len(row_index), len(col_index)))
            for weight, oy, ox in zip(hat, dy.astype(int), dx.astype(int)):
                block += weight * values[np.ix_(row_index + oy, col_index + ox)]
            smoothed[np.ix_(row_index, col_index)] = block
    if singular:
        logger.warning("loess: %d of %d pixels fell back to the local mean", singular, n_pixels)
    logger.debug("loess: %dx%d field, window of %d pixels", rows, cols, k)
    return field.with_values(smoothed)
