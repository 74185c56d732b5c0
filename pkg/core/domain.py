"""
Domain types shared by every module: persistence diagrams, scalar fields,
point clouds, sampling grids, functional summaries, kernels and metrics.

All types are immutable after construction. Arrays held by them are marked
read-only, so instances can be shared freely between threads.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np
from django.db import models

from .exceptions import BadP, EmptyField, GridMismatch, RawPairInverted


def _frozen_array(values, ndim=None):
    array = np.array(values, dtype=float)
    if ndim is not None and array.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {array.shape}")
    array.setflags(write=False)
    return array


class Orientation(models.TextChoices):
    SUBLEVEL_CANONICAL = "sublevel_canonical", "Sublevel, stored as is"
    SUPERLEVEL_NEGATED = "superlevel_negated", "Superlevel, stored negated"


class SummaryKind(models.TextChoices):
    LANDSCAPE = "landscape", "Persistence landscape"
    GENERALIZED_LANDSCAPE = "glandscape", "Generalized landscape"
    SILHOUETTE = "silhouette", "Silhouette"
    APF = "apf", "Accumulated persistence function"


class KernelFamily(models.TextChoices):
    TRIANGLE = "triangle", "Triangle"
    EPANECHNIKOV = "epanechnikov", "Epanechnikov"
    TRICUBE = "tricube", "Tricube"
    TRUNCATED_GAUSSIAN = "gaussian", "Truncated Gaussian"


class MetricWeight(models.TextChoices):
    UNIT = "unit", "Unit weight"
    SIGMA = "sigma", "Pointwise standard deviation"


# Diagrams

@dataclass(frozen=True)
class DiagramPoint:
    dim: int
    birth: float
    death: float
    essential: bool = False

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 0:
            raise ValueError(f"homology dimension must be a non-negative integer, got {self.dim}")
        if not (math.isfinite(self.birth) and math.isfinite(self.death)):
            raise ValueError(f"birth and death must be finite, got ({self.birth}, {self.death})")
        if self.death < self.birth:
            raise RawPairInverted(f"death {self.death} precedes birth {self.birth}")

    @property
    def lifetime(self):
        return self.death - self.birth


class RawPair(NamedTuple):
    """A persistence pair in raw superlevel coordinates (birth level >= death level)."""

    dim: int
    birth_level: float
    death_level: float
    essential: bool = False


@dataclass(frozen=True)
class PersistenceDiagram:
    points: tuple = ()
    orientation: str = Orientation.SUBLEVEL_CANONICAL
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @cached_property
    def _columns(self):
        if not self.points:
            empty = np.empty(0)
            return np.empty(0, dtype=int), empty, empty
        dims = np.fromiter((p.dim for p in self.points), dtype=int, count=len(self.points))
        births = np.fromiter((p.birth for p in self.points), dtype=float, count=len(self.points))
        deaths = np.fromiter((p.death for p in self.points), dtype=float, count=len(self.points))
        return dims, births, deaths

    def _mask(self, dim):
        dims = self._columns[0]
        if dim is None:
            return np.ones(len(dims), dtype=bool)
        return dims == dim

    def births(self, dim=None):
        return self._columns[1][self._mask(dim)]

    def deaths(self, dim=None):
        return self._columns[2][self._mask(dim)]

    def lifetimes(self, dim=None):
        return self.deaths(dim) - self.births(dim)

    def max_half_lifetime(self, dim=None):
        lifetimes = self.lifetimes(dim)
        return float(lifetimes.max() / 2.0) if len(lifetimes) else 0.0

    def total_persistence(self, dim=None):
        return float(self.lifetimes(dim).sum())

    def raw_levels(self):
        """The pairs back in the coordinates they were computed in."""
        if self.orientation == Orientation.SUPERLEVEL_NEGATED:
            return [RawPair(p.dim, 0.0 - p.birth, 0.0 - p.death, p.essential) for p in self.points]
        return [RawPair(p.dim, p.birth, p.death, p.essential) for p in self.points]


def canonicalize_superlevel(raw_pairs, source=""):
    """Map superlevel pairs (birth level >= death level) to canonical coordinates.

    Levels are negated so that every stored point has death >= birth.
    """
    points = []
    for pair in raw_pairs:
        pair = RawPair(*pair)
        if pair.birth_level < pair.death_level:
            raise RawPairInverted(
                f"superlevel pair born at {pair.birth_level} cannot die later at {pair.death_level}"
            )
        # 0.0 - x keeps a zero level at +0.0
        points.append(DiagramPoint(
            dim=int(pair.dim),
            birth=0.0 - float(pair.birth_level),
            death=0.0 - float(pair.death_level),
            essential=bool(pair.essential),
        ))
    return PersistenceDiagram(tuple(points), Orientation.SUPERLEVEL_NEGATED, source)


def filter_by_dim(diagram, dim):
    if dim < 0:
        raise ValueError(f"dim must be >= 0, got {dim}")
    return PersistenceDiagram(
        tuple(p for p in diagram.points if p.dim == dim),
        diagram.orientation,
        diagram.source,
    )


# Fields and clouds

@dataclass(frozen=True, eq=False)
class ScalarField:
    values: np.ndarray
    extent: tuple = None
    source: str = ""

    def __post_init__(self):
        values = _frozen_array(self.values, ndim=2)
        if values.size == 0:
            raise EmptyField(f"field has shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", values)
        extent = self.extent
        if extent is None:
            extent = (0.0, 0.0, float(values.shape[1]), float(values.shape[0]))
        extent = tuple(float(v) for v in extent)
        if len(extent) != 4 or not (extent[2] > extent[0] and extent[3] > extent[1]):
            raise ValueError(f"extent must be (x0, y0, x1, y1) with x1 > x0 and y1 > y0, got {extent}")
        object.__setattr__(self, "extent", extent)

    @classmethod
    def from_flat(cls, rows, cols, values, extent=None, source=""):
        values = np.asarray(values, dtype=float)
        if rows * cols == 0:
            raise EmptyField(f"field has {rows}x{cols} pixels")
        if values.size != rows * cols:
            raise ValueError(f"expected {rows * cols} values, got {values.size}")
        return cls(values.reshape(rows, cols), extent, source)

    @property
    def rows(self):
        return self.values.shape[0]

    @property
    def cols(self):
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    def with_values(self, values, source=None):
        return ScalarField(values, self.extent, self.source if source is None else source)


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim == 1 and points.size == 0:
            points = points.reshape(0, 2)
        if points.ndim != 2 or points.shape[1] < 1:
            raise ValueError(f"point cloud must be an n x d array, got shape {points.shape}")
        if not np.all(np.isfinite(points)):
            raise ValueError("point coordinates must be finite")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]


# Grids and summaries

@dataclass(frozen=True)
class Grid1D:
    """Uniform grid t_i = t0 + i * (t1 - t0) / (m - 1), i = 0..m-1."""

    t0: float
    t1: float
    m: int

    def __post_init__(self):
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "t1", float(self.t1))
        object.__setattr__(self, "m", int(self.m))
        if not (math.isfinite(self.t0) and math.isfinite(self.t1)) or self.t0 >= self.t1:
            raise ValueError(f"grid needs finite t0 < t1, got [{self.t0}, {self.t1}]")
        if self.m < 2:
            raise ValueError(f"grid needs at least 2 samples, got {self.m}")

    @property
    def step(self):
        return (self.t1 - self.t0) / (self.m - 1)

    @cached_property
    def samples(self):
        samples = self.t0 + np.arange(self.m) * self.step
        samples[-1] = self.t1
        samples.setflags(write=False)
        return samples

    @cached_property
    def trapezoid_weights(self):
        weights = np.full(self.m, self.step)
        weights[0] = weights[-1] = self.step / 2.0
        weights.setflags(write=False)
        return weights

    @classmethod
    def covering(cls, diagrams, dim=None, m=512, padding=0.05):
        """[min birth, max death] over all diagrams, padded on both sides."""
        if isinstance(diagrams, PersistenceDiagram):
            diagrams = [diagrams]
        births = [d.births(dim) for d in diagrams]
        deaths = [d.deaths(dim) for d in diagrams]
        births = np.concatenate(births) if births else np.empty(0)
        deaths = np.concatenate(deaths) if deaths else np.empty(0)
        if len(births) == 0:
            return cls(0.0, 1.0, m)
        lo, hi = float(births.min()), float(deaths.max())
        span = hi - lo
        if span <= 0:
            return cls(lo - 0.5, hi + 0.5, m)
        return cls(lo - padding * span, hi + padding * span, m)


@dataclass(frozen=True, eq=False)
class SummaryCurve:
    """A functional summary sampled on ``grid``; row k-1 holds order k."""

    grid: Grid1D
    orders: np.ndarray
    kind: str
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        orders = np.array(self.orders, dtype=float)
        if orders.ndim == 1:
            orders = orders.reshape(1, -1)
        if orders.ndim != 2 or orders.shape[1] != self.grid.m:
            raise ValueError(f"orders of shape {orders.shape} do not fit a grid of {self.grid.m} samples")
        if not np.all(np.isfinite(orders)):
            raise ValueError("summary values must be finite")
        orders.setflags(write=False)
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "params", dict(self.params))

    @property
    def k_max(self):
        return self.orders.shape[0]

    def order(self, k):
        """The single-order curve of order ``k`` (1-based)."""
        if not 1 <= k <= self.k_max:
            raise ValueError(f"order {k} outside 1..{self.k_max}")
        return self.with_orders(self.orders[k - 1:k])

    def leading(self, j):
        """Orders 1..j."""
        if not 1 <= j <= self.k_max:
            raise ValueError(f"order count {j} outside 1..{self.k_max}")
        return self.with_orders(self.orders[:j])

    def with_orders(self, orders):
        return SummaryCurve(self.grid, orders, self.kind, self.params)

    def check_compatible(self, other):
        if self.grid != other.grid:
            raise GridMismatch(f"grids differ: {self.grid} vs {other.grid}")
        if self.k_max != other.k_max:
            raise GridMismatch(f"order counts differ: {self.k_max} vs {other.k_max}")


def check_matched(curves, same_kind=False):
    """Raise GridMismatch unless every curve shares the first one's grid and order count."""
    curves = list(curves)
    for curve in curves[1:]:
        curves[0].check_compatible(curve)
        if same_kind and curve.kind != curves[0].kind:
            raise GridMismatch(f"summary kinds differ: {curves[0].kind} vs {curve.kind}")
    return curves


# Kernels

# integral of K(u) * u over [0, 1]; normalises the radial 2D density profile
_RADIAL_MOMENT = {
    KernelFamily.TRIANGLE: 1.0 / 6.0,
    KernelFamily.EPANECHNIKOV: 1.0 / 4.0,
    KernelFamily.TRICUBE: 81.0 / 440.0,
    KernelFamily.TRUNCATED_GAUSSIAN: (1.0 - math.exp(-8.0)) / 16.0,
}


@dataclass(frozen=True)
class Kernel:
    """Symmetric kernel K on [-1, 1] with K(0) = 1 as its maximum.

    The truncated Gaussian is exp(-8 u^2), a Gaussian of scale 1/4 cut at
    four standard deviations.
    """

    family: str = KernelFamily.TRUNCATED_GAUSSIAN

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))

    def __call__(self, u):
        u = np.abs(np.asarray(u, dtype=float))
        inside = u <= 1.0
        if self.family == KernelFamily.TRIANGLE:
            values = 1.0 - u
        elif self.family == KernelFamily.EPANECHNIKOV:
            values = 1.0 - u * u
        elif self.family == KernelFamily.TRICUBE:
            values = (1.0 - u ** 3) ** 3
        else:
            values = np.exp(-8.0 * u * u)
        return np.where(inside, values, 0.0)

    @property
    def kde_radius(self):
        """Support radius in bandwidth units when used as a density kernel."""
        return 4.0 if self.family == KernelFamily.TRUNCATED_GAUSSIAN else 1.0

    def density_profile(self, s):
        """Radial profile on s = |x| / h integrating to one over the plane.

        For the truncated Gaussian h is the standard deviation.
        """
        radius = self.kde_radius
        norm = 2.0 * math.pi * radius * radius * _RADIAL_MOMENT[self.family]
        return self(np.asarray(s, dtype=float) / radius) / norm


# Metrics

@dataclass(frozen=True)
class MetricSpec:
    """d_{p,w}(f, g) = (integral (|f - g| / w)^p dt)^(1/p); p = inf is the supremum."""

    p: float = 2.0
    weight: str = MetricWeight.UNIT
    sigma: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        p = float(self.p)
        if not p > 0:
            raise BadP(f"metric exponent must be positive, got {self.p}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "weight", MetricWeight(self.weight))
        if self.sigma is not None:
            object.__setattr__(self, "sigma", _frozen_array(self.sigma))

    @property
    def is_sup(self):
        return math.isinf(self.p)

    def with_sigma(self, sigma):
        return MetricSpec(self.p, self.weight, sigma)

    def describe(self):
        p = "inf" if self.is_sup else f"{self.p:g}"
        return {"p": p, "weight": str(self.weight)}


def parse_metric_p(value):
    """Accept 'inf'/'sup' as well as positive numbers."""
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "sup"):
        return math.inf
    return float(value)
