"""
Inference on samples of summary curves: pointwise mean and variance, the
weighted L_p / supremum metric, bootstrap confidence bands, prediction
bands and the permutation two-sample test.

Resampling replicate j always draws from ``rng.stream(seed, j)``, so results
do not depend on the number of threads.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from django.db import models

from .domain import MetricSpec, MetricWeight, SummaryCurve, check_matched
from .exceptions import DegenerateSigma, EmptyGroup, EmptyInput, TooFewCurves
from .parallel import parallel_map
from .rng import stream

logger = logging.getLogger(__name__)

# sigma values below this fraction of the largest one carry no weight
SIGMA_FLOOR = 1e-12


class WidthMode(models.TextChoices):
    FIXED = "fixed", "Fixed width"
    VARIABLE = "variable", "Variable width"


def order_statistic(values, level):
    """The ceil(level * n)-th smallest value: the least x with empirical CDF >= level."""
    ranked = np.sort(np.asarray(values, dtype=float))
    if len(ranked) == 0:
        raise EmptyInput("no values to take a quantile of")
    index = min(max(math.ceil(level * len(ranked) - 1e-9), 1), len(ranked))
    return float(ranked[index - 1])


def _stack(curves):
    curves = list(curves)
    if not curves:
        raise EmptyInput("no curves given")
    check_matched(curves, same_kind=True)
    return curves, np.stack([c.orders for c in curves])


def mean_curve(curves):
    curves, stack = _stack(curves)
    return curves[0].with_orders(stack.mean(axis=0))


def variance_curve(curves):
    """Pointwise variance with divisor n."""
    curves, stack = _stack(curves)
    return curves[0].with_orders(stack.var(axis=0))


def sigma_curve(curves):
    return variance_curve(curves).orders ** 0.5


# Metric

def _sigma_mask(sigma):
    top = float(np.max(sigma)) if sigma.size else 0.0
    mask = sigma >= SIGMA_FLOOR * top
    if not top > 0 or not mask.any():
        raise DegenerateSigma("pointwise standard deviation vanishes everywhere")
    return mask


def _scaled_gaps(diff, metric):
    """|f - g| / w with excluded points set to zero."""
    if metric.weight != MetricWeight.SIGMA:
        return diff
    if metric.sigma is None:
        raise ValueError("sigma-weighted metric used without a sigma curve")
    sigma = np.broadcast_to(metric.sigma, diff.shape[-2:])
    mask = _sigma_mask(sigma)
    return np.where(mask, diff / np.where(mask, sigma, 1.0), 0.0)


def _distance(f_orders, g_orders, metric, weights):
    gaps = _scaled_gaps(np.abs(f_orders - g_orders), metric)
    if metric.is_sup:
        return float(gaps.max())
    return float(np.sum(weights * gaps ** metric.p) ** (1.0 / metric.p))


def metric_distance(f, g, metric):
    """d(f, g) over all orders at once; orders share the grid's trapezoid weights."""
    f.check_compatible(g)
    return _distance(f.orders, g.orders, metric, f.grid.trapezoid_weights)


def resolve_metric(metric, curves):
    """Attach the pointwise standard deviation of ``curves`` to a sigma-weighted metric."""
    if metric.weight == MetricWeight.SIGMA and metric.sigma is None:
        return metric.with_sigma(sigma_curve(curves))
    return metric


# Bootstrap confidence bands

@dataclass(frozen=True, eq=False)
class BandResult:
    center: SummaryCurve
    lower: SummaryCurve
    upper: SummaryCurve
    alpha: float
    width_mode: str
    half_width: float
    B: int
    seed: int
    sigma: Optional[SummaryCurve] = None
    replicates: np.ndarray = field(default=None, repr=False)

    def describe(self):
        return {
            "alpha": self.alpha,
            "width_mode": str(self.width_mode),
            "half_width": self.half_width,
            "B": self.B,
            "seed": self.seed,
        }


def bootstrap_band(curves, alpha, B, width_mode=WidthMode.FIXED, seed=0, threads=None):
    """Uniform band for the mean curve from B resampled means.

    Fixed mode uses the (1 - alpha) quantile of sup |F* - F|; variable mode
    studentizes by the pointwise standard deviation before taking the sup.
    """
    curves, stack = _stack(curves)
    n = len(curves)
    if n < 2:
        raise TooFewCurves(f"a bootstrap band needs at least 2 curves, got {n}")
    if B < 1:
        raise ValueError(f"B must be >= 1, got {B}")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    width_mode = WidthMode(width_mode)

    center = stack.mean(axis=0)
    sigma = stack.var(axis=0) ** 0.5
    if width_mode == WidthMode.VARIABLE:
        mask = _sigma_mask(sigma)
        scale = np.where(mask, sigma, 1.0)
    else:
        mask, scale = np.ones_like(center, dtype=bool), np.ones_like(center)

    def replicate(j):
        rng = stream(seed, j)
        resampled = stack[rng.integers(0, n, size=n)].mean(axis=0)
        return float(np.max(np.where(mask, np.abs(resampled - center) / scale, 0.0)))

    stats = np.array(parallel_map(replicate, range(B), threads))
    half_width = order_statistic(stats, 1.0 - alpha)
    spread = half_width * (sigma if width_mode == WidthMode.VARIABLE else np.ones_like(center))
    logger.info("bootstrap band: n=%d B=%d %s half width %g", n, B, width_mode, half_width)

    first = curves[0]
    return BandResult(
        center=first.with_orders(center),
        lower=first.with_orders(center - spread),
        upper=first.with_orders(center + spread),
        alpha=alpha,
        width_mode=width_mode,
        half_width=half_width,
        B=B,
        seed=seed,
        sigma=first.with_orders(sigma),
        replicates=stats,
    )


# Prediction bands

@dataclass(frozen=True, eq=False)
class Prediction:
    center: SummaryCurve
    q_hat: float
    gamma: float
    metric: MetricSpec
    residuals: np.ndarray = field(default=None, repr=False)
    lower: Optional[SummaryCurve] = None
    upper: Optional[SummaryCurve] = None

    def residual(self, curve):
        return metric_distance(curve, self.center, self.metric)

    def contains(self, curve):
        return self.residual(curve) <= self.q_hat

    def describe(self):
        return {"gamma": self.gamma, "q_hat": self.q_hat, "metric": self.metric.describe()}


def prediction_band(curves, gamma, metric, seed=None):
    """Prediction set {F : d(F, mean) <= q}, q the gamma order statistic of the residuals.

    Under a supremum metric the set is also the envelope mean +- q * w. With
    a sigma weight, grid points whose sigma falls below SIGMA_FLOOR carry no
    constraint and their envelope values are NaN.
    ``seed`` is accepted for provenance only; the construction draws nothing.
    """
    curves, stack = _stack(curves)
    n = len(curves)
    if n < 2:
        raise TooFewCurves(f"a prediction band needs at least 2 curves, got {n}")
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    metric = resolve_metric(metric, curves)
    center = curves[0].with_orders(stack.mean(axis=0))
    weights = center.grid.trapezoid_weights
    residuals = np.array([_distance(c.orders, center.orders, metric, weights) for c in curves])
    q_hat = order_statistic(residuals, gamma)

    lower = upper = None
    if metric.is_sup:
        if metric.weight == MetricWeight.SIGMA:
            sigma = np.broadcast_to(metric.sigma, center.orders.shape)
            spread = np.where(_sigma_mask(sigma), q_hat * sigma, np.nan)
        else:
            spread = np.full(center.orders.shape, q_hat)
        lower = center.with_orders(center.orders - spread)
        upper = center.with_orders(center.orders + spread)
    logger.info("prediction band: n=%d gamma=%g q_hat=%g", n, gamma, q_hat)
    return Prediction(center, q_hat, gamma, metric, residuals, lower, upper)


# Permutation test

@dataclass(frozen=True, eq=False)
class TestResult:
    statistic: float
    p_value: float
    B: int
    metric: MetricSpec
    seed: Optional[int]
    n: int
    m: int
    exhaustive: bool = False
    add_one: bool = False
    replicates: np.ndarray = field(default=None, repr=False)

    __test__ = False  # not a pytest test class

    def describe(self):
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "B": self.B,
            "seed": self.seed,
            "n": self.n,
            "m": self.m,
            "exhaustive": self.exhaustive,
            "add_one": self.add_one,
            "metric": self.metric.describe(),
        }


def _canonical_order(stack):
    """Sort curves by content so relabelings do not depend on which group came first."""
    flat = stack.reshape(len(stack), -1)
    return np.lexsort(flat.T[::-1])


def permutation_test(group_a, group_b, metric, B=1000, seed=0, exhaustive=False, add_one=False, threads=None):
    """T = d(mean A, mean B) against B random relabelings of the pooled sample.

    p = #{T* >= T} / B, or (1 + #) / (B + 1) with ``add_one``. ``exhaustive``
    replaces the random relabelings by all C(n + m, n) splits.
    """
    group_a, group_b = list(group_a), list(group_b)
    if not group_a or not group_b:
        raise EmptyGroup(f"both groups need curves, got sizes {len(group_a)} and {len(group_b)}")
    pooled, stack = _stack(group_a + group_b)
    n, m = len(group_a), len(group_b)
    metric = resolve_metric(metric, pooled)
    weights = pooled[0].grid.trapezoid_weights

    order = _canonical_order(stack)
    stack = stack[order]
    slot = np.empty(n + m, dtype=int)
    slot[order] = np.arange(n + m)

    def split_statistic(first):
        first = np.sort(np.asarray(first))
        second = np.setdiff1d(np.arange(n + m), first)
        return _distance(stack[first].mean(axis=0), stack[second].mean(axis=0), metric, weights)

    statistic = split_statistic(slot[:n])

    if exhaustive:
        splits = [np.array(c) for c in itertools.combinations(range(n + m), n)]
        stats = np.array(parallel_map(split_statistic, splits, threads))
        seed_used = None
    else:
        if B < 1:
            raise ValueError(f"B must be >= 1, got {B}")

        def replicate(j):
            return split_statistic(stream(seed, j).permutation(n + m)[:n])

        stats = np.array(parallel_map(replicate, range(B), threads))
        seed_used = seed
    count = int(np.sum(stats >= statistic))
    total = len(stats)
    p_value = (1 + count) / (total + 1) if add_one else count / total
    logger.info("permutation test: n=%d m=%d T=%g p=%g over %d relabelings", n, m, statistic, p_value, total)
    return TestResult(statistic, p_value, total, metric, seed_used, n, m, exhaustive, add_one, stats)
