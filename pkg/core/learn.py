"""
k-nearest-neighbour classification of summary curves, leave-one-out model
selection, pairwise distance matrices and classical multidimensional scaling.
"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .domain import SummaryKind, check_matched
from .exceptions import BadDim, BadK, EmptyCandidates, EmptyInput
from .inference import _distance, resolve_metric
from .parallel import parallel_map
from .summaries import SummarySpec, summarize

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LabeledCurveSet:
    curves: tuple
    labels: tuple

    def __post_init__(self):
        curves = tuple(self.curves)
        labels = tuple(int(label) for label in self.labels)
        if len(curves) != len(labels):
            raise ValueError(f"{len(curves)} curves but {len(labels)} labels")
        if not curves:
            raise EmptyInput("a labelled set needs at least one curve")
        if any(label < 0 for label in labels):
            raise ValueError("labels must be non-negative integers")
        check_matched(curves)
        object.__setattr__(self, "curves", curves)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.curves)

    @property
    def classes(self):
        return sorted(set(self.labels))


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"distance matrix must be square, got shape {values.shape}")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("distances must be finite and non-negative")
        if not np.allclose(values, values.T, rtol=0.0, atol=1e-12):
            raise ValueError("distance matrix is not symmetric")
        if np.any(np.diag(values) != 0):
            raise ValueError("distance matrix must have a zero diagonal")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.shape[0]


def distance_matrix(curves, metric, threads=None):
    """All pairwise distances, each unordered pair computed once."""
    curves = list(curves)
    if not curves:
        raise EmptyInput("no curves given")
    check_matched(curves)
    metric = resolve_metric(metric, curves)
    weights = curves[0].grid.trapezoid_weights
    n = len(curves)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def entry(pair):
        i, j = pair
        return _distance(curves[i].orders, curves[j].orders, metric, weights)

    values = np.zeros((n, n))
    for (i, j), d in zip(pairs, parallel_map(entry, pairs, threads)):
        values[i, j] = values[j, i] = d
    return DistanceMatrix(values)


# kNN

def _vote(labels, binary):
    """Binary training labels: 1 iff more than half the neighbours say 1.

    Otherwise plurality, with the lowest label winning ties.
    """
    labels = np.asarray(labels, dtype=int)
    if binary:
        return int(labels.sum() > len(labels) / 2.0)
    return int(np.bincount(labels).argmax())


def _nearest(distances, k):
    # stable: equal distances keep training order
    return np.argsort(distances, kind="stable")[:k]


def knn_classify(train, query, k, metric):
    n = len(train)
    if not 1 <= k <= n:
        raise BadK(f"k must lie in 1..{n}, got {k}")
    check_matched([train.curves[0], query])
    metric = resolve_metric(metric, train.curves)
    weights = query.grid.trapezoid_weights
    distances = np.array([_distance(query.orders, c.orders, metric, weights) for c in train.curves])
    labels = np.asarray(train.labels)
    return _vote(labels[_nearest(distances, k)], binary=bool(np.all(labels <= 1)))


def _loocv_errors(dm, labels, k_candidates):
    n = len(labels)
    labels = np.asarray(labels)
    binary = bool(np.all(labels <= 1))
    errors = {}
    for k in k_candidates:
        wrong = 0
        for i in range(n):
            others = np.delete(np.arange(n), i)
            neighbours = others[_nearest(dm[i, others], k)]
            wrong += int(_vote(labels[neighbours], binary) != labels[i])
        errors[k] = wrong
    return errors


def loocv_select_k(train, k_candidates, metric, threads=None, dm=None):
    """Leave-one-out error for every candidate k; the smallest k wins ties."""
    k_candidates = sorted(set(int(k) for k in k_candidates))
    if not k_candidates:
        raise EmptyCandidates("no k candidates given")
    n = len(train)
    bad = [k for k in k_candidates if not 1 <= k <= n - 1]
    if bad:
        raise BadK(f"k candidates must lie in 1..{n - 1}, got {bad}")
    if dm is None:
        dm = distance_matrix(train.curves, metric, threads)
    errors = _loocv_errors(dm.values, train.labels, k_candidates)
    best = min(k_candidates, key=lambda k: (errors[k], k))
    logger.debug("loocv: errors %s, chose k=%d", errors, best)
    return best, errors[best] / n


def loocv_select_bandwidth(diagrams, labels, bandwidths, k_candidates, metric, grid, spec=None, threads=None):
    """Choose the generalized-landscape bandwidth and k together by leave-one-out error.

    Returns (h, k, error_rate, table) where ``table`` lists every bandwidth
    with its best k and error. Ties go to the smaller bandwidth.
    """
    bandwidths = sorted(set(float(h) for h in bandwidths))
    if not bandwidths:
        raise EmptyCandidates("no bandwidth candidates given")
    spec = spec or SummarySpec(kind=SummaryKind.GENERALIZED_LANDSCAPE)
    rows = []
    for h in bandwidths:
        candidate = SummarySpec(SummaryKind.GENERALIZED_LANDSCAPE, spec.dim, spec.k_max, spec.kernel, h)
        curves = parallel_map(lambda d: summarize(d, candidate, grid), diagrams, threads)
        k, error = loocv_select_k(LabeledCurveSet(curves, labels), k_candidates, metric, threads)
        rows.append({"h": h, "k": k, "error": error})
    table = pd.DataFrame(rows, columns=["h", "k", "error"])
    best = min(rows, key=lambda row: (row["error"], row["h"]))
    return best["h"], best["k"], best["error"], table


def confusion_matrix(actual, predicted, classes=None):
    """Counts with the actual class along rows and the predicted class along columns."""
    actual = [int(a) for a in actual]
    predicted = [int(p) for p in predicted]
    if len(actual) != len(predicted):
        raise ValueError(f"{len(actual)} actual labels but {len(predicted)} predictions")
    classes = sorted(set(actual) | set(predicted)) if classes is None else list(classes)
    table = pd.DataFrame(0, index=classes, columns=classes, dtype=int)
    for a, p in zip(actual, predicted):
        table.loc[a, p] += 1
    table.index.name = "actual"
    table.columns.name = "predicted"
    return table


# MDS

def classical_mds(dm, out_dim):
    """Embed a distance matrix: eigenvectors of -1/2 J D^2 J scaled by sqrt(eigenvalue).

    Negative eigenvalues are clamped to zero. Each axis is signed so that its
    largest-magnitude coordinate is positive.
    """
    values = dm.values if isinstance(dm, DistanceMatrix) else np.asarray(dm, dtype=float)
    n = values.shape[0]
    if not 1 <= out_dim <= n:
        raise BadDim(f"out_dim must lie in 1..{n}, got {out_dim}")
    centring = np.eye(n) - np.full((n, n), 1.0 / n)
    gram = -0.5 * centring @ (values ** 2) @ centring
    gram = (gram + gram.T) / 2.0
    eigenvalues, eigenvectors = np.linalg.eigh(gram)
    order = np.lexsort((np.arange(n), -eigenvalues))[:out_dim]
    scale = np.sqrt(np.maximum(eigenvalues[order], 0.0))
    coords = eigenvectors[:, order] * scale
    for axis in range(out_dim):
        pivot = int(np.argmax(np.abs(coords[:, axis])))
        if coords[pivot, axis] < 0:
            coords[:, axis] = -coords[:, axis]
    return coords
