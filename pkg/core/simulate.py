"""
Data generators: STIX pick-up-sticks images and a ring-versus-uniform gland
point-cloud stand-in, plus the STIX two-sample power experiment.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .domain import MetricSpec, PointCloud, ScalarField
from .exceptions import BadConfig
from .homology import superlevel_diagram
from .inference import permutation_test
from .parallel import parallel_map
from .rng import derive_seed, stream
from .smoothing import LoessSpec, loess_smooth
from .summaries import SummarySpec, default_grid, summarize_or_zero

logger = logging.getLogger(__name__)

# stick widths are drawn in units of a 512-pixel reference raster
REFERENCE_ROWS = 512

# irregularity of the four gland grades, benign to malignant
GLAND_TYPES = {"A": 0.0, "B": 1.0 / 3.0, "C": 2.0 / 3.0, "D": 1.0}

# ring jitter is truncated here, so a ring fits the box whenever radius + JITTER_CLIP * jitter does
JITTER_CLIP = 4.0


def _raise_collected(errors):
    if errors:
        raise BadConfig(errors)


@dataclass(frozen=True)
class StixConfig:
    n_sticks: int = 50
    thickness_df: float = 5.0
    rows: int = 128
    cols: int = 128
    foreground: float = 1.0
    background: float = 0.0
    antialias: bool = False
    seed: int = 0

    def __post_init__(self):
        errors = {}
        if self.n_sticks < 0:
            errors["n_sticks"] = [f"must be >= 0, got {self.n_sticks}"]
        if not (math.isfinite(self.thickness_df) and self.thickness_df > 0):
            errors["thickness_df"] = [f"must be positive, got {self.thickness_df}"]
        for name in ("rows", "cols"):
            if getattr(self, name) < 1:
                errors[name] = [f"must be >= 1, got {getattr(self, name)}"]
        if not (math.isfinite(self.foreground) and math.isfinite(self.background)):
            errors["foreground"] = ["intensities must be finite"]
        if self.seed is None or self.seed < 0:
            errors["seed"] = [f"must be a non-negative integer, got {self.seed}"]
        _raise_collected(errors)

    @property
    def pixels_per_width_unit(self):
        return self.rows / REFERENCE_ROWS


def _segment_distance(px, py, ax, ay, bx, by):
    """Distance from every (px, py) to the segment a-b."""
    dx, dy = bx - ax, by - ay
    length2 = dx * dx + dy * dy
    if length2 == 0:
        return np.hypot(px - ax, py - ay)
    t = np.clip(((px - ax) * dx + (py - ay) * dy) / length2, 0.0, 1.0)
    return np.hypot(px - (ax + t * dx), py - (ay + t * dy))


def draw_sticks(config):
    """(n_sticks, 5) array of x1, y1, x2, y2 in the unit box and the width in pixels.

    Per stick: four uniforms for the endpoints, then one chi-square width.
    """
    rng = stream(config.seed)
    sticks = np.empty((config.n_sticks, 5))
    for s in range(config.n_sticks):
        sticks[s, :4] = rng.random(4)
        sticks[s, 4] = rng.chisquare(config.thickness_df) * config.pixels_per_width_unit
    return sticks


def stix(config):
    """Rasterize sticks as capsules; overlapping sticks compose by max.

    Pixel (i, j) has its centre at x = j + 0.5, y = i + 0.5 with endpoints
    scaled to x * cols, y * rows. Hard mode paints pixels within half a width
    of the segment; anti-aliased mode paints the covered fraction.
    """
    rows, cols = config.rows, config.cols
    coverage = np.zeros((rows, cols))
    for x1, y1, x2, y2, width in draw_sticks(config):
        ax, ay, bx, by = x1 * cols, y1 * rows, x2 * cols, y2 * rows
        half = width / 2.0
        # only pixels whose centre can lie within reach of the segment
        i0 = max(int(math.floor(min(ay, by) - half - 1)), 0)
        i1 = min(int(math.ceil(max(ay, by) + half + 1)), rows)
        j0 = max(int(math.floor(min(ax, bx) - half - 1)), 0)
        j1 = min(int(math.ceil(max(ax, bx) + half + 1)), cols)
        if i0 >= i1 or j0 >= j1:
            continue
        py, px = np.meshgrid(np.arange(i0, i1) + 0.5, np.arange(j0, j1) + 0.5, indexing="ij")
        distance = _segment_distance(px, py, ax, ay, bx, by)
        if config.antialias:
            painted = np.clip(half - distance + 0.5, 0.0, 1.0)
        else:
            painted = (distance <= half).astype(float)
        np.maximum(coverage[i0:i1, j0:j1], painted, out=coverage[i0:i1, j0:j1])
    values = config.background + (config.foreground - config.background) * coverage
    return ScalarField(values, source=f"stix(df={config.thickness_df:g}, seed={config.seed})")


@dataclass(frozen=True)
class GlandConfig:
    """Points on a jittered ring mixed with uniform points in the unit box.

    ``irregularity`` is the chance that a point is uniform rather than on the ring.
    """

    n_points: int = 300
    radius: float = 0.3
    irregularity: float = 0.0
    jitter: float = 0.02
    center: tuple = (0.5, 0.5)
    seed: int = 0

    def __post_init__(self):
        errors = {}
        if self.n_points < 1:
            errors["n_points"] = [f"must be >= 1, got {self.n_points}"]
        if not 0 <= self.irregularity <= 1:
            errors["irregularity"] = [f"must lie in [0, 1], got {self.irregularity}"]
        if not self.jitter >= 0:
            errors["jitter"] = [f"must be >= 0, got {self.jitter}"]
        cx, cy = self.center
        margin = min(cx, cy, 1.0 - cx, 1.0 - cy)
        if not 0 < self.radius or self.radius + JITTER_CLIP * self.jitter > margin:
            errors["radius"] = [
                f"ring of radius {self.radius} with jitter {self.jitter} does not fit the unit box around {self.center}"
            ]
        if self.seed is None or self.seed < 0:
            errors["seed"] = [f"must be a non-negative integer, got {self.seed}"]
        _raise_collected(errors)

    @classmethod
    def for_type(cls, gland_type, **options):
        try:
            irregularity = GLAND_TYPES[gland_type]
        except KeyError:
            raise BadConfig({"gland_type": [f"unknown type {gland_type!r}; choose from {', '.join(GLAND_TYPES)}"]})
        return cls(irregularity=irregularity, **options)


def gland(config):
    """Ring points take a Gaussian radial jitter clipped at JITTER_CLIP standard deviations."""
    rng = stream(config.seed)
    n = config.n_points
    uniform_mask = rng.random(n) < config.irregularity
    angle = rng.uniform(0.0, 2.0 * math.pi, n)
    radial = config.radius + config.jitter * np.clip(rng.standard_normal(n), -JITTER_CLIP, JITTER_CLIP)
    uniform = rng.random((n, 2))
    ring = np.column_stack([
        config.center[0] + radial * np.cos(angle),
        config.center[1] + radial * np.sin(angle),
    ])
    return PointCloud(np.where(uniform_mask[:, None], uniform, ring))


# STIX power experiment

def _image_diagram(config, loess, max_dim):
    return superlevel_diagram(loess_smooth(stix(config), loess), max_dim)


def stix_repetition(rep, null_df, alt_df, images_per_group, B, specs, seed, stix_options, loess, metric, grid_size):
    """One repetition: both groups of images, their summaries and one test per summary order."""
    max_dim = max(spec.dim for spec in specs)
    groups = []
    for group, df in enumerate((null_df, alt_df)):
        diagrams = [
            _image_diagram(
                StixConfig(thickness_df=df, seed=derive_seed(seed, rep, group, i), **stix_options), loess, max_dim
            )
            for i in range(images_per_group)
        ]
        groups.append(diagrams)

    row = {}
    column = 0
    for spec in specs:
        grid = default_grid(groups[0] + groups[1], dim=spec.dim, m=grid_size)
        curves = [[summarize_or_zero(d, spec, grid) for d in diagrams] for diagrams in groups]
        for k in range(1, spec.k_max + 1):
            result = permutation_test(
                [c.order(k) for c in curves[0]],
                [c.order(k) for c in curves[1]],
                metric,
                B=B,
                seed=derive_seed(seed, rep, 2, column),
                threads=1,
            )
            row[f"{spec.label}:order{k}"] = result.p_value
            column += 1
    logger.debug("stix repetition %d done", rep)
    return row


def stix_experiment(
    null_df,
    alt_df,
    images_per_group,
    reps,
    B,
    specs=None,
    seed=0,
    stix_options=None,
    loess=None,
    metric=None,
    grid_size=None,
    threads=None,
):
    """Table of permutation p-values, one row per repetition and one column per summary order."""
    errors = {}
    for name, value in (("images_per_group", images_per_group), ("reps", reps), ("B", B)):
        if value < 1:
            errors[name] = [f"must be >= 1, got {value}"]
    _raise_collected(errors)
    specs = list(specs or [SummarySpec(dim=1, k_max=3)])
    stix_options = dict(stix_options or {})
    loess = loess or LoessSpec.from_settings()
    metric = metric or MetricSpec(p=2.0)
    logger.info(
        "stix experiment: df %g vs %g, %d images per group, %d reps, B=%d, %d summaries",
        null_df, alt_df, images_per_group, reps, B, len(specs),
    )

    def run(rep):
        return stix_repetition(
            rep, null_df, alt_df, images_per_group, B, specs, seed, stix_options, loess, metric, grid_size
        )

    rows = parallel_map(run, range(reps), threads)
    table = pd.DataFrame(rows)
    table.index.name = "rep"
    return table