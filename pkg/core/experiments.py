"""
Batch experiments driven by flat key=value config files: the STIX power
study, the gland classification study and the fibrin tile comparison.

Config files are validated with Django forms so that every problem is
reported at once.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
from django import forms

from .domain import MetricSpec, MetricWeight, SummaryKind, parse_metric_p
from .exceptions import BadConfig
from .homology import superlevel_diagram, tile_field
from .inference import permutation_test
from .learn import (
    LabeledCurveSet,
    classical_mds,
    confusion_matrix,
    distance_matrix,
    knn_classify,
    loocv_select_bandwidth,
    loocv_select_k,
)
from .parallel import parallel_map
from .rng import derive_seed
from .simulate import GLAND_TYPES, GlandConfig, gland, stix_experiment
from .smoothing import KdeSpec, LoessSpec, kde, loess_smooth
from .summaries import SummarySpec, default_grid, summarize_or_zero

logger = logging.getLogger(__name__)


# Config validation

def _number_list(text, cast=float):
    return [cast(part) for part in str(text).replace(";", ",").split(",") if part.strip()]


class ExperimentForm(forms.Form):
    """Keys shared by every experiment."""

    experiment = forms.ChoiceField(choices=[("stix", "stix"), ("gland", "gland"), ("fibrin", "fibrin")])
    seed = forms.IntegerField(min_value=0)
    metric_p = forms.CharField(required=False, initial="2")
    metric_weight = forms.ChoiceField(choices=MetricWeight.choices, required=False, initial=MetricWeight.UNIT)
    dim = forms.IntegerField(min_value=0, max_value=1, required=False, initial=1)
    k_max = forms.IntegerField(min_value=1, required=False, initial=1)

    def clean_metric_p(self):
        value = self.cleaned_data.get("metric_p") or self.fields["metric_p"].initial
        try:
            p = parse_metric_p(value)
        except ValueError:
            raise forms.ValidationError(f"{value!r} is not a number or 'inf'")
        if not p > 0:
            raise forms.ValidationError("must be positive")
        return p

    def resolved(self):
        """Cleaned values with initial values standing in for omitted optional keys."""
        values = {}
        for name, form_field in self.fields.items():
            value = self.cleaned_data.get(name)
            if value is None or value == "":
                value = form_field.initial
            values[name] = value
        return values


class StixExperimentForm(ExperimentForm):
    null_df = forms.FloatField(min_value=1e-9)
    alt_df = forms.FloatField(min_value=1e-9)
    images_per_group = forms.IntegerField(min_value=1, required=False, initial=12)
    reps = forms.IntegerField(min_value=1, required=False, initial=100)
    B = forms.IntegerField(min_value=1, required=False, initial=10000)
    summaries = forms.CharField(required=False, initial="landscape")
    rows = forms.IntegerField(min_value=2, required=False, initial=64)
    cols = forms.IntegerField(min_value=2, required=False, initial=64)
    n_sticks = forms.IntegerField(min_value=0, required=False, initial=50)
    antialias = forms.BooleanField(required=False, initial=False)
    loess_fraction = forms.FloatField(min_value=1e-9, max_value=1.0, required=False, initial=0.001)
    grid_size = forms.IntegerField(min_value=2, required=False, initial=512)

    def clean_summaries(self):
        text = self.cleaned_data.get("summaries") or self.fields["summaries"].initial
        try:
            return [SummarySpec.parse(part) for part in text.split(",") if part.strip()]
        except (ValueError, BadConfig) as exc:
            raise forms.ValidationError(str(exc))


class GlandExperimentForm(ExperimentForm):
    n_train = forms.IntegerField(min_value=4)
    n_test = forms.IntegerField(min_value=1)
    types = forms.CharField(required=False, initial="A,B,C,D")
    n_points = forms.IntegerField(min_value=1, required=False, initial=300)
    radius = forms.FloatField(min_value=1e-9, required=False, initial=0.3)
    jitter = forms.FloatField(min_value=0.0, required=False, initial=0.02)
    kde_h = forms.FloatField(min_value=1e-9, required=False, initial=0.05)
    kde_grid = forms.IntegerField(min_value=2, required=False, initial=64)
    summary = forms.CharField(required=False, initial="silhouette")
    k_candidates = forms.CharField(required=False, initial="1,3,5,7,9")
    bandwidths = forms.CharField(required=False, initial="")
    grid_size = forms.IntegerField(min_value=2, required=False, initial=512)
    mds = forms.BooleanField(required=False, initial=False)

    def clean_types(self):
        text = self.cleaned_data.get("types") or self.fields["types"].initial
        types = [part.strip() for part in text.split(",") if part.strip()]
        unknown = [t for t in types if t not in GLAND_TYPES]
        if unknown or len(types) < 2:
            raise forms.ValidationError(f"need at least two of {', '.join(GLAND_TYPES)}, got {text!r}")
        return types

    def clean_summary(self):
        text = self.cleaned_data.get("summary") or self.fields["summary"].initial
        try:
            return SummarySpec.parse(text)
        except (ValueError, BadConfig) as exc:
            raise forms.ValidationError(str(exc))

    def clean_k_candidates(self):
        text = self.cleaned_data.get("k_candidates") or self.fields["k_candidates"].initial
        try:
            return _number_list(text, int)
        except ValueError:
            raise forms.ValidationError(f"{text!r} is not a comma-separated list of integers")

    def clean_bandwidths(self):
        text = self.cleaned_data.get("bandwidths") or ""
        try:
            return _number_list(text)
        except ValueError:
            raise forms.ValidationError(f"{text!r} is not a comma-separated list of numbers")

    def clean(self):
        cleaned = super().clean()
        if cleaned.get("n_train") and cleaned.get("types") and cleaned["n_train"] < 2 * len(cleaned["types"]):
            self.add_error("n_train", "need at least two training glands per type")
        return cleaned


class FibrinExperimentForm(ExperimentForm):
    field_a = forms.CharField()
    field_b = forms.CharField()
    tiles = forms.CharField(required=False, initial="3x4")
    summaries = forms.CharField(required=False, initial="landscape")
    B = forms.IntegerField(min_value=1, required=False, initial=10000)
    loess_fraction = forms.FloatField(min_value=1e-9, max_value=1.0, required=False, initial=0.001)
    grid_size = forms.IntegerField(min_value=2, required=False, initial=512)

    clean_summaries = StixExperimentForm.clean_summaries

    def clean_tiles(self):
        text = self.cleaned_data.get("tiles") or self.fields["tiles"].initial
        try:
            rows, cols = (int(part) for part in text.lower().split("x"))
        except ValueError:
            raise forms.ValidationError(f"expected ROWSxCOLS, got {text!r}")
        if rows < 1 or cols < 1:
            raise forms.ValidationError("tile counts must be positive")
        return rows, cols


EXPERIMENT_FORMS = {"stix": StixExperimentForm, "gland": GlandExperimentForm, "fibrin": FibrinExperimentForm}


def validate_config(raw):
    """Validate a key=value mapping; raise BadConfig listing every problem."""
    kind = raw.get("experiment")
    form_class = EXPERIMENT_FORMS.get(kind)
    if form_class is None:
        choices = ", ".join(EXPERIMENT_FORMS)
        raise BadConfig({"experiment": [f"required; one of {choices}, got {kind!r}" if kind else "required"]})
    form = form_class(data=raw)
    errors = {}
    if not form.is_valid():
        errors.update({key: list(messages) for key, messages in form.errors.items()})
    unknown = sorted(set(raw) - set(form.fields))
    for key in unknown:
        errors[key] = ["unknown key"]
    if errors:
        raise BadConfig(errors)
    values = form.resolved()
    values["metric"] = MetricSpec(p=values.pop("metric_p"), weight=values.pop("metric_weight"))
    return values


# STIX

def run_stix_experiment(values, threads=None):
    specs = [
        SummarySpec(spec.kind, values["dim"], values["k_max"], spec.kernel, spec.h, spec.p)
        for spec in values["summaries"]
    ]
    stix_options = {
        "rows": values["rows"],
        "cols": values["cols"],
        "n_sticks": values["n_sticks"],
        "antialias": values["antialias"],
    }
    loess = LoessSpec.from_settings(values["loess_fraction"])
    return stix_experiment(
        values["null_df"],
        values["alt_df"],
        values["images_per_group"],
        values["reps"],
        values["B"],
        specs=specs,
        seed=values["seed"],
        stix_options=stix_options,
        loess=loess,
        metric=values["metric"],
        grid_size=values["grid_size"],
        threads=threads,
    )


# Glands

@dataclass(frozen=True, eq=False)
class GlandResult:
    k: int
    h: Optional[float]
    loocv_error: float
    test_error: float
    confusion: pd.DataFrame
    predictions: pd.DataFrame
    loocv_table: Optional[pd.DataFrame] = None
    embedding: Optional[np.ndarray] = field(default=None, repr=False)

    def describe(self):
        return {
            "k": self.k,
            "h": self.h,
            "loocv_error": self.loocv_error,
            "test_error": self.test_error,
            "n_test": int(self.confusion.to_numpy().sum()),
        }


def gland_diagrams(types, per_type, split, seed, n_points, radius, jitter, kde_spec, max_dim, threads=None):
    """Diagrams and labels of ``per_type`` simulated glands of each type."""
    jobs = [
        (label, GlandConfig.for_type(
            gland_type,
            n_points=n_points,
            radius=radius,
            jitter=jitter,
            seed=derive_seed(seed, split, label, i),
        ))
        for label, gland_type in enumerate(types)
        for i in range(per_type)
    ]

    def diagram(job):
        return superlevel_diagram(kde(gland(job[1]), kde_spec), max_dim)

    return parallel_map(diagram, jobs, threads), [label for label, _ in jobs]


def gland_experiment(
    types=("A", "B", "C", "D"),
    n_train=200,
    n_test=40,
    seed=0,
    n_points=300,
    radius=0.3,
    jitter=0.02,
    kde_h=0.05,
    kde_grid=64,
    summary=None,
    k_candidates=(1, 3, 5, 7, 9),
    bandwidths=(),
    metric=None,
    grid_size=None,
    mds=False,
    threads=None,
):
    """Simulate, summarise and classify glands with kNN; k (and h) chosen by leave-one-out.

    ``n_train`` and ``n_test`` are totals split evenly across ``types``.
    """
    types = list(types)
    summary = summary or SummarySpec(SummaryKind.SILHOUETTE, dim=1)
    metric = metric or MetricSpec(p=2.0)
    kde_spec = KdeSpec(h=kde_h, rows=kde_grid, cols=kde_grid, extent=(0.0, 0.0, 1.0, 1.0))
    options = dict(seed=seed, n_points=n_points, radius=radius, jitter=jitter, kde_spec=kde_spec,
                   max_dim=summary.dim, threads=threads)
    train_diagrams, train_labels = gland_diagrams(types, n_train // len(types), 0, **options)
    test_diagrams, test_labels = gland_diagrams(types, max(n_test // len(types), 1), 1, **options)
    grid = default_grid(train_diagrams, dim=summary.dim, m=grid_size)

    h = None
    loocv_table = None
    if bandwidths and summary.kind == SummaryKind.GENERALIZED_LANDSCAPE:
        h, k, loocv_error, loocv_table = loocv_select_bandwidth(
            train_diagrams, train_labels, bandwidths, k_candidates, metric, grid, spec=summary, threads=threads
        )
        summary = SummarySpec(summary.kind, summary.dim, summary.k_max, summary.kernel, h)
    train = LabeledCurveSet([summarize_or_zero(d, summary, grid) for d in train_diagrams], train_labels)
    dm = distance_matrix(train.curves, metric, threads)
    if h is None:
        k, loocv_error = loocv_select_k(train, k_candidates, metric, dm=dm)
        if summary.kind == SummaryKind.GENERALIZED_LANDSCAPE:
            h = summary.h

    predicted = [knn_classify(train, summarize_or_zero(d, summary, grid), k, metric) for d in test_diagrams]
    classes = list(range(len(types)))
    confusion = confusion_matrix(test_labels, predicted, classes)
    confusion.index = types
    confusion.columns = types
    confusion.index.name, confusion.columns.name = "actual", "predicted"
    predictions = pd.DataFrame({
        "id": np.arange(len(test_labels)),
        "actual": [types[a] for a in test_labels],
        "predicted": [types[p] for p in predicted],
    })
    test_error = float(np.mean(np.asarray(predicted) != np.asarray(test_labels)))
    embedding = classical_mds(dm, 2) if mds else None
    logger.info("gland experiment: k=%d, loocv error %.4f, test error %.4f", k, loocv_error, test_error)
    return GlandResult(k, h, loocv_error, test_error, confusion, predictions, loocv_table, embedding)


def run_gland_experiment(values, threads=None):
    summary = values["summary"]
    summary = SummarySpec(summary.kind, values["dim"], values["k_max"], summary.kernel, summary.h, summary.p)
    return gland_experiment(
        types=values["types"],
        n_train=values["n_train"],
        n_test=values["n_test"],
        seed=values["seed"],
        n_points=values["n_points"],
        radius=values["radius"],
        jitter=values["jitter"],
        kde_h=values["kde_h"],
        kde_grid=values["kde_grid"],
        summary=summary,
        k_candidates=values["k_candidates"],
        bandwidths=values["bandwidths"],
        metric=values["metric"],
        grid_size=values["grid_size"],
        mds=values["mds"],
        threads=threads,
    )


# Fibrin tiles

def tile_diagrams(field_, tiles=(3, 4), loess=None, max_dim=1, threads=None):
    """Split an image into tiles, smooth each tile and compute its diagram."""
    loess = loess or LoessSpec.from_settings()

    def diagram(tile):
        return superlevel_diagram(loess_smooth(tile, loess), max_dim)

    return parallel_map(diagram, tile_field(field_, *tiles), threads)


def fibrin_pipeline(field_a, field_b, tiles=(3, 4), specs=None, metric=None, B=1000, seed=0, loess=None,
                    grid_size=None, threads=None):
    """Compare two images through the summaries of their tiles, one permutation test per summary order."""
    specs = list(specs or [SummarySpec(dim=1, k_max=3)])
    metric = metric or MetricSpec(p=2.0)
    max_dim = max(spec.dim for spec in specs)
    groups = [tile_diagrams(f, tiles, loess, max_dim, threads) for f in (field_a, field_b)]
    rows = []
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
                seed=derive_seed(seed, column),
                threads=threads,
            )
            rows.append({"summary": spec.label, "order": k, "statistic": result.statistic,
                         "p_value": result.p_value})
            column += 1
    return pd.DataFrame(rows, columns=["summary", "order", "statistic", "p_value"])


def run_fibrin_experiment(values, fields, threads=None):
    """``fields`` are the two images named by the field_a and field_b keys, already read."""
    specs = [
        SummarySpec(spec.kind, values["dim"], values["k_max"], spec.kernel, spec.h, spec.p)
        for spec in values["summaries"]
    ]
    return fibrin_pipeline(
        fields[0],
        fields[1],
        tiles=values["tiles"],
        specs=specs,
        metric=values["metric"],
        B=values["B"],
        seed=values["seed"],
        loess=LoessSpec.from_settings(values["loess_fraction"]),
        grid_size=values["grid_size"],
        threads=threads,
    )
