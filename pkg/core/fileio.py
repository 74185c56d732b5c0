"""
Readers and writers for every on-disk format.

Floats are written with 17 significant digits so that values survive a
round trip bit for bit; identical inputs give byte-identical files.
"""

import hashlib
import json
import math
from pathlib import Path

import numpy as np
import pandas as pd
from django.core.serializers.json import DjangoJSONEncoder
from dotenv import dotenv_values

from .domain import (
    DiagramPoint,
    Grid1D,
    Orientation,
    PersistenceDiagram,
    PointCloud,
    ScalarField,
    SummaryCurve,
    SummaryKind,
)
from .exceptions import MalformedFile, RawPairInverted

FLOAT_FORMAT = "%.17g"

DIAGRAM_COLUMNS = ["dim", "birth", "death", "essential"]

# optional first line of a diagram file, ahead of the CSV header
ORIENTATION_PREFIX = "# orientation:"

_TRUE = {"1", "true", "t", "yes"}
_FALSE = {"0", "false", "f", "no"}


def _read_csv(path, expected=None, skip=0):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"{path}: no such file")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skiprows=skip)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise MalformedFile(path, str(exc)) from exc
    frame.columns = [str(c).strip() for c in frame.columns]
    if expected is not None and list(frame.columns) != expected:
        raise MalformedFile(path, f"expected header {','.join(expected)}, got {','.join(frame.columns)}", line=1 + skip)
    return frame


def _float_column(frame, column, path, skip=0):
    values = np.empty(len(frame))
    for row, text in enumerate(frame[column]):
        try:
            values[row] = float(text)
        except ValueError:
            # +2: header line, then 1-based rows
            raise MalformedFile(path, f"column {column!r}: {text!r} is not a number", line=row + 2 + skip) from None
        if not math.isfinite(values[row]):
            raise MalformedFile(path, f"column {column!r}: non-finite value {text!r}", line=row + 2 + skip)
    return values


def _write_frame(frame, path, preamble=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        if preamble is not None:
            handle.write(preamble + "\n")
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


# Diagrams

def _header_orientation(path):
    """Orientation named on a leading ``# orientation:`` line, or None."""
    try:
        with open(path, encoding="utf-8") as handle:
            first = handle.readline().strip()
    except UnicodeDecodeError as exc:
        raise MalformedFile(path, str(exc)) from exc
    if not first.startswith(ORIENTATION_PREFIX):
        return None
    value = first[len(ORIENTATION_PREFIX):].strip()
    if value not in Orientation.values:
        raise MalformedFile(path, f"unknown orientation {value!r}", line=1)
    return Orientation(value)


def read_diagram(path, orientation=None):
    """Read a diagram CSV.

    The orientation comes from the file's ``# orientation:`` line when there
    is one, else from ``orientation``, else superlevel-negated, which is what
    the diagram command writes. A file that names a different orientation
    than the one asked for is malformed.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"{path}: no such file")
    stated = _header_orientation(path)
    if stated is not None and orientation is not None and stated != orientation:
        raise MalformedFile(path, f"file states orientation {stated}, expected {orientation}", line=1)
    orientation = stated or orientation or Orientation.SUPERLEVEL_NEGATED
    skip = 0 if stated is None else 1

    frame = _read_csv(path, DIAGRAM_COLUMNS, skip=skip)
    births = _float_column(frame, "birth", path, skip=skip)
    deaths = _float_column(frame, "death", path, skip=skip)
    points = []
    for row, (dim, flag) in enumerate(zip(frame["dim"], frame["essential"])):
        line = row + 2 + skip
        flag = flag.strip().lower()
        if flag not in _TRUE | _FALSE:
            raise MalformedFile(path, f"essential flag {flag!r} is not a boolean", line=line)
        try:
            points.append(DiagramPoint(int(dim), births[row], deaths[row], flag in _TRUE))
        except (ValueError, RawPairInverted) as exc:
            raise MalformedFile(path, str(exc), line=line) from exc
    return PersistenceDiagram(tuple(points), orientation, source=str(path))


def write_diagram(diagram, path):
    """Superlevel-negated diagrams are written as the bare CSV; any other orientation is named on line 1."""
    frame = pd.DataFrame({
        "dim": [p.dim for p in diagram.points],
        "birth": [p.birth for p in diagram.points],
        "death": [p.death for p in diagram.points],
        "essential": [int(p.essential) for p in diagram.points],
    }, columns=DIAGRAM_COLUMNS)
    preamble = None
    if diagram.orientation != Orientation.SUPERLEVEL_NEGATED:
        preamble = f"{ORIENTATION_PREFIX} {diagram.orientation}"
    return _write_frame(frame, path, preamble)


# Summary curves and surfaces

def curve_frame(curve):
    columns = {"t": curve.grid.samples}
    for k in range(curve.k_max):
        columns[f"k{k + 1}"] = curve.orders[k]
    return pd.DataFrame(columns)


def write_curve(curve, path):
    return _write_frame(curve_frame(curve), path)


def read_curve(path, kind=SummaryKind.LANDSCAPE):
    frame = _read_csv(path)
    columns = list(frame.columns)
    expected = ["t"] + [f"k{k}" for k in range(1, len(columns))]
    if len(columns) < 2 or columns != expected:
        raise MalformedFile(path, f"expected header t,k1,...,kK, got {','.join(columns)}", line=1)
    t = _float_column(frame, "t", path)
    if len(t) < 2:
        raise MalformedFile(path, "a curve needs at least 2 grid samples")
    grid = Grid1D(t[0], t[-1], len(t))
    if not np.allclose(t, grid.samples, rtol=0.0, atol=1e-9 * max(1.0, abs(grid.t1 - grid.t0))):
        raise MalformedFile(path, "t column is not a uniform grid")
    orders = np.vstack([_float_column(frame, name, path) for name in columns[1:]])
    return SummaryCurve(grid, orders, SummaryKind(kind), {"source": str(path)})


def write_surface(surface, path):
    births, deaths = np.meshgrid(surface.birth_grid.samples, surface.death_grid.samples, indexing="ij")
    frame = pd.DataFrame({
        "birth": births.ravel(),
        "death": deaths.ravel(),
        "value": surface.values.ravel(),
    })
    return _write_frame(frame, path)


def write_vector(values, path, column="value"):
    return _write_frame(pd.DataFrame({column: np.asarray(values)}), path)


# Learning outputs

def read_matrix(path):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"{path}: no such file")
    try:
        matrix = pd.read_csv(path, header=None).to_numpy(dtype=float)
    except (ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise MalformedFile(path, str(exc)) from exc
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise MalformedFile(path, f"distance matrix must be square, got shape {matrix.shape}")
    return matrix


def write_matrix(matrix, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(np.asarray(matrix)).to_csv(
        path, header=False, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )
    return path


def write_embedding(coords, path):
    coords = np.asarray(coords)
    frame = pd.DataFrame(coords, columns=[f"x{d + 1}" for d in range(coords.shape[1])])
    frame.insert(0, "id", np.arange(len(coords)))
    return _write_frame(frame, path)


def read_labels(path):
    frame = _read_csv(path, ["id", "label"])
    labels = []
    for row, text in enumerate(frame["label"]):
        try:
            label = int(text)
        except ValueError:
            raise MalformedFile(path, f"label {text!r} is not an integer", line=row + 2) from None
        if label < 0:
            raise MalformedFile(path, f"label {label} is negative", line=row + 2)
        labels.append(label)
    return labels


def write_labels(labels, path):
    frame = pd.DataFrame({"id": np.arange(len(labels)), "label": np.asarray(labels, dtype=int)})
    return _write_frame(frame, path)


def write_table(frame, path, index=False):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=index, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


# Key-value results, configs and digests

def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    if isinstance(value, Path):
        return str(value)
    return value


def dumps_json(payload):
    return json.dumps(_plain(payload), cls=DjangoJSONEncoder, indent=2, sort_keys=True) + "\n"


def write_json(payload, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_json(payload), encoding="utf-8")
    return path


def read_config(path):
    """Flat key=value file; blank lines and # comments are ignored."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"{path}: no such file")
    return {key: ("" if value is None else value) for key, value in dotenv_values(path).items()}


def file_digest(path):
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()
