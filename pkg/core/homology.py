"""
Superlevel persistence of 2D scalar fields on the cubical grid.

Pixels are vertices, 4-neighbours are joined by edges and every 2x2 block of
pixels spans a square. The superlevel filtration of f is computed as the
lower-star filtration of g = -f: each cell enters at the max of g over its
pixels. Cells are totally ordered by (value, dimension, cell index), which
is also how every tie is broken.

Cell index layout::

    [0, V)                 vertices, row-major
    [V, V + Eh)            horizontal edges (i, j)-(i, j+1)
    [V + Eh, V + E)        vertical edges (i, j)-(i+1, j)
    [V + E, V + E + F)     squares, indexed by their top-left pixel
"""

import logging
from functools import cached_property

import numpy as np
from django.conf import settings
from scipy import ndimage

from .domain import RawPair, ScalarField, canonicalize_superlevel
from .exceptions import BadDim, BadTiling, EmptyField

logger = logging.getLogger(__name__)

METHODS = ("reduction", "union_find")

# pixels touch along edges only; diagonal neighbours are not joined
FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)


class CubicalComplex:
    """The full cubical complex of a field with its lower-star filtration of -f."""

    def __init__(self, field):
        if field.values.size == 0:
            raise EmptyField("field has no pixels")
        self.field = field
        self.rows, self.cols = field.shape
        rows, cols = self.rows, self.cols
        self.n_vertices = rows * cols
        self.n_hedges = rows * (cols - 1)
        self.n_vedges = (rows - 1) * cols
        self.n_edges = self.n_hedges + self.n_vedges
        self.n_squares = (rows - 1) * (cols - 1)

        g = 0.0 - field.values
        hedge = np.maximum(g[:, :-1], g[:, 1:])
        vedge = np.maximum(g[:-1, :], g[1:, :])
        square = np.maximum(np.maximum(g[:-1, :-1], g[:-1, 1:]), np.maximum(g[1:, :-1], g[1:, 1:]))
        self.values = np.concatenate([g.ravel(), hedge.ravel(), vedge.ravel(), square.ravel()])
        self.dims = np.concatenate([
            np.zeros(self.n_vertices, dtype=int),
            np.ones(self.n_edges, dtype=int),
            np.full(self.n_squares, 2, dtype=int),
        ])
        n = len(self.values)
        self.order = np.lexsort((np.arange(n), self.dims, self.values))
        self.position = np.empty(n, dtype=np.int64)
        self.position[self.order] = np.arange(n)

    def __len__(self):
        return len(self.values)

    @property
    def edge_offset(self):
        return self.n_vertices

    @property
    def square_offset(self):
        return self.n_vertices + self.n_edges

    @cached_property
    def edge_vertices(self):
        """(E, 2) array of vertex indices for every edge."""
        rows, cols = self.rows, self.cols
        ii, jj = np.meshgrid(np.arange(rows), np.arange(cols - 1), indexing="ij")
        h_start = (ii * cols + jj).ravel()
        ii, jj = np.meshgrid(np.arange(rows - 1), np.arange(cols), indexing="ij")
        v_start = (ii * cols + jj).ravel()
        start = np.concatenate([h_start, v_start])
        end = np.concatenate([h_start + 1, v_start + cols])
        return np.column_stack([start, end]).astype(np.int64)

    @cached_property
    def square_edges(self):
        """(F, 4) array of edge indices (top, bottom, left, right) for every square."""
        rows, cols = self.rows, self.cols
        ii, jj = np.meshgrid(np.arange(rows - 1), np.arange(cols - 1), indexing="ij")
        ii, jj = ii.ravel(), jj.ravel()
        top = ii * (cols - 1) + jj
        bottom = (ii + 1) * (cols - 1) + jj
        left = self.n_hedges + ii * cols + jj
        right = left + 1
        return np.column_stack([top, bottom, left, right]).astype(np.int64)

    @cached_property
    def edge_faces(self):
        """(E, 2) array of the squares on either side of each edge; -1 is the outside."""
        rows, cols = self.rows, self.cols
        ii, jj = np.meshgrid(np.arange(rows), np.arange(cols - 1), indexing="ij")
        above = np.where(ii > 0, (ii - 1) * (cols - 1) + jj, -1)
        below = np.where(ii < rows - 1, ii * (cols - 1) + jj, -1)
        h_faces = np.column_stack([above.ravel(), below.ravel()])
        ii, jj = np.meshgrid(np.arange(rows - 1), np.arange(cols), indexing="ij")
        left = np.where(jj > 0, ii * (cols - 1) + jj - 1, -1)
        right = np.where(jj < cols - 1, ii * (cols - 1) + jj, -1)
        v_faces = np.column_stack([left.ravel(), right.ravel()])
        return np.vstack([h_faces, v_faces]).astype(np.int64)

    def boundary(self, cell):
        """Global indices of the codimension-1 faces of ``cell``."""
        if cell < self.edge_offset:
            return []
        if cell < self.square_offset:
            return [int(v) for v in self.edge_vertices[cell - self.edge_offset]]
        edges = self.square_edges[cell - self.square_offset]
        return [int(e) + self.edge_offset for e in edges]

    def raw_pair(self, dim, birth_cell, death_cell):
        # g = -f, so negating a cell value gives back the field level
        return RawPair(dim, 0.0 - float(self.values[birth_cell]), 0.0 - float(self.values[death_cell]))


# Persistence

def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


def _h0_pairs(cx, cleared=frozenset()):
    """Union-find over edges in filtration order; the younger component dies."""
    parent = list(range(cx.n_vertices))
    position = cx.position
    pairs = []
    edge_cells = np.arange(cx.edge_offset, cx.square_offset)
    edge_cells = edge_cells[np.argsort(position[edge_cells], kind="stable")]
    ends = cx.edge_vertices
    for cell in edge_cells.tolist():
        if cell in cleared:
            continue
        u, v = ends[cell - cx.edge_offset]
        ru, rv = _find(parent, int(u)), _find(parent, int(v))
        if ru == rv:
            continue
        if position[ru] > position[rv]:
            ru, rv = rv, ru
        parent[rv] = ru
        pairs.append((0, rv, cell))
    return pairs


def _h1_pairs_reduction(cx):
    """Reduce square columns in filtration order; returns pairs and the edges used as pivots."""
    position = cx.position
    order = cx.order
    pivots = {}
    pairs = []
    square_cells = np.arange(cx.square_offset, len(cx))
    square_cells = square_cells[np.argsort(position[square_cells], kind="stable")]
    edge_positions = position[cx.edge_offset:cx.square_offset]
    for cell in square_cells.tolist():
        column = set(edge_positions[cx.square_edges[cell - cx.square_offset]].tolist())
        while column:
            low = max(column)
            other = pivots.get(low)
            if other is None:
                break
            column ^= other
        if column:
            low = max(column)
            pivots[low] = column
            pairs.append((1, int(order[low]), cell))
    cleared = frozenset(int(order[low]) for low in pivots)
    return pairs, cleared


def _h1_pairs_dual(cx):
    """Union-find on the dual graph (squares plus the outside) in reverse filtration order.

    A component's key is the largest position among its squares; the outside
    never dies. Merging two components through an edge pairs that edge with
    the key square of the component with the smaller key.
    """
    outside = cx.n_squares
    parent = list(range(cx.n_squares + 1))
    key = cx.position[cx.square_offset:].tolist() + [len(cx)]
    faces = cx.edge_faces
    pairs = []
    edge_cells = np.arange(cx.edge_offset, cx.square_offset)
    edge_cells = edge_cells[np.argsort(-cx.position[edge_cells], kind="stable")]
    for cell in edge_cells.tolist():
        a, b = faces[cell - cx.edge_offset]
        ra = _find(parent, outside if a < 0 else int(a))
        rb = _find(parent, outside if b < 0 else int(b))
        if ra == rb:
            continue
        if key[ra] < key[rb]:
            ra, rb = rb, ra
        parent[rb] = ra
        pairs.append((1, cell, int(cx.order[key[rb]])))
    return pairs


def persistence_pairs(cx, max_dim=1, method=None):
    """Raw (dim, birth_level, death_level) pairs with positive persistence, essential class first."""
    method = method or getattr(settings, "TDASUM_HOMOLOGY_METHOD", "reduction")
    if method not in METHODS:
        raise ValueError(f"unknown homology method {method!r}; choose one of {', '.join(METHODS)}")
    if max_dim not in (0, 1):
        raise BadDim(f"max_dim must be 0 or 1, got {max_dim}")

    h1, cleared = [], frozenset()
    if max_dim >= 1:
        if method == "reduction":
            h1, cleared = _h1_pairs_reduction(cx)
        else:
            h1 = _h1_pairs_dual(cx)
    h0 = _h0_pairs(cx, cleared)

    position = cx.position
    indexed = sorted(h0 + h1, key=lambda pair: (pair[0], position[pair[1]], position[pair[2]]))
    pairs = []
    for dim, birth_cell, death_cell in indexed:
        pair = cx.raw_pair(dim, birth_cell, death_cell)
        if pair.birth_level > pair.death_level:
            pairs.append(pair)

    oldest = int(cx.order[0])
    essential = RawPair(0, 0.0 - float(cx.values[oldest]), float(cx.field.values.min()), True)
    logger.debug(
        "%s: %d H0 and %d H1 pairs from a %dx%d field (%s)",
        cx.field.source or "field", sum(p.dim == 0 for p in pairs) + 1,
        sum(p.dim == 1 for p in pairs), cx.rows, cx.cols, method,
    )
    return [essential] + pairs


def superlevel_diagram(field, max_dim=1, method=None):
    """Persistence diagram of the superlevel filtration of ``field``, in canonical coordinates.

    The single essential H0 class is born at the global maximum and
    finitized at the global minimum of the field.
    """
    cx = CubicalComplex(field)
    return canonicalize_superlevel(persistence_pairs(cx, max_dim, method), source=field.source)


# Oracles and tiling

def betti_at_level(field, level):
    """(beta0, beta1) of the superlevel set {f >= level} by direct counting.

    beta0 counts 4-connected pixel components, the same adjacency the cubical
    complex uses (DESIGN.md, "Connectivity"); beta1 follows from the Euler
    characteristic V - E + F of the thresholded complex.
    """
    if field.values.size == 0:
        raise EmptyField("field has no pixels")
    mask = field.values >= level
    _, beta0 = ndimage.label(mask, structure=FOUR_CONNECTED)
    vertices = int(mask.sum())
    edges = int((mask[:, :-1] & mask[:, 1:]).sum() + (mask[:-1, :] & mask[1:, :]).sum())
    squares = int((mask[:-1, :-1] & mask[:-1, 1:] & mask[1:, :-1] & mask[1:, 1:]).sum())
    euler = vertices - edges + squares
    return int(beta0), int(beta0 - euler)


def alive_counts(diagram, level):
    """Number of H0 and H1 points of a canonical superlevel diagram alive at ``level``."""
    counts = [0, 0]
    for pair in diagram.raw_levels():
        if pair.dim > 1:
            continue
        if pair.essential:
            alive = pair.birth_level >= level
        else:
            alive = pair.birth_level >= level > pair.death_level
        counts[pair.dim] += int(alive)
    return tuple(counts)


def tile_field(field, tiles_r, tiles_c):
    """Split ``field`` into tiles_r x tiles_c tiles in row-major order.

    Remainder rows and columns that do not fill a whole tile are dropped.
    Row i of the field spans y in [y0 + i dy, y0 + (i + 1) dy).
    """
    rows, cols = field.shape
    if tiles_r < 1 or tiles_c < 1:
        raise BadTiling(f"tile counts must be positive, got {tiles_r}x{tiles_c}")
    if tiles_r > rows or tiles_c > cols:
        raise BadTiling(f"cannot split a {rows}x{cols} field into {tiles_r}x{tiles_c} tiles")
    if tiles_r == tiles_c == 1:
        return [field]
    height, width = rows // tiles_r, cols // tiles_c
    truncated = height * tiles_r != rows or width * tiles_c != cols
    if truncated:
        logger.warning(
            "%s: %dx%d field does not divide into %dx%d tiles; dropping %d rows and %d columns",
            field.source or "field", rows, cols, tiles_r, tiles_c, rows - height * tiles_r, cols - width * tiles_c,
        )
    x0, y0, x1, y1 = field.extent
    dx, dy = (x1 - x0) / cols, (y1 - y0) / rows
    tiles = []
    for r in range(tiles_r):
        for c in range(tiles_c):
            values = field.values[r * height:(r + 1) * height, c * width:(c + 1) * width]
            extent = (
                x0 + c * width * dx, y0 + r * height * dy,
                x0 + (c + 1) * width * dx, y0 + (r + 1) * height * dy,
            )
            source = f"{field.source} tile {r},{c}".strip()
            if truncated:
                source += " (truncated)"
            tiles.append(ScalarField(values, extent, source))
    return tiles
