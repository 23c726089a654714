"""Dual graphs of tilings, the column-collapsed weighted graph, and the cylinder."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .tiling import Tiling, TilingError

#: edge tags: the shared segment is horizontal (top/bottom neighbours),
#: vertical (left/right neighbours), or a cylinder wrap edge.
VERTICAL_NEIGHBOUR = 1
HORIZONTAL_NEIGHBOUR = 2
WRAP = 3


class DisconnectedGraphError(ValueError):
    pass


class DualGraph:
    """Simple undirected graph in CSR form with per-edge contact tags.

    ``indices[indptr[u]:indptr[u+1]]`` are the neighbours of ``u`` in
    increasing order and ``tags`` holds the matching contact direction:
    1 for ``N(A, 1)`` (the shared segment is parallel to the x-axis), 2 for
    ``N(A, 2)``, 3 for cylinder wrap edges.
    """

    def __init__(self, indptr, indices, tags, tiling: Tiling | None = None,
                 column_offsets: np.ndarray | None = None):
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int32 if len(indptr) < 2**31 else np.int64)
        self.tags = np.asarray(tags, dtype=np.uint8)
        self.tiling = tiling
        self.column_offsets = None if column_offsets is None else np.asarray(column_offsets, dtype=np.int64)
        self._deg = None
        self._connected = None

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    @property
    def degrees(self) -> np.ndarray:
        if self._deg is None:
            self._deg = np.diff(self.indptr)
        return self._deg

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def neighbor_tags(self, u: int) -> np.ndarray:
        return self.tags[self.indptr[u]:self.indptr[u + 1]]

    def adjacency(self, dtype=np.float64) -> sp.csr_matrix:
        data = np.ones(len(self.indices), dtype=dtype)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def edges(self) -> np.ndarray:
        """``(m, 2)`` array of edges ``u < v`` in lexicographic order."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        keep = src < self.indices
        return np.column_stack([src[keep], self.indices[keep].astype(np.int64)])

    def edge_tags(self) -> np.ndarray:
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        return self.tags[src < self.indices]

    def column_of(self) -> np.ndarray:
        off = self.require_columns()
        return np.repeat(np.arange(len(off) - 1), np.diff(off))

    def require_columns(self) -> np.ndarray:
        if self.column_offsets is None:
            if self.tiling is None:
                raise TilingError("graph carries no column partition")
            self.column_offsets = self.tiling.column_offsets()
        return self.column_offsets

    def is_connected(self) -> bool:
        if self._connected is None:
            if self.n <= 1:
                self._connected = True
            else:
                k, _ = connected_components(self.adjacency(np.int8), directed=False)
                self._connected = k == 1
        return self._connected

    def is_simple_symmetric(self) -> bool:
        A = self.adjacency(np.int8)
        if np.any(A.diagonal() != 0):
            return False
        if A.nnz != len(self.indices):
            return False
        return (A != A.T).nnz == 0

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, edges={self.n_edges})"


class CylindricalGraph(DualGraph):
    """Dual graph plus a wrap edge from the top to the bottom tile of every column."""


@dataclass
class WeightedGraph:
    """Undirected conductance network with optional self-loop weights.

    ``c_u = self_loops[u] + sum_v c_uv`` are the vertex weights of the lazy
    walk; self-loops play no role in resistances.
    """

    n: int
    edges: np.ndarray  # (m, 2), u < v
    conductance: np.ndarray  # (m,)
    self_loops: np.ndarray  # (n,)

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self.conductance = np.asarray(self.conductance)
        self.self_loops = np.asarray(self.self_loops)
        if np.any(self.conductance <= 0):
            raise ValueError("edge conductances must be positive")

    @property
    def vertex_weights(self) -> np.ndarray:
        c = self.self_loops.astype(np.float64).copy()
        np.add.at(c, self.edges[:, 0], self.conductance)
        np.add.at(c, self.edges[:, 1], self.conductance)
        return c

    def adjacency(self) -> sp.csr_matrix:
        u, v = self.edges[:, 0], self.edges[:, 1]
        w = self.conductance.astype(np.float64)
        A = sp.coo_matrix((np.r_[w, w], (np.r_[u, v], np.r_[v, u])), shape=(self.n, self.n))
        return A.tocsr()

    def transition_matrix(self) -> sp.csr_matrix:
        """``P[u, v] = c_uv / c_u`` including the self-loop laziness."""
        A = self.adjacency() + sp.diags(self.self_loops.astype(np.float64))
        return sp.diags(1.0 / self.vertex_weights) @ A


# ---------------------------------------------------------------------------
# construction


def _csr_from_pairs(n, src, dst, tag):
    src = np.r_[src, dst]
    dst2 = np.r_[dst, src[: len(dst)]]
    tag = np.r_[tag, tag]
    order = np.lexsort((dst2, src))
    src, dst2, tag = src[order], dst2[order], tag[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    return np.cumsum(indptr), dst2, tag


def _contacts(a_line, a_lo, a_hi, b_line, b_lo, b_hi):
    """Index pairs ``(i, j)`` with ``a_line[i] == b_line[j]`` and the intervals overlapping in positive length.

    Along one line, segments of each family are interior-disjoint, so the
    partners of ``i`` form a contiguous run once ``b`` is sorted.
    """
    if len(a_line) == 0 or len(b_line) == 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    lines = np.unique(np.r_[a_line, b_line])
    span = int(max(np.max(a_hi), np.max(b_hi))) + 1
    if len(lines) * span >= 2**62:
        return _contacts_slow(a_line, a_lo, a_hi, b_line, b_lo, b_hi)
    ra = np.searchsorted(lines, a_line).astype(np.int64) * span
    rb = np.searchsorted(lines, b_line).astype(np.int64) * span
    ob = np.lexsort((b_lo, rb))
    key_lo, key_hi = (rb + b_lo)[ob], (rb + b_hi)[ob]
    start = np.searchsorted(key_hi, ra + a_lo, side="right")
    stop = np.searchsorted(key_lo, ra + a_hi, side="left")
    cnt = np.maximum(stop - start, 0)
    i = np.repeat(np.arange(len(a_line)), cnt)
    j = ob[np.repeat(start, cnt) + (np.arange(len(i)) - np.repeat(np.cumsum(cnt) - cnt, cnt))]
    return i.astype(np.int64), j.astype(np.int64)


def _contacts_slow(a_line, a_lo, a_hi, b_line, b_lo, b_hi):
    by_line: dict = {}
    for j in range(len(b_line)):
        by_line.setdefault(b_line[j], []).append(j)
    out_i, out_j = [], []
    for i in range(len(a_line)):
        for j in by_line.get(a_line[i], ()):
            if min(a_hi[i], b_hi[j]) > max(a_lo[i], b_lo[j]):
                out_i.append(i)
                out_j.append(j)
    return np.array(out_i, np.int64), np.array(out_j, np.int64)


def _sweep_dual(t: Tiling):
    X, Y, W, H, dx, dy = t.coords()
    X0, Y0 = X - X.min(), Y - Y.min()
    n = len(X)
    # left/right contacts: right edge of A on the left edge of B
    i, j = _contacts(X0 + W, Y0, Y0 + H, X0, Y0, Y0 + H)
    # top/bottom contacts: top edge of A on the bottom edge of B
    k, l = _contacts(Y0 + H, X0, X0 + W, Y0, X0, X0 + W)
    src = np.r_[i, k]
    dst = np.r_[j, l]
    tag = np.r_[np.full(len(i), 2, np.uint8), np.full(len(k), 1, np.uint8)]
    return _csr_from_pairs(n, src, dst, tag)


def _overlap_range(r, h, h2):
    """Rows of a column with ``h2`` tiles touching row ``r`` of a column with ``h`` tiles."""
    lo = (r * h2) // h
    hi = ((r + 1) * h2 + h - 1) // h - 1
    return lo, hi - lo + 1


def _columnar_dual(counts: np.ndarray, cylinder: bool):
    counts = np.asarray(counts, dtype=np.int64)
    off = np.concatenate([[0], np.cumsum(counts)])
    n = int(off[-1])
    nb = len(counts)
    if cylinder and np.any(counts <= 2):
        raise TilingError("cylinder needs every column to hold at least 3 tiles")
    deg = np.zeros(n, dtype=np.int64)
    pieces = []
    for c in range(nb):
        h = int(counts[c])
        r = np.arange(h, dtype=np.int64)
        parts = []
        if c > 0:
            lo, cnt = _overlap_range(r, h, int(counts[c - 1]))
            parts.append((lo + off[c - 1], cnt, HORIZONTAL_NEIGHBOUR))
        if cylinder:
            below = np.where(r == 0, h - 1, r - 1)
            above = np.where(r == h - 1, 0, r + 1)
            first, second = np.minimum(below, above), np.maximum(below, above)
            parts.append((first + off[c], np.ones(h, np.int64), None))
            parts.append((second + off[c], np.ones(h, np.int64), None))
        else:
            if h > 1:
                parts.append((np.maximum(r - 1, 0) + off[c], (r > 0).astype(np.int64), VERTICAL_NEIGHBOUR))
                parts.append((np.minimum(r + 1, h - 1) + off[c], (r < h - 1).astype(np.int64), VERTICAL_NEIGHBOUR))
        if c < nb - 1:
            lo, cnt = _overlap_range(r, h, int(counts[c + 1]))
            parts.append((lo + off[c + 1], cnt, HORIZONTAL_NEIGHBOUR))
        pieces.append((c, h, parts))
        deg[off[c]:off[c + 1]] = sum(p[1] for p in parts)
    indptr = np.concatenate([[0], np.cumsum(deg)])
    indices = np.empty(int(indptr[-1]), dtype=np.int32 if n < 2**31 else np.int64)
    tags = np.empty(int(indptr[-1]), dtype=np.uint8)
    for c, h, parts in pieces:
        cursor = indptr[off[c]:off[c + 1]].copy()
        for start, cnt, tag in parts:
            total = int(cnt.sum())
            if total == 0:
                continue
            within = np.arange(total) - np.repeat(np.cumsum(cnt) - cnt, cnt)
            pos = np.repeat(cursor, cnt) + within
            indices[pos] = np.repeat(start, cnt) + within
            if tag is None:
                # in-column cylinder neighbours: the wrap pair is tagged 3
                rows = np.repeat(np.arange(h), cnt)
                nbr = np.repeat(start, cnt) + within - off[c]
                wrap = np.abs(nbr - rows) > 1
                tags[pos] = np.where(wrap, WRAP, VERTICAL_NEIGHBOUR)
            else:
                tags[pos] = tag
            cursor += cnt
    return indptr, indices, tags


def build_dual(t: Tiling, method: str = "auto", check_connected: bool = True) -> DualGraph:
    """Dual graph ``G(T)``: tiles adjacent iff they share a segment of positive length.

    ``method`` is ``"columnar"`` (uniform column tilings only), ``"sweep"``
    (any tiling, exact interval join), or ``"auto"``.
    """
    if method == "auto":
        method = "columnar" if t.has_uniform_columns else "sweep"
    if method == "columnar":
        indptr, indices, tags = _columnar_dual(t.column_counts(), cylinder=False)
        offsets = t.column_offsets()
    elif method == "sweep":
        indptr, indices, tags = _sweep_dual(t)
        offsets = None
        if t.has_uniform_columns:
            offsets = t.column_offsets()
    else:
        raise ValueError(f"unknown method {method!r}")
    g = DualGraph(indptr, indices, tags, tiling=t, column_offsets=offsets)
    if method == "columnar":
        g._connected = True
    if check_connected and not g.is_connected():
        raise DisconnectedGraphError("dual graph is disconnected")
    return g


def columns(t: Tiling) -> list[list[int]]:
    """Tile ids of every column, left to right, each bottom to top."""
    off = t.column_offsets()
    return [list(range(int(a), int(b))) for a, b in zip(off[:-1], off[1:])]


def column_neighbour_counts(g: DualGraph, c: int):
    """Per-tile counts of neighbours in column ``c-1``, in column ``c`` and in column ``c+1``."""
    off = g.require_columns()
    a, b = int(off[c]), int(off[c + 1])
    lo, hi = g.indptr[a], g.indptr[b]
    nb = g.indices[lo:hi]
    row = np.repeat(np.arange(b - a), np.diff(g.indptr[a:b + 1]))
    left = np.bincount(row[nb < a], minlength=b - a)
    right = np.bincount(row[nb >= b], minlength=b - a)
    same = np.diff(g.indptr[a:b + 1]) - left - right
    far = (nb < (off[c - 1] if c > 0 else 0)) | (nb >= (off[c + 2] if c + 2 < len(off) else g.n))
    return left, same, right, bool(far.any())


def linearize(g: DualGraph) -> WeightedGraph:
    """Collapse every column to one vertex.

    Edge conductance counts the dual edges between two columns; the
    self-loop weight of a column is twice its number of tiles.
    """
    off = g.require_columns()
    sizes = np.diff(off)
    nc = len(sizes)
    pairs, counts = [], []
    for c in range(nc - 1):
        a, b = int(off[c]), int(off[c + 1])
        nb = g.indices[g.indptr[a]:g.indptr[b]]
        if np.any(nb >= off[min(c + 2, nc)]):
            raise TilingError("an edge skips a column; graph is not columnar")
        m = int(np.count_nonzero(nb >= b))
        if m:
            pairs.append((c, c + 1))
            counts.append(m)
    return WeightedGraph(nc, np.array(pairs, dtype=np.int64).reshape(-1, 2),
                         np.array(counts, dtype=np.int64), 2 * sizes)


def cylindrify(g: DualGraph) -> CylindricalGraph:
    """Add the top-to-bottom wrap edge in every column (columns need >= 3 tiles)."""
    off = g.require_columns()
    sizes = np.diff(off)
    if np.any(sizes <= 2):
        raise TilingError("cylinder needs every column to hold at least 3 tiles")
    if isinstance(g, CylindricalGraph):
        raise TilingError("graph is already cylindrical")
    bottom, top = off[:-1], off[1:] - 1
    # each new entry goes at the end (bottom row gains top) or the start
    # (top row gains bottom) of the in-column run; find exact sorted slots
    rows = np.r_[bottom, top]
    new = np.r_[top, bottom]
    pos = np.empty(len(rows), dtype=np.int64)
    for idx, (u, v) in enumerate(zip(rows, new)):
        nbrs = g.neighbors(int(u))
        if np.any(nbrs == v):
            raise TilingError("wrap edge would duplicate an existing edge")
        pos[idx] = g.indptr[u] + np.searchsorted(nbrs, v)
    order = np.argsort(pos, kind="stable")
    pos, new, rows = pos[order], new[order], rows[order]
    indices = np.insert(g.indices, pos, new.astype(g.indices.dtype))
    tags = np.insert(g.tags, pos, WRAP)
    add = np.zeros(g.n + 1, dtype=np.int64)
    np.add.at(add, rows + 1, 1)
    indptr = g.indptr + np.cumsum(add)
    out = CylindricalGraph(indptr, indices, tags, tiling=g.tiling, column_offsets=off)
    out._connected = g._connected
    return out


def build_cylinder(t: Tiling) -> CylindricalGraph:
    """The cylindrical graph of a uniform column tiling, built directly."""
    indptr, indices, tags = _columnar_dual(t.column_counts(), cylinder=True)
    out = CylindricalGraph(indptr, indices, tags, tiling=t, column_offsets=t.column_offsets())
    # every column is a cycle and neighbouring columns always touch
    out._connected = True
    return out


def edge_count_between(h: int, h2: int) -> int:
    """Dual edges between adjacent uniform columns with ``h`` and ``h2`` tiles."""
    from math import gcd

    return h + h2 - gcd(h, h2)


def degree_bound(alpha_value: Fraction) -> Fraction:
    return 4 * (1 + alpha_value)
