"""Exact rectangle tilings: tiles, column tilings, products, concatenations.

All geometry is exact.  A tiling stores its coordinates as integer numerators
over two common denominators ``dx`` and ``dy`` (one per axis), which keeps
every comparison exact while letting the hot paths stay vectorised.  Tilings
whose tiles are arranged in vertical columns of equal-height tiles (every
family built from :func:`make_column_tiling`) additionally keep a compact
column description, so that coordinates of very large powers are only
materialised when somebody asks for them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

Rational = Fraction

_INT64_SAFE = 2**62


class TilingError(ValueError):
    """Raised for invalid tilings or operands that violate a precondition."""


@dataclass(frozen=True)
class Tile:
    """Axis-parallel closed rectangle ``p + [0, ell1] x [0, ell2]``."""

    p: tuple[Fraction, Fraction]
    ell1: Fraction
    ell2: Fraction
    id: int = -1

    def __post_init__(self):
        object.__setattr__(self, "p", (Fraction(self.p[0]), Fraction(self.p[1])))
        object.__setattr__(self, "ell1", Fraction(self.ell1))
        object.__setattr__(self, "ell2", Fraction(self.ell2))
        if self.ell1 <= 0 or self.ell2 <= 0:
            raise TilingError(f"tile sides must be positive, got {self.ell1}, {self.ell2}")

    @property
    def x1(self) -> Fraction:
        return self.p[0] + self.ell1

    @property
    def y1(self) -> Fraction:
        return self.p[1] + self.ell2

    def side(self, i: int) -> Fraction:
        return self.ell1 if i == 1 else self.ell2

    def key(self):
        return (self.p[0], self.p[1], self.ell1, self.ell2)


@dataclass(frozen=True)
class ColumnSpec:
    """Column heights ``<gamma_1, ..., gamma_b>`` of a column tiling."""

    gamma: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "gamma", tuple(int(g) for g in self.gamma))
        if not self.gamma:
            raise TilingError("column spec must be non-empty")
        if any(g <= 0 for g in self.gamma):
            raise TilingError(f"column heights must be positive: {self.gamma}")

    @property
    def b(self) -> int:
        return len(self.gamma)

    @property
    def size(self) -> int:
        return sum(self.gamma)

    @property
    def Gamma(self) -> Fraction:
        return sum((Fraction(1, g) for g in self.gamma), Fraction(0))

    def violations(self) -> list[str]:
        """Standing assumptions of the column families that this spec breaks."""
        out = []
        if min(self.gamma) != self.b:
            out.append(f"min(gamma) = {min(self.gamma)} != b = {self.b}")
        if self.gamma[0] != self.gamma[-1]:
            out.append(f"gamma_1 = {self.gamma[0]} != gamma_b = {self.gamma[-1]}")
        return out


def gamma_bk(b: int, k: int) -> ColumnSpec:
    """The column spec of ``T_(b,k)``: length ``b``, total ``b*k``."""
    if b < 4 or k < b:
        raise TilingError(f"need k >= b >= 4, got b={b}, k={k}")
    q, m = divmod(k - 3, b - 3)
    hi = -(-(k - 3) // (b - 3))
    gamma = [b] + [hi * b] * m + [b] + [q * b] * (b - 3 - m) + [b]
    return ColumnSpec(tuple(gamma))


@dataclass(frozen=True)
class FamilyParams:
    """Exponents attached to the ``(b, k)`` family."""

    b: int
    k: int
    gamma: ColumnSpec = field(init=False)
    Gamma: Fraction = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "gamma", gamma_bk(self.b, self.k))
        object.__setattr__(self, "Gamma", self.gamma.Gamma)

    @property
    def d_g(self) -> float:
        return math.log(self.b * self.k, self.b)

    @property
    def d_w(self) -> float:
        return self.d_g + math.log(self.Gamma, self.b)

    @property
    def resistance_exponent(self) -> float:
        """``log_b(Gamma)``, the annulus-resistance decay exponent."""
        return math.log(self.Gamma, self.b)


# ---------------------------------------------------------------------------
# integer array helpers


def _lcm(*values: int) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)


def _dtype_for(bound: int):
    return np.int64 if bound < _INT64_SAFE else object


def _to(arr, dtype) -> np.ndarray:
    if dtype is object:
        return np.array([int(v) for v in np.asarray(arr).ravel()], dtype=object)
    return np.asarray(arr, dtype=np.int64)


def _gcd_all(arrays: Iterable[np.ndarray], start: int) -> int:
    g = start
    for a in arrays:
        if len(a) == 0:
            continue
        if a.dtype == object:
            g = reduce(math.gcd, (int(v) for v in a), g)
        else:
            g = math.gcd(g, int(np.gcd.reduce(np.abs(a))))
        if g == 1:
            return 1
    return g


def _max_abs(a: np.ndarray) -> int:
    if len(a) == 0:
        return 0
    if a.dtype == object:
        return max(abs(int(v)) for v in a)
    return int(np.max(np.abs(a)))


@dataclass
class _Columns:
    """Uniform column structure: column ``c`` has ``counts[c]`` equal tiles."""

    widths: np.ndarray  # int numerators over dx
    dx: int
    counts: np.ndarray  # int64


class Tiling:
    """A finite collection of interior-disjoint tiles whose union is a rectangle.

    Tiles are indexed densely in lexicographic order of their bottom-left
    corner ``(p_x, p_y)``.  Build instances with the module level
    constructors rather than calling ``__init__`` directly.
    """

    def __init__(self, region: Tile, *, coords=None, columns: _Columns | None = None,
                 validate: bool = True):
        if coords is None and columns is None:
            raise TilingError("a tiling needs coordinates or a column structure")
        self.region = Tile(region.p, region.ell1, region.ell2, -1)
        self._coords = coords
        self._cols = columns
        if validate:
            self.validate()

    # -- basic queries -------------------------------------------------------

    def __len__(self) -> int:
        if self._cols is not None:
            return int(self._cols.counts.sum())
        return len(self._coords[0])

    @property
    def n_tiles(self) -> int:
        return len(self)

    @property
    def kind(self) -> str:
        r = self.region
        if r.p == (0, 0) and r.ell1 == 1 and r.ell2 == 1:
            return "unit-square"
        return "general-rectangle"

    @property
    def is_unit_square(self) -> bool:
        return self.kind == "unit-square"

    @property
    def has_uniform_columns(self) -> bool:
        return self._cols is not None

    def __repr__(self):
        return f"Tiling(n_tiles={len(self)}, region={self.region.p}+[{self.region.ell1}x{self.region.ell2}])"

    def coords(self):
        """Return ``(X, Y, W, H, dx, dy)``: exact integer numerators and denominators."""
        if self._coords is None:
            self._coords = self._materialise()
        return self._coords

    def tile(self, i: int) -> Tile:
        X, Y, W, H, dx, dy = self.coords()
        return Tile((Fraction(int(X[i]), dx), Fraction(int(Y[i]), dy)),
                    Fraction(int(W[i]), dx), Fraction(int(H[i]), dy), int(i))

    @property
    def tiles(self) -> list[Tile]:
        return [self.tile(i) for i in range(len(self))]

    def float_coords(self) -> np.ndarray:
        """``(n, 4)`` float array of ``x, y, w, h`` for plotting and statistics."""
        X, Y, W, H, dx, dy = self.coords()
        out = np.empty((len(X), 4))
        for j, (a, d) in enumerate(((X, dx), (Y, dy), (W, dx), (H, dy))):
            out[:, j] = np.asarray(a, dtype=float) / d
        return out

    def __eq__(self, other):
        if not isinstance(other, Tiling):
            return NotImplemented
        if self.region.key() != other.region.key() or len(self) != len(other):
            return False
        a, b = self.coords(), other.coords()
        if a[4:] != b[4:]:
            return False
        return all(np.array_equal(u, v) for u, v in zip(a[:4], b[:4]))

    __hash__ = None

    # -- column structure ----------------------------------------------------

    @property
    def n_columns(self) -> int:
        return len(self.column_offsets()) - 1

    def column_counts(self) -> np.ndarray:
        """Tiles per column, left to right (requires uniform columns)."""
        cols = self._uniform_columns()
        return cols.counts

    def column_offsets(self) -> np.ndarray:
        """Offsets ``o`` with column ``c`` made of tile ids ``o[c]:o[c+1]``.

        Works for every columnar tiling (all tiles of a vertical strip share
        the strip as their horizontal extent); raises otherwise.
        """
        if self._cols is not None:
            return np.concatenate([[0], np.cumsum(self._cols.counts)]).astype(np.int64)
        offsets = self._detect_column_offsets()
        if offsets is None:
            raise TilingError("tiling is not columnar")
        return offsets

    def _detect_column_offsets(self):
        X, Y, W, H, dx, dy = self.coords()
        n = len(X)
        if n == 0:
            return None
        starts = np.flatnonzero(np.r_[True, X[1:] != X[:-1]])
        ends = np.r_[starts[1:], n]
        x_end = Fraction(self.region.x1) * dx
        total = int(self.region.ell2 * dy)
        for s, e in zip(starts, ends):
            if np.any(W[s:e] != W[s]):
                return None
            right = X[s] + W[s]
            nxt = X[e] if e < n else x_end
            if right != nxt:
                return None
            if sum(int(v) for v in H[s:e]) != total:
                return None
        return np.r_[starts, n].astype(np.int64)

    def _uniform_columns(self) -> _Columns:
        if self._cols is not None:
            return self._cols
        offsets = self.column_offsets()
        X, Y, W, H, dx, dy = self.coords()
        for s, e in zip(offsets[:-1], offsets[1:]):
            if np.any(H[s:e] != H[s]):
                raise TilingError("columns do not consist of equal-height tiles")
        widths = _to([W[s] for s in offsets[:-1]], W.dtype)
        return _Columns(widths, dx, np.diff(offsets).astype(np.int64))

    def column_of(self) -> np.ndarray:
        """Column index of every tile."""
        offsets = self.column_offsets()
        return np.repeat(np.arange(len(offsets) - 1), np.diff(offsets))

    # -- validation ----------------------------------------------------------

    def validate(self) -> "Tiling":
        """Exact check that the tiles partition the region; returns ``self``."""
        if self._cols is not None and self._coords is None:
            c = self._cols
            if len(c.counts) == 0 or np.any(c.counts <= 0) or np.any(np.asarray(c.widths) <= 0):
                raise TilingError("column tiling needs positive widths and counts")
            if Fraction(sum(int(w) for w in c.widths), c.dx) != self.region.ell1:
                raise TilingError("column widths do not sum to the region width")
            return self
        X, Y, W, H, dx, dy = self.coords()
        if len(X) == 0:
            raise TilingError("empty tiling")
        if np.any(W <= 0) or np.any(H <= 0):
            raise TilingError("tile sides must be positive")
        rx0, ry0 = self.region.p[0] * dx, self.region.p[1] * dy
        rx1, ry1 = self.region.x1 * dx, self.region.y1 * dy
        if any(v.denominator != 1 for v in (rx0, ry0, rx1, ry1)):
            raise TilingError("region is not on the coordinate grid")
        rx0, ry0, rx1, ry1 = (int(v) for v in (rx0, ry0, rx1, ry1))
        if (np.any(X < rx0) or np.any(Y < ry0) or np.any(X + W > rx1)
                or np.any(Y + H > ry1)):
            raise TilingError("tile outside region")
        if W.dtype == object or _max_abs(W) * _max_abs(H) * len(W) >= _INT64_SAFE:
            area = sum(int(w) * int(h) for w, h in zip(W, H))
        else:
            area = int(np.sum(W * H))
        if area != (rx1 - rx0) * (ry1 - ry0):
            raise TilingError(f"area identity fails: tiles cover {area}, region {(rx1 - rx0) * (ry1 - ry0)}")
        if int(np.min(X)) != rx0:
            raise TilingError("left edge of the region is not covered")
        self._sweep_coverage(X, Y, W, H, rx1, ry0, ry1)
        return self

    @staticmethod
    def _sweep_coverage(X, Y, W, H, rx1, ry0, ry1):
        # Every vertical slab between consecutive distinct x-coordinates must
        # be covered by a gap-free, overlap-free stack of active tiles.
        xs = np.unique(np.concatenate([X, X + W]))
        xs = xs[xs < rx1]
        lo = np.searchsorted(xs, X)
        hi = np.searchsorted(xs, X + W)
        span = hi - lo
        tile_idx = np.repeat(np.arange(len(X)), span)
        slab = np.repeat(lo, span) + (np.arange(len(tile_idx)) - np.repeat(np.cumsum(span) - span, span))
        order = np.lexsort((Y[tile_idx], slab))
        slab, tile_idx = slab[order], tile_idx[order]
        y0, y1 = Y[tile_idx], Y[tile_idx] + H[tile_idx]
        first = np.r_[True, slab[1:] != slab[:-1]]
        last = np.r_[slab[1:] != slab[:-1], True]
        if len(np.unique(slab)) != len(xs):
            raise TilingError("some vertical slab is not covered")
        if np.any(y0[first] != ry0) or np.any(y1[last] != ry1):
            raise TilingError("a vertical slab is not covered from bottom to top")
        inner = ~first
        if np.any(y0[inner] != y1[np.flatnonzero(inner) - 1]):
            raise TilingError("tiles overlap or leave a gap")

    # -- materialise the column form -----------------------------------------

    def _materialise(self):
        c = self._cols
        r = self.region
        H = r.ell2
        counts = c.counts
        heights = [H / int(h) for h in counts]
        dy = _lcm(r.p[1].denominator, *{h.denominator for h in heights})
        dx = _lcm(c.dx, r.p[0].denominator)
        sx = dx // c.dx
        n = int(counts.sum())
        bound = max(abs(r.x1) * dx, abs(r.y1) * dy, abs(r.p[0]) * dx, abs(r.p[1]) * dy) + 1
        dtype = _dtype_for(int(bound))
        widths = np.array([int(w) * sx for w in c.widths], dtype=dtype)
        x_starts = np.concatenate([[0], np.cumsum(widths)[:-1]]).astype(dtype) + int(r.p[0] * dx)
        col = np.repeat(np.arange(len(counts)), counts)
        row = np.arange(n) - np.repeat(np.cumsum(counts) - counts, counts)
        hnum = np.array([int(h * dy) for h in heights], dtype=dtype)
        X = x_starts[col]
        W = widths[col]
        Hh = hnum[col]
        Y = _to(row, dtype) * Hh + int(r.p[1] * dy)
        return (_to(X, dtype), _to(Y, dtype), _to(W, dtype), _to(Hh, dtype), dx, dy)


# ---------------------------------------------------------------------------
# constructors


def _from_arrays(X, Y, W, H, dx: int, dy: int, region: Tile, validate=True, return_perm=False):
    dtype = object if object in (X.dtype, Y.dtype, W.dtype, H.dtype) else np.int64
    X, Y, W, H = (_to(a, dtype) if a.dtype != dtype else a for a in (X, Y, W, H))
    gx = _gcd_all([X, W], dx)
    gy = _gcd_all([Y, H], dy)
    for v in (region.p[0] * dx, region.ell1 * dx):
        gx = math.gcd(gx, int(v))
    for v in (region.p[1] * dy, region.ell2 * dy):
        gy = math.gcd(gy, int(v))
    if gx > 1:
        X, W, dx = X // gx, W // gx, dx // gx
    if gy > 1:
        Y, H, dy = Y // gy, H // gy, dy // gy
    if dtype is object and max(_max_abs(X + W), _max_abs(Y + H)) < _INT64_SAFE:
        X, Y, W, H = (a.astype(np.int64) for a in (X, Y, W, H))
    perm = np.lexsort((Y, X)) if X.dtype != object else np.array(
        sorted(range(len(X)), key=lambda i: (X[i], Y[i])), dtype=np.int64)
    X, Y, W, H = X[perm], Y[perm], W[perm], H[perm]
    t = Tiling(region, coords=(X, Y, W, H, dx, dy), validate=validate)
    if return_perm:
        return t, perm
    return t


def from_tiles(tiles: Sequence[Tile], region: Tile | None = None, validate: bool = True) -> Tiling:
    """Build a tiling from explicit tiles (ids are reassigned canonically)."""
    tiles = list(tiles)
    if not tiles:
        raise TilingError("empty tiling")
    if region is None:
        x0 = min(t.p[0] for t in tiles)
        y0 = min(t.p[1] for t in tiles)
        x1 = max(t.x1 for t in tiles)
        y1 = max(t.y1 for t in tiles)
        region = Tile((x0, y0), x1 - x0, y1 - y0)
    dx = _lcm(*(v.denominator for t in tiles for v in (t.p[0], t.ell1)),
              region.p[0].denominator, region.ell1.denominator)
    dy = _lcm(*(v.denominator for t in tiles for v in (t.p[1], t.ell2)),
              region.p[1].denominator, region.ell2.denominator)
    bound = max(max(abs(t.x1), abs(t.p[0])) * dx for t in tiles) + max(abs(t.y1) * dy for t in tiles)
    dtype = _dtype_for(int(bound) + 1)
    X = _to([int(t.p[0] * dx) for t in tiles], dtype)
    Y = _to([int(t.p[1] * dy) for t in tiles], dtype)
    W = _to([int(t.ell1 * dx) for t in tiles], dtype)
    H = _to([int(t.ell2 * dy) for t in tiles], dtype)
    return _from_arrays(X, Y, W, H, dx, dy, region, validate=validate)


def unit_tiling() -> Tiling:
    """The single-tile tiling ``I = {[0,1]^2}``."""
    return make_column_tiling(ColumnSpec((1,)))


def make_column_tiling(spec: ColumnSpec | Sequence[int]) -> Tiling:
    """``T_gamma``: ``b`` columns of width ``1/b``, column ``i`` split into ``gamma_i`` tiles."""
    if not isinstance(spec, ColumnSpec):
        spec = ColumnSpec(tuple(spec))
    b = spec.b
    cols = _Columns(np.ones(b, dtype=np.int64), b, np.array(spec.gamma, dtype=np.int64))
    return Tiling(Tile((0, 0), 1, 1), columns=cols)


def _require_unit(t: Tiling, name: str):
    if not t.is_unit_square:
        raise TilingError(f"{name} must tile the unit square, got region {t.region}")


def product(s: Tiling, t: Tiling, validate: bool = True) -> Tiling:
    """Tiling product ``s o t``: every tile of ``s`` replaced by a scaled copy of ``t``."""
    _require_unit(s, "left operand")
    _require_unit(t, "right operand")
    if s._cols is not None and t._cols is not None:
        a, b = s._cols, t._cols
        widths = np.multiply.outer(np.asarray(a.widths, dtype=object),
                                   np.asarray(b.widths, dtype=object)).ravel()
        dx = a.dx * b.dx
        g = reduce(math.gcd, (int(w) for w in widths), dx)
        widths = _to([int(w) // g for w in widths], _dtype_for(dx // g))
        counts = np.multiply.outer(a.counts, b.counts).ravel().astype(np.int64)
        return Tiling(Tile((0, 0), 1, 1), columns=_Columns(widths, dx // g, counts), validate=validate)
    return _coord_product(s, t, validate=validate)[0]


def _coord_product(s: Tiling, t: Tiling, validate=True):
    XA, YA, WA, HA, dxA, dyA = s.coords()
    XB, YB, WB, HB, dxB, dyB = t.coords()
    dx, dy = dxA * dxB, dyA * dyB
    dtype = _dtype_for(2 * max(dx, dy))
    XA, YA, WA, HA = (_to(v, dtype) for v in (XA, YA, WA, HA))
    XB, YB, WB, HB = (_to(v, dtype) for v in (XB, YB, WB, HB))
    X = (np.multiply.outer(XA * dxB, np.ones(len(XB), dtype=dtype)) + np.multiply.outer(WA, XB)).ravel()
    Y = (np.multiply.outer(YA * dyB, np.ones(len(YB), dtype=dtype)) + np.multiply.outer(HA, YB)).ravel()
    W = np.multiply.outer(WA, WB).ravel()
    H = np.multiply.outer(HA, HB).ravel()
    return _from_arrays(X, Y, W, H, dx, dy, Tile((0, 0), 1, 1), validate=validate, return_perm=True)


def product_index(s: Tiling, t: Tiling) -> np.ndarray:
    """``idx[a, b]`` = id in ``s o t`` of the copy of tile ``b`` of ``t`` inside tile ``a`` of ``s``."""
    _require_unit(s, "left operand")
    _require_unit(t, "right operand")
    if s._cols is not None and t._cols is not None:
        bt = len(t._cols.counts)
        col_s, col_t = s.column_of(), t.column_of()
        off_s, off_t = s.column_offsets(), t.column_offsets()
        row_s = np.arange(len(s)) - off_s[col_s]
        row_t = np.arange(len(t)) - off_t[col_t]
        counts = np.multiply.outer(s._cols.counts, t._cols.counts).ravel()
        off = np.concatenate([[0], np.cumsum(counts)])
        col = col_s[:, None] * bt + col_t[None, :]
        row = row_s[:, None] * t._cols.counts[col_t][None, :] + row_t[None, :]
        return (off[col] + row).astype(np.int64)
    _, perm = _coord_product(s, t, validate=False)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm))
    return inv.reshape(len(s), len(t))


def power(t: Tiling, n: int, validate: bool = True) -> Tiling:
    """``t^n`` by iterated product; ``t^0 = I``."""
    if n < 0:
        raise TilingError(f"power needs n >= 0, got {n}")
    _require_unit(t, "base")
    out = unit_tiling()
    for _ in range(n):
        out = product(out, t, validate=validate)
    return out


def _shifted_coords(t: Tiling, shift_x: Fraction, shift_y: Fraction, dx: int, dy: int):
    X, Y, W, H, tdx, tdy = t.coords()
    sx, sy = dx // tdx, dy // tdy
    ox, oy = shift_x * dx, shift_y * dy
    return [X.astype(object) * sx + int(ox), Y.astype(object) * sy + int(oy),
            W.astype(object) * sx, H.astype(object) * sy]


def _join(parts: list[tuple[Tiling, Fraction, Fraction]], region: Tile, validate: bool) -> Tiling:
    """Union of translated tilings, exactly, on a common grid."""
    dx = _lcm(*(t.coords()[4] for t, _, _ in parts), *(sx.denominator for _, sx, _ in parts),
              region.p[0].denominator)
    dy = _lcm(*(t.coords()[5] for t, _, _ in parts), *(sy.denominator for _, _, sy in parts),
              region.p[1].denominator)
    arrays = [_shifted_coords(t, sx, sy, dx, dy) for t, sx, sy in parts]
    X, Y, W, H = (np.concatenate([a[j] for a in arrays]) for j in range(4))
    return _from_arrays(X, Y, W, H, dx, dy, region, validate=validate)


def concat(s: Tiling, t: Tiling, validate: bool = True) -> Tiling:
    """``s | t``: ``t`` translated so its left edge meets the right edge of ``s``."""
    rs, rt = s.region, t.region
    if rs.ell2 != rt.ell2:
        raise TilingError(f"concatenation needs equal heights, got {rs.ell2} and {rt.ell2}")
    region = Tile(rs.p, rs.ell1 + rt.ell1, rs.ell2)
    if s._cols is not None and t._cols is not None:
        a, b = s._cols, t._cols
        dx = _lcm(a.dx, b.dx)
        widths = [int(w) * (dx // a.dx) for w in a.widths] + [int(w) * (dx // b.dx) for w in b.widths]
        cols = _Columns(_to(widths, _dtype_for(max(widths) + 1)), dx,
                        np.concatenate([a.counts, b.counts]).astype(np.int64))
        return Tiling(region, columns=cols, validate=validate)
    return _join([(s, Fraction(0), Fraction(0)), (t, rs.x1 - rt.p[0], rs.p[1] - rt.p[1])],
                 region, validate)


def concat_all(tilings: Sequence[Tiling], validate: bool = True) -> Tiling:
    out = tilings[0]
    for t in tilings[1:]:
        out = concat(out, t, validate=validate)
    return out


def stack(t: Tiling, m: int, validate: bool = True) -> Tiling:
    """``m`` copies of ``t`` stacked vertically."""
    if m < 1:
        raise TilingError(f"stack needs m >= 1, got {m}")
    r = t.region
    region = Tile(r.p, r.ell1, r.ell2 * m)
    if t._cols is not None:
        c = t._cols
        return Tiling(region, columns=_Columns(c.widths.copy(), c.dx, c.counts * m), validate=validate)
    return _join([(t, Fraction(0), r.ell2 * j) for j in range(m)], region, validate)


def tower(t: Tiling, n: int, validate: bool = True) -> Tiling:
    """``t^0 | t^1 | ... | t^n``, the finite approximant of the one-ended limit."""
    return concat_all([power(t, j, validate=validate) for j in range(n + 1)], validate=validate)


def mixed_power_for_degree(d: float, n: int) -> tuple[Tiling, list[int]]:
    """Mixed product ``T_(4,4+h_n) o ... o T_(4,4+h_1)`` targeting growth degree ``d``.

    Each ``h_j`` is the largest integer keeping
    ``sum_{i<=j} log_4(1 + h_i/4) <= (d - 2) j``.
    """
    if d <= 2:
        raise TilingError(f"target degree must exceed 2, got {d}")
    if n < 1:
        raise TilingError(f"need n >= 1, got {n}")
    hs: list[int] = []
    used = 0.0
    for j in range(1, n + 1):
        budget = (d - 2) * j - used
        h = max(0, math.floor(4 * (4**budget - 1)))
        while h > 0 and used + math.log(1 + h / 4, 4) > (d - 2) * j:
            h -= 1
        while used + math.log(1 + (h + 1) / 4, 4) <= (d - 2) * j:
            h += 1
        hs.append(h)
        used += math.log(1 + h / 4, 4)
    out = unit_tiling()
    for h in hs:
        out = product(make_column_tiling(gamma_bk(4, 4 + h)), out)
    return out, hs


# ---------------------------------------------------------------------------
# statistics


@dataclass(frozen=True)
class BoundarySets:
    left: np.ndarray
    right: np.ndarray
    boundary: np.ndarray

    @property
    def nondegenerate(self) -> bool:
        return len(np.intersect1d(self.left, self.right)) == 0


def boundary_sets(t: Tiling) -> BoundarySets:
    """Tiles meeting the left edge, the right edge, and any side of the region."""
    if t._cols is not None and t._coords is None:
        off = t.column_offsets()
        left = np.arange(off[0], off[1])
        right = np.arange(off[-2], off[-1])
        rows = np.unique(np.concatenate([off[:-1], off[1:] - 1]))
        boundary = np.unique(np.concatenate([left, right, rows]))
        return BoundarySets(left, right, boundary)
    X, Y, W, H, dx, dy = t.coords()
    r = t.region
    x0, x1 = int(r.p[0] * dx), int(r.x1 * dx)
    y0, y1 = int(r.p[1] * dy), int(r.y1 * dy)
    left = np.flatnonzero(X == x0)
    right = np.flatnonzero(X + W == x1)
    bnd = np.flatnonzero((X == x0) | (X + W == x1) | (Y == y0) | (Y + H == y1))
    return BoundarySets(left, right, bnd)


def max_side(t: Tiling) -> Fraction:
    """Largest side length over all tiles."""
    if t._cols is not None:
        c = t._cols
        w = max(Fraction(int(v), c.dx) for v in c.widths)
        h = t.region.ell2 / int(c.counts.min())
        return max(w, h)
    X, Y, W, H, dx, dy = t.coords()
    return max(Fraction(_max_abs(W), dx), Fraction(_max_abs(H), dy))


def alpha(t: Tiling, graph=None) -> Fraction:
    """Largest side ratio ``l_j(A) / l_j(B)`` over dual-graph neighbours ``A, B``."""
    if len(t) == 1:
        return Fraction(1)
    if t._cols is not None:
        c = t._cols
        best = Fraction(1)
        w = [Fraction(int(v), c.dx) for v in c.widths]
        h = [t.region.ell2 / int(v) for v in c.counts]
        for i in range(len(w) - 1):
            best = max(best, w[i] / w[i + 1], w[i + 1] / w[i], h[i] / h[i + 1], h[i + 1] / h[i])
        return best
    from .dual import build_dual

    g = graph if graph is not None else build_dual(t)
    X, Y, W, H, dx, dy = t.coords()
    src = np.repeat(np.arange(g.n), np.diff(g.indptr))
    dst = g.indices
    best = Fraction(1)
    for A, B in ((W[src], W[dst]), (H[src], H[dst])):
        pairs = {(int(a), int(b)) for a, b in zip(A, B)}
        best = max(best, max(Fraction(a, b) for a, b in pairs))
    return best
