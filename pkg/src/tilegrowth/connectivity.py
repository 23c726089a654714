"""Vertical convexity of balls and connectivity of ball complements on cylinders."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction
from math import lcm

import numpy as np
from scipy.sparse.csgraph import connected_components

from .traversal import BFS


@dataclass
class ColumnStatus:
    column: int
    status: str  # empty | arc | full | violation
    witness: dict | None = None


@dataclass
class ConvexityReport:
    center: int
    radius: int
    columns: list
    convex: bool

    def violations(self):
        return [c for c in self.columns if c.status == "violation"]

    def to_dict(self):
        return {"center": self.center, "radius": self.radius, "convex": self.convex,
                "violations": [asdict(c) for c in self.violations()]}


def column_arcs(rows, h: int, cyclic: bool = True):
    """Arcs ``(first, last)`` of a set of rows in a column of ``h`` tiles.

    On a cycle an arc may wrap, so ``first > last`` is possible.
    """
    rows = np.unique(np.asarray(rows, dtype=np.int64))
    if len(rows) == 0:
        return []
    if len(rows) == h:
        return [(0, h - 1)]
    inside = np.zeros(h, dtype=bool)
    inside[rows] = True
    if cyclic:
        # rotate so that row 0 of the rotation is outside the set
        gap = int(np.flatnonzero(~inside)[0])
        rot = np.roll(inside, -gap)
    else:
        gap, rot = 0, inside
    edges = np.diff(np.r_[0, rot.astype(np.int8), 0])
    s = np.flatnonzero(edges == 1)
    e = np.flatnonzero(edges == -1) - 1
    return [(int((a + gap) % h), int((b + gap) % h)) for a, b in zip(s, e)]


def _arc_starts(off, inside, members, cyclic):
    """Number of arcs per column of the vertex set ``members`` (``inside`` is its indicator)."""
    col = np.searchsorted(off, members, side="right") - 1
    first = off[col]
    prev = members - 1
    at_bottom = members == first
    if cyclic:
        prev = np.where(at_bottom, off[col + 1] - 1, prev)
        starts = ~inside[prev]
    else:
        starts = at_bottom | ~inside[np.maximum(prev, 0)]
    arcs = np.bincount(col[starts], minlength=len(off) - 1)
    sizes = np.bincount(col, minlength=len(off) - 1)
    return arcs, sizes


def _convexity(g, off, members, v, R, cyclic) -> ConvexityReport:
    members = np.unique(members)
    inside = np.zeros(g.n, dtype=bool)
    inside[members] = True
    arcs, sizes = _arc_starts(off, inside, members, cyclic)
    heights = np.diff(off)
    out, ok = [], True
    for c in range(len(off) - 1):
        if sizes[c] == 0:
            out.append(ColumnStatus(c, "empty"))
        elif sizes[c] == heights[c]:
            out.append(ColumnStatus(c, "full"))
        elif arcs[c] == 1:
            out.append(ColumnStatus(c, "arc"))
        else:
            ok = False
            h = int(heights[c])
            rows = members[(members >= off[c]) & (members < off[c + 1])] - off[c]
            found = column_arcs(rows, h, cyclic)
            (a0, a1), (b0, _) = found[0], found[1]
            out.append(ColumnStatus(c, "violation", {
                "in": [int(off[c] + a1), int(off[c] + b0)],
                "gap": [int(off[c] + (a1 + 1) % h), int(off[c] + (b0 - 1) % h)],
                "arcs": [[int(off[c] + x), int(off[c] + y)] for x, y in found]}))
    return ConvexityReport(int(v), int(R), out, ok)


def vertical_convexity_check(g, v: int, R: int, cyclic: bool | None = None,
                             bfs: BFS | None = None) -> ConvexityReport:
    """Every column meets ``B(v, R)`` in nothing or in one arc (cyclic on a cylinder)."""
    from .dual import CylindricalGraph

    if cyclic is None:
        cyclic = isinstance(g, CylindricalGraph)
    off = g.require_columns()
    bfs = bfs or BFS(g)
    ball = np.concatenate(bfs.run([v], max_depth=R))
    return _convexity(g, off, ball, v, R, cyclic)


def recheck_convexity_witness(g, v, R, witness) -> bool:
    """Independent confirmation with a fresh shortest-path computation: the witness
    tiles are in the ball and the two gap tiles separating them are not."""
    from scipy.sparse.csgraph import shortest_path

    d = shortest_path(g.adjacency(), unweighted=True, indices=[v])[0]
    inside = d <= R
    a, b = witness["in"]
    g0, g1 = witness["gap"]
    return bool(inside[a] and inside[b] and not inside[g0] and not inside[g1])


def complement_is_vertically_convex(g, v, R, bfs=None) -> bool:
    from .dual import CylindricalGraph

    off = g.require_columns()
    bfs = bfs or BFS(g)
    inball = np.zeros(g.n, dtype=bool)
    inball[np.concatenate(bfs.run([v], max_depth=R))] = True
    comp = np.flatnonzero(~inball)
    if len(comp) == 0:
        return True
    return _convexity(g, off, comp, v, R, isinstance(g, CylindricalGraph)).convex


@dataclass
class ComplementReport:
    center: int
    radius: int
    connected: bool
    in_guarantee: bool
    witness: list | None = None
    certificate: dict | None = None

    def to_dict(self):
        return asdict(self)


def guarantee_radius(g) -> Fraction:
    """The range ``R <= b^n / 3`` of the complement theorem, with ``b^n`` the column count."""
    return Fraction(len(g.require_columns()) - 1, 3)


class _Geometry:
    """Per-graph data reused across many complement queries."""

    def __init__(self, g):
        self.A = g.adjacency(np.int8).tocsr()
        self.off = g.require_columns()
        self.sizes = np.diff(self.off)
        self.D = lcm(*[int(h) for h in np.unique(self.sizes)])
        t = g.tiling
        if t is not None:
            from .tiling import boundary_sets

            X, Y, W, H, dx, dy = t.coords()
            self.Y = np.asarray(Y, dtype=object)
            self.H = np.asarray(H, dtype=object)
            self.dy = int(dy)
            self.y0 = int(t.region.p[1] * dy)
            bs = boundary_sets(t)
            self.left = set(np.asarray(bs.left).tolist())
            self.right = set(np.asarray(bs.right).tolist())


def _geometry(g) -> _Geometry:
    geo = getattr(g, "_geometry_cache", None)
    if geo is None:
        geo = _Geometry(g)
        g._geometry_cache = geo
    return geo


def _components(geo, mask):
    idx = np.flatnonzero(mask)
    k, lab = connected_components(geo.A[idx][:, idx], directed=False)
    return idx, k, lab


def ball_complement_connected(g, v: int, R: int, bfs: BFS | None = None,
                              certificate: bool = True) -> ComplementReport:
    """Is ``V \\ B(v, R)`` connected?  Disconnected answers carry two re-validated representatives."""
    bfs = bfs or BFS(g)
    ball = np.concatenate(bfs.run([v], max_depth=R))
    return _complement(g, v, R, ball, certificate)


def _complement(g, v, R, ball, certificate=True) -> ComplementReport:
    geo = _geometry(g)
    inball = np.zeros(g.n, dtype=bool)
    inball[ball] = True
    in_range = bool(R <= guarantee_radius(g))
    if inball.all():
        return ComplementReport(int(v), int(R), True, in_range)
    idx, k, lab = _components(geo, ~inball)
    witness = None
    if k > 1:
        a = int(idx[0])
        b = int(idx[np.flatnonzero(lab != lab[0])[0]])
        # re-validate with a masked BFS, independent of the component labelling
        reach = np.concatenate(BFS(g, mask=~inball).run([a]))
        if b in set(reach.tolist()):
            raise RuntimeError("complement witness failed independent re-validation")
        witness = [a, b]
    cert = None
    if certificate and g.tiling is not None:
        cert = horizontal_line_certificate(g, ball)
    return ComplementReport(int(v), int(R), k == 1, in_range, witness, cert)


def horizontal_line_certificate(g, ball) -> dict | None:
    """A height ``y`` whose row of tiles avoids ``ball`` and runs from the left edge to the right.

    Heights are kept exact by working in units of ``1/lcm(column sizes)``
    (all tiles of a column have equal height).  ``y`` is taken at the middle
    of a free unit, so it never sits on a tile boundary.  Returns ``None``
    when no such line exists.
    """
    geo = _geometry(g)
    off, sizes, D = geo.off, geo.sizes, geo.D
    ball = np.asarray(ball)
    col = np.searchsorted(off, ball, side="right") - 1
    rows = ball - off[col]
    scale = D // sizes[col]
    # mark the units [r*s, (r+1)*s) covered by each ball tile
    cover = np.zeros(D + 1, dtype=np.int64)
    np.add.at(cover, rows * scale, 1)
    np.add.at(cover, (rows + 1) * scale, -1)
    blocked = np.cumsum(cover[:-1]) > 0
    free = np.flatnonzero(~blocked)
    if len(free) == 0:
        return None
    unit = int(free[0])
    y = Fraction(2 * unit + 1, 2 * D)
    row_ids = off[:-1] + (unit * sizes) // D
    cert = {"height": f"{y.numerator}/{y.denominator}", "tiles": [int(t) for t in row_ids]}
    cert["valid"] = verify_line_certificate(g, ball, cert)
    return cert


def verify_line_certificate(g, ball, cert) -> bool:
    """Re-check a line certificate against the exact tile coordinates and the graph."""
    geo = _geometry(g)
    y = Fraction(cert["height"]) * geo.dy
    ids = cert["tiles"]
    inball = set(np.asarray(ball).tolist())
    if ids[0] not in geo.left or ids[-1] not in geo.right:
        return False
    for a in ids:
        lo = geo.Y[a]
        if not (lo < y < lo + geo.H[a]) or a in inball:
            return False
    for a, b in zip(ids, ids[1:]):
        if geo.A[a, b] == 0:
            return False
    return True


@dataclass
class ExhaustiveReport:
    graph: str
    centers: int
    radii: list
    convexity_violations: int
    complement_failures: int
    certificate_failures: int
    checks: int
    complement_convexity_failures: int = 0

    @property
    def passed(self) -> bool:
        return (self.convexity_violations == 0 and self.complement_failures == 0
                and self.certificate_failures == 0 and self.complement_convexity_failures == 0)

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def exhaustive_check(g, name: str = "", radii=None, centers=None) -> ExhaustiveReport:
    """All centers and all radii in the guaranteed range (``0..floor(b^n/3)``)."""
    from .dual import CylindricalGraph

    cyclic = isinstance(g, CylindricalGraph)
    if radii is None:
        radii = list(range(0, int(guarantee_radius(g)) + 1))
    centers = list(range(g.n)) if centers is None else list(centers)
    off = g.require_columns()
    bfs = BFS(g)
    conv = comp = cert = cconv = checks = 0
    for v in centers:
        levels = bfs.run([v], max_depth=max(radii))
        levels = [lv.copy() for lv in levels]
        for R in radii:
            checks += 1
            ball = np.concatenate(levels[: R + 1])
            if not _convexity(g, off, ball, v, R, cyclic).convex:
                conv += 1
            inball = np.zeros(g.n, dtype=bool)
            inball[ball] = True
            rest = np.flatnonzero(~inball)
            if len(rest) and not _convexity(g, off, rest, v, R, cyclic).convex:
                cconv += 1
            c = _complement(g, v, R, ball)
            if not c.connected:
                comp += 1
            if c.certificate is None or not c.certificate["valid"]:
                cert += 1
    return ExhaustiveReport(name, len(centers), list(radii), conv, comp, cert, checks, cconv)
