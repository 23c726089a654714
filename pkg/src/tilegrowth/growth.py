"""Ball volumes, diameters and growth-exponent estimates."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .dual import build_dual
from .estimators import PowerLawFit
from .tiling import (Tiling, TilingError, alpha, boundary_sets, make_column_tiling, max_side,
                     power, product, product_index, tower, ColumnSpec, gamma_bk)
from .traversal import BFS, bfs_levels

SMALL_GRAPH = 4096


def ball(g, v: int, r: int) -> np.ndarray:
    """Sorted vertex ids at graph distance at most ``r`` from ``v``."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    return np.sort(np.concatenate(bfs_levels(g, [v], max_depth=r)))


def ball_sizes(bfs: BFS, v: int, radii) -> np.ndarray:
    """``|B(v, r)|`` for every r in ``radii`` from one truncated search."""
    radii = np.asarray(radii, dtype=np.int64)
    levels = bfs.run([v], max_depth=int(radii.max()))
    cum = np.cumsum([len(lv) for lv in levels])
    return cum[np.minimum(radii, len(cum) - 1)]


@dataclass
class Diameter:
    lower: int
    upper: int
    n_bfs: int

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    @property
    def value(self) -> int:
        if not self.exact:
            raise ValueError(f"diameter only bracketed: [{self.lower}, {self.upper}]")
        return self.lower


def diameter(g, max_bfs: int = 5000) -> Diameter:
    """Exact diameter by eccentricity bounding.

    Every BFS from a vertex ``v`` tightens per-vertex bounds
    ``max(d(v,w), ecc(v) - d(v,w)) <= ecc(w) <= ecc(v) + d(v,w)``; vertices
    that can no longer change the answer are dropped.  Sources alternate
    between the largest upper bound and the smallest lower bound.  If
    ``max_bfs`` searches do not close the gap, the bracket is returned.
    """
    n = g.n
    if n <= 1:
        return Diameter(0, 0, 0)
    bfs = BFS(g)
    lo = np.zeros(n, dtype=np.int64)
    hi = np.full(n, np.iinfo(np.int64).max // 4, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    d_lo, d_hi = 0, int(hi[0])
    count = 0
    pick_high = True
    v = int(np.argmax(g.degrees))
    while active.any():
        if count >= max_bfs:
            return Diameter(d_lo, d_hi, count)
        bfs.run([v])
        count += 1
        dist = bfs.dist.astype(np.int64)
        ecc = int(dist.max())
        d_lo = max(d_lo, ecc)
        np.maximum(lo, np.maximum(dist, ecc - dist), out=lo)
        np.minimum(hi, ecc + dist, out=hi)
        d_hi = min(d_hi, int(hi.max()))
        d_lo = max(d_lo, int(lo.max()))
        active[v] = False
        # w cannot exceed d_lo, and (d_hi <= 2 lo(w)) it cannot lower the upper bound
        active &= ~((hi <= d_lo) & (2 * lo >= d_hi))
        active &= lo != hi
        if d_lo >= d_hi or not active.any():
            break
        cand = np.flatnonzero(active)
        if pick_high:
            v = int(cand[np.argmax(hi[cand])])
        else:
            v = int(cand[np.argmin(lo[cand])])
        pick_high = not pick_high
    d_hi = min(d_hi, int(hi.max()))
    return Diameter(d_lo, max(d_lo, d_hi), count)


def sample_sources(g, n_uniform=64, n_biased=64, seed=0) -> np.ndarray:
    """All vertices for small graphs, else uniform plus degree-biased draws."""
    if g.n <= SMALL_GRAPH:
        return np.arange(g.n)
    rng = np.random.Generator(np.random.Philox(seed))
    uni = rng.integers(0, g.n, size=n_uniform)
    deg = g.degrees.astype(np.float64)
    cdf = np.cumsum(deg)
    biased = np.searchsorted(cdf, rng.random(n_biased) * cdf[-1], side="right")
    return np.concatenate([uni, biased])


def geometric_radii(b: int, r_max: int, r_min: int = 1) -> list[int]:
    out, r = [], r_min
    while r <= r_max:
        out.append(r)
        r *= b
    return out


@dataclass
class GrowthProfile:
    """Per-radius ball statistics over a set of sources and the fitted power law."""

    sources: list
    radii: list
    min: list
    median: list
    max: list
    mean: list
    exponent: float
    residual: float
    c: float
    C: float
    sizes: np.ndarray = field(repr=False, default=None)

    def to_dict(self):
        d = asdict(self)
        d.pop("sizes")
        return d

    def rows(self):
        """``(source, r, ball_size)`` rows."""
        for i, s in enumerate(self.sources):
            for j, r in enumerate(self.radii):
                yield int(s), int(r), int(self.sizes[i, j])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["source", "r", "ball_size"])
        w.writerows(self.rows())
        return buf.getvalue()


def growth_profile(g, sources=None, radii=None, seed=0, statistic="median") -> GrowthProfile:
    """Ball sizes around ``sources`` on a radius grid, with a log-log fit.

    ``statistic`` picks which per-radius summary is fitted (median or mean).
    """
    if sources is None:
        sources = sample_sources(g, seed=seed)
    sources = np.asarray(sources, dtype=np.int64)
    if radii is None:
        raise ValueError("radius grid required")
    radii = np.asarray(sorted(set(int(r) for r in radii)), dtype=np.int64)
    if len(radii) < 2 or radii[0] < 1:
        raise ValueError("degenerate radius grid: need >= 2 positive radii")
    bfs = BFS(g)
    sizes = np.array([ball_sizes(bfs, int(s), radii) for s in sources], dtype=np.int64)
    med = np.median(sizes, axis=0)
    mean = sizes.mean(axis=0)
    y = med if statistic == "median" else mean
    fit = PowerLawFit().fit(radii, y)
    return GrowthProfile(
        sources=[int(s) for s in sources], radii=[int(r) for r in radii],
        min=[int(v) for v in sizes.min(axis=0)], median=[float(v) for v in med],
        max=[int(v) for v in sizes.max(axis=0)], mean=[float(v) for v in mean],
        exponent=fit.exponent_, residual=fit.residual_, c=fit.c_, C=fit.C_, sizes=sizes,
    )


@dataclass
class CheckReport:
    name: str
    passed: bool
    details: dict

    def to_dict(self):
        return {"name": self.name, "passed": bool(self.passed), "details": self.details}


def _sample(n, samples, rng):
    if samples is None or samples >= n:
        return np.arange(n)
    return np.sort(rng.choice(n, size=samples, replace=False))


def growth_upper_bound_check(s: Tiling, t: Tiling, samples: int = 64, seed: int = 0) -> CheckReport:
    """Check ``|B(X, 1/(alpha_S^4 L_T))| <= 192 alpha_S^2 |T|`` in ``G(S o T)``."""
    st = product(s, t, validate=False)
    g = build_dual(st)
    a = alpha(s)
    radius_q = 1 / (a**4 * max_side(t))
    radius = math.floor(radius_q)
    bound = 192 * a**2 * len(t)
    rng = np.random.Generator(np.random.Philox(seed))
    xs = _sample(g.n, samples, rng)
    bfs = BFS(g)
    worst = 0
    for x in xs:
        worst = max(worst, int(ball_sizes(bfs, int(x), [radius])[0]))
    return CheckReport("growth_upper_bound", worst <= bound, {
        "radius": str(radius_q), "integer_radius": radius, "bound": str(bound),
        "max_ball": worst, "samples": len(xs), "alpha_S": str(a), "L_T": str(max_side(t)),
    })


def copy_ball_check(s: Tiling, t: Tiling, samples: int = 64, seed: int = 0) -> CheckReport:
    """Check ``|B(X, diam G(T))| >= |T|`` for sampled tiles X of ``S o T``."""
    st = product(s, t, validate=False)
    g = build_dual(st)
    dt = diameter(build_dual(t)) if len(t) > 1 else Diameter(0, 0, 0)
    r = dt.value
    rng = np.random.Generator(np.random.Philox(seed))
    xs = _sample(g.n, samples, rng)
    bfs = BFS(g)
    worst = min(int(ball_sizes(bfs, int(x), [r])[0]) for x in xs)
    return CheckReport("copy_ball", worst >= len(t), {
        "radius": r, "min_ball": worst, "T_size": len(t), "samples": len(xs)})


def diameter_bracket_check(family, n: int) -> CheckReport:
    """``b^n <= diam G(T_gamma^n) <= 3 b^n`` (for H: ``3^n <= diam <= 3^{n+1}``)."""
    spec = _family_spec(family)
    t = power(make_column_tiling(spec), n, validate=False)
    d = diameter(build_dual(t))
    b = spec.b
    ok = d.lower >= b**n and d.upper <= 3 * b**n
    return CheckReport("diameter_bracket", ok, {
        "n": n, "tiles": len(t), "lower": d.lower, "upper": d.upper,
        "bound_low": b**n, "bound_high": 3 * b**n, "n_bfs": d.n_bfs})


def _family_spec(family) -> ColumnSpec:
    if isinstance(family, ColumnSpec):
        return family
    if family in ("H", "h"):
        return ColumnSpec([3, 6, 3])
    b, k = family
    return gamma_bk(b, k)


def infinite_graph_growth_check(family, n: int, radii, block: int | None = None,
                                samples: int = 64, seed: int = 0) -> CheckReport:
    """Two-sided growth bounds on the approximant ``G(T^0 | ... | T^n)``.

    Sources are drawn from block ``block`` (default ``n // 2``) and every
    ball must stay clear of the right frontier ``R(T^0|...|T^n)`` so the
    finite graph agrees with the infinite limit on it.
    """
    spec = _family_spec(family)
    base = make_column_tiling(spec)
    t = tower(base, n, validate=False)
    g = build_dual(t)
    if block is None:
        block = n // 2
    starts = np.cumsum([0] + [len(base) ** j for j in range(n + 1)])
    lo, hi = int(starts[block]), int(starts[block + 1])
    rng = np.random.Generator(np.random.Philox(seed))
    xs = lo + _sample(hi - lo, samples, rng)
    radii = sorted(int(r) for r in radii)
    frontier = np.zeros(g.n, dtype=bool)
    frontier[boundary_sets(t).right] = True
    d = math.log(spec.size, spec.b)
    bfs = BFS(g)
    ratios = []
    for x in xs:
        levels = bfs.run([int(x)], max_depth=max(radii))
        cum = np.cumsum([len(lv) for lv in levels])
        for r in radii:
            visited = np.concatenate(levels[: r + 1])
            if frontier[visited].any():
                raise TilingError(f"radius {r} reaches the right frontier from tile {int(x)}")
            size = int(cum[min(r, len(cum) - 1)])
            if r >= 1:
                ratios.append(size / r**d)
            elif size != 1:
                return CheckReport("infinite_growth", False, {"r0_size": size})
    ratios = np.array(ratios)
    c, C = (float(ratios.min()), float(ratios.max())) if len(ratios) else (1.0, 1.0)
    return CheckReport("infinite_growth", bool(c > 0 and np.isfinite(C)), {
        "n": n, "block": block, "radii": radii, "exponent": d, "c": c, "C": C,
        "samples": len(xs)})
