"""Monte Carlo random walks, speed exponents, projection and coupling checks."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .dual import CylindricalGraph, DualGraph, WeightedGraph, build_dual, column_neighbour_counts, linearize
from .estimators import PowerLawFit
from .tiling import FamilyParams, TilingError, boundary_sets, gamma_bk, make_column_tiling, power, product_index
from .traversal import BFS

BATCH = 512


def replica_generator(seed: int, replica: int) -> np.random.Generator:
    """Philox stream keyed by ``(master seed, replica index)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed) & (2**64 - 1), int(replica)])))


class _Sampler:
    """Per-vertex transition tables in CSR layout.

    Unweighted graphs step to a uniform neighbour.  Weighted graphs step to
    ``v`` with probability ``c_uv / c_u`` and stay put with ``c_uu / c_u``.
    """

    def __init__(self, g):
        if isinstance(g, WeightedGraph):
            A = g.adjacency().tocsr()
            A.sort_indices()
            n = g.n
            loops = g.self_loops.astype(np.float64)
            # put the self-loop as an extra entry at the end of each row
            deg = np.diff(A.indptr)
            rows = np.repeat(np.arange(n), deg)
            self.indptr = np.concatenate([[0], np.cumsum(deg + 1)]).astype(np.int64)
            self.targets = np.empty(self.indptr[-1], dtype=np.int64)
            w = np.empty(self.indptr[-1])
            pos = np.arange(len(A.indices)) + rows
            self.targets[pos] = A.indices
            w[pos] = A.data
            last = self.indptr[1:] - 1
            self.targets[last] = np.arange(n)
            w[last] = loops
            cw = np.cumsum(w)
            base = np.concatenate([[0.0], cw[last]])[:-1]
            total = cw[last] - base
            self.cum = (cw - np.repeat(base, deg + 1)) / np.repeat(total, deg + 1)
            self.weights = total
            self.weighted = True
            self.graph_indptr, self.graph_indices = A.indptr.astype(np.int64), A.indices
        else:
            self.indptr = g.indptr
            self.targets = g.indices
            self.weights = g.degrees.astype(np.float64)
            self.weighted = False
            self.graph_indptr, self.graph_indices = g.indptr, g.indices
        self.n = len(self.indptr) - 1
        self._cdf = np.cumsum(self.weights)

    def stationary(self, u):
        """Vertices drawn proportionally to degree (weighted: ``c_u``)."""
        return np.minimum(np.searchsorted(self._cdf, u * self._cdf[-1], side="right"), self.n - 1)

    def step(self, pos, u):
        start = self.indptr[pos]
        if not self.weighted:
            deg = self.indptr[pos + 1] - start
            k = np.minimum((u * deg).astype(np.int64), deg - 1)
            return self.targets[start + k].astype(np.int64)
        deg = self.indptr[pos + 1] - start
        # first entry whose cumulative probability exceeds u, searched per row
        k = np.zeros(len(pos), dtype=np.int64)
        dmax = int(deg.max())
        for j in range(dmax - 1):
            alive = j < deg - 1
            k += alive & (self.cum[start + np.minimum(j, deg - 1)] <= u)
        return self.targets[start + k].astype(np.int64)


@dataclass
class WalkExperiment:
    graph: object
    start: object = "stationary"  # "stationary" | "uniform" | vertex id
    times: list = field(default_factory=lambda: [4, 16, 64, 256, 1024, 4096])
    replicas: int = 1000
    seed: int = 0

    def __post_init__(self):
        t = [int(x) for x in self.times]
        if len(t) == 0 or any(b <= a for a, b in zip(t, t[1:])) or t[0] < 0:
            raise ValueError("time grid must be strictly increasing and nonnegative")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        self.times = t

    def config(self):
        return {"start": self.start if isinstance(self.start, str) else int(self.start),
                "times": self.times, "replicas": int(self.replicas), "seed": int(self.seed),
                "n": int(self.graph.n)}


@dataclass
class WalkStats:
    times: list
    mean: list
    stderr: list
    replicas: int
    exponent: float | None
    band: tuple | None
    target_dw: float | None = None
    target_dg: float | None = None
    projected_mean: list | None = None
    displacements: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self):
        d = asdict(self)
        d.pop("displacements")
        return d

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["T", "mean", "stderr", "replicas"])
        for T, m, s in zip(self.times, self.mean, self.stderr):
            w.writerow([T, repr(m), repr(s), self.replicas])
        return buf.getvalue()


def _displacement_bfs(bfs: BFS, start: int, ends: np.ndarray) -> np.ndarray:
    bfs.run([start], targets=ends)
    return bfs.dist[ends].astype(np.int64)


def _column_index(g):
    if isinstance(g, WeightedGraph) or g.column_offsets is None:
        return None
    return g.column_of()


def run_walks(g, start="stationary", times=(1,), replicas=1, seed=0, first_replica=0):
    """Positions ``(replicas, len(times))`` and start vertices of independent walks."""
    sampler = _Sampler(g)
    times = np.asarray(times, dtype=np.int64)
    T = int(times[-1])
    starts = np.empty(replicas, dtype=np.int64)
    out = np.empty((replicas, len(times)), dtype=np.int64)
    for b0 in range(0, replicas, BATCH):
        ids = range(first_replica + b0, first_replica + min(b0 + BATCH, replicas))
        draws = np.stack([replica_generator(seed, i).random(T + 1) for i in ids])
        if isinstance(start, str):
            if start == "stationary":
                pos = sampler.stationary(draws[:, 0])
            elif start == "uniform":
                pos = np.minimum((draws[:, 0] * sampler.n).astype(np.int64), sampler.n - 1)
            else:
                raise ValueError(f"unknown start law {start!r}")
        else:
            pos = np.full(len(ids), int(start), dtype=np.int64)
        sl = slice(b0, b0 + len(ids))
        starts[sl] = pos
        j = 0
        if times[0] == 0:
            out[sl, 0] = pos
            j = 1
        for step in range(1, T + 1):
            pos = sampler.step(pos, draws[:, step])
            while j < len(times) and times[j] == step:
                out[sl, j] = pos
                j += 1
    return starts, out


def simulate_walk(exp: WalkExperiment, params: FamilyParams | None = None,
                  project: bool = True) -> WalkStats:
    """Mean graph displacement ``E d(X_0, X_T)`` on the experiment's time grid.

    Distances come from a truncated BFS per replica that stops once every
    recorded position is reached.  When the graph carries columns and
    ``project`` is set, the column displacement of the same paths is kept
    as well (the projected walk).
    """
    g = exp.graph
    if isinstance(g, DualGraph) and not g.is_connected():
        raise ValueError("graph is disconnected")
    starts, pos = run_walks(g, exp.start, exp.times, exp.replicas, exp.seed)
    if isinstance(g, WeightedGraph):
        ip, ix = _weighted_adjacency(g)

        class _G:
            pass

        h = _G()
        h.indptr, h.indices = ip, ix
        bfs = BFS(h)
    else:
        bfs = BFS(g)
    disp = np.empty_like(pos)
    for i in range(exp.replicas):
        disp[i] = _displacement_bfs(bfs, int(starts[i]), pos[i])
    stats = summarize(exp.times, disp, params)
    col = _column_index(g) if project else None
    if col is not None:
        stats.projected_mean = [float(v) for v in np.abs(col[pos] - col[starts][:, None]).mean(axis=0)]
    return stats


def _weighted_adjacency(g: WeightedGraph):
    A = g.adjacency().tocsr()
    return A.indptr.astype(np.int64), A.indices


def _pairwise_mean(x: np.ndarray) -> np.ndarray:
    """Column means by a fixed-shape pairwise reduction (order independent of batching)."""
    x = x.astype(np.float64)
    n = x.shape[0]
    while x.shape[0] > 1:
        if x.shape[0] % 2:
            x = np.vstack([x, np.zeros((1,) + x.shape[1:])])
        x = x[0::2] + x[1::2]
    return x[0] / n


def summarize(times, disp, params: FamilyParams | None = None, n_boot: int = 200,
              seed: int = 0) -> WalkStats:
    R = disp.shape[0]
    mean = _pairwise_mean(disp)
    sd = disp.std(axis=0, ddof=1) if R > 1 else np.zeros(len(times))
    se = sd / math.sqrt(R)
    t = np.asarray(times, dtype=float)
    ok = (t > 0) & (mean > 0)
    exponent = band = None
    if ok.sum() >= 4:
        exponent = PowerLawFit().fit(t[ok], mean[ok]).exponent_
        rng = np.random.Generator(np.random.Philox(seed))
        boots = []
        for _ in range(n_boot):
            idx = rng.integers(0, R, size=R)
            m = disp[idx].mean(axis=0)
            if np.all(m[ok] > 0):
                boots.append(PowerLawFit().fit(t[ok], m[ok]).exponent_)
        if boots:
            band = (float(np.quantile(boots, 0.025)), float(np.quantile(boots, 0.975)))
    return WalkStats(
        times=[int(x) for x in times], mean=[float(v) for v in mean], stderr=[float(v) for v in se],
        replicas=int(R), exponent=exponent, band=band,
        target_dw=None if params is None else 1.0 / params.d_w,
        target_dg=None if params is None else 1.0 / params.d_g, displacements=disp)


class WalkSpeed(BaseEstimator):
    """Estimate the displacement exponent of a graph's random walk.

    ``fit(g)`` runs the Monte Carlo experiment; ``exponent_`` and
    ``stats_`` hold the result.
    """

    def __init__(self, times=(4, 16, 64, 256, 1024, 4096), replicas=1000, start="stationary", seed=0):
        self.times = times
        self.replicas = replicas
        self.start = start
        self.seed = seed

    def fit(self, g, y=None):
        exp = WalkExperiment(g, self.start, list(self.times), self.replicas, self.seed)
        self.stats_ = simulate_walk(exp)
        self.exponent_ = self.stats_.exponent
        return self

    def predict(self, times):
        check_is_fitted(self, "stats_")
        t = np.asarray(self.stats_.times, float)
        m = np.asarray(self.stats_.mean)
        fit = PowerLawFit().fit(t[t > 0], m[t > 0])
        return fit.predict(times)


def stationary_sample(g, size=None, seed=0):
    """Vertices drawn with probability proportional to degree (weighted: ``c_u``)."""
    sampler = _Sampler(g)
    rng = np.random.Generator(np.random.Philox(seed))
    u = rng.random(1 if size is None else size)
    out = sampler.stationary(u)
    return int(out[0]) if size is None else out


# ---------------------------------------------------------------------------
# projection


@dataclass
class ProjectionReport:
    passed: bool
    witness: dict | None
    columns: int
    mc: dict | None = None

    def to_dict(self):
        return asdict(self)


def projection_structure(g: CylindricalGraph) -> ProjectionReport:
    """Per-column equality of degree, left count and right count, plus the L-walk law.

    Equal counts make ``P(left) = c_{u,u-1}/c_u`` and ``P(stay) = c_uu/c_u``
    exactly, which is what the projected walk needs.
    """
    off = g.require_columns()
    nc = len(off) - 1
    L = linearize(g)
    cu = L.vertex_weights
    edge_c = {(int(a), int(b)): int(c) for (a, b), c in zip(L.edges, L.conductance)}
    for c in range(nc):
        left, same, right, skips = column_neighbour_counts(g, c)
        if skips:
            return ProjectionReport(False, {"reason": "edge skips a column", "column": c}, nc)
        a = int(off[c])
        deg = left + same + right
        for name, arr in (("degree", deg), ("left", left), ("right", right), ("vertical", same)):
            if np.any(arr != arr[0]):
                bad = a + int(np.flatnonzero(arr != arr[0])[0])
                return ProjectionReport(False, {"reason": f"unequal {name} count", "column": c,
                                                "tiles": [a, bad]}, nc)
        h = len(deg)
        d0 = int(deg[0])
        if int(same[0]) != 2:
            return ProjectionReport(False, {"reason": "column is not a cycle", "column": c}, nc)
        for nb, cnt in ((c - 1, int(left[0])), (c + 1, int(right[0]))):
            if cnt == 0:
                continue
            want = Fraction(edge_c.get((min(c, nb), max(c, nb)), 0), int(cu[c]))
            if Fraction(cnt, d0) != want:
                return ProjectionReport(False, {"reason": "projected law differs", "column": c}, nc)
        if Fraction(2, d0) != Fraction(2 * h, int(cu[c])):
            return ProjectionReport(False, {"reason": "holding probability differs", "column": c}, nc)
    return ProjectionReport(True, None, nc)


def projection_consistency_check(g: CylindricalGraph, T: int = 64, replicas: int = 2000,
                                 seed: int = 0, z_max: float = 4.0) -> ProjectionReport:
    """Structural check plus a two-sample comparison of column displacements at time ``T``.

    The projected cylinder walk and an independent lazy walk on the
    linearised graph should have equal mean displacement.
    """
    rep = projection_structure(g)
    if not rep.passed:
        return rep
    col = g.column_of()
    s1, p1 = run_walks(g, "stationary", [T], replicas, seed)
    a = np.abs(col[p1[:, 0]] - col[s1]).astype(float)
    L = linearize(g)
    s2, p2 = run_walks(L, "stationary", [T], replicas, seed + 1, first_replica=replicas)
    b = np.abs(p2[:, 0] - s2).astype(float)
    se = math.sqrt(a.var(ddof=1) / len(a) + b.var(ddof=1) / len(b))
    z = (a.mean() - b.mean()) / se if se > 0 else 0.0
    rep.mc = {"T": T, "replicas": replicas, "projected_mean": float(a.mean()),
              "L_mean": float(b.mean()), "z": float(z), "z_max": z_max}
    rep.passed = abs(z) <= z_max
    return rep


# ---------------------------------------------------------------------------
# rooted balls and the level coupling


@dataclass
class RootedBallSample:
    center: int
    radius: int
    vertices: np.ndarray
    distances: np.ndarray
    edges: np.ndarray
    boundary_touched: bool

    def to_dict(self):
        return {"center": self.center, "radius": self.radius, "vertices": self.vertices.tolist(),
                "edges": self.edges.tolist(), "boundary_touched": self.boundary_touched}


def _induced_edges(g, verts: np.ndarray) -> np.ndarray:
    inside = np.zeros(g.n, dtype=bool)
    inside[verts] = True
    cnt = g.indptr[verts + 1] - g.indptr[verts]
    src = np.repeat(verts, cnt)
    offs = np.repeat(g.indptr[verts] - (np.cumsum(cnt) - cnt), cnt) + np.arange(int(cnt.sum()))
    dst = g.indices[offs].astype(np.int64)
    keep = inside[dst] & (src < dst)
    return np.column_stack([src[keep], dst[keep]])


def rooted_ball(g, center: int, r: int, boundary_mask=None, bfs: BFS | None = None) -> RootedBallSample:
    bfs = bfs or BFS(g)
    levels = bfs.run([center], max_depth=r)
    verts = np.sort(np.concatenate(levels))
    dist = bfs.dist[verts].astype(np.int64)
    touched = bool(boundary_mask[verts].any()) if boundary_mask is not None else False
    return RootedBallSample(int(center), int(r), verts, dist, _induced_edges(g, verts), touched)


class _Level:
    def __init__(self, b, k, n):
        base = make_column_tiling(gamma_bk(b, k))
        self.base = base
        self.tiling = power(base, n, validate=False)
        self.graph = build_dual(self.tiling)
        self.boundary = np.zeros(self.graph.n, dtype=bool)
        self.boundary[boundary_sets(self.tiling).boundary] = True


def sample_rooted_ball(b: int, k: int, n: int, r: int, seed: int = 0, root: str = "uniform",
                       level: _Level | None = None) -> RootedBallSample:
    """Ball of radius ``r`` around a random root of ``G(T_(b,k)^n)`` and its boundary flag."""
    if n < 1 or r < 0:
        raise ValueError("need n >= 1 and r >= 0")
    lv = level or _Level(b, k, n)
    rng = np.random.Generator(np.random.Philox(seed))
    if root == "uniform":
        c = int(rng.integers(0, lv.graph.n))
    else:
        c = stationary_sample(lv.graph, seed=seed)
    return rooted_ball(lv.graph, c, r, lv.boundary)


@dataclass
class CouplingReport:
    roots: int
    radius: int
    clean: int
    violations: int
    touched_fraction_coarse: float
    touched_fraction_fine: float
    witness: dict | None = None

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def coupling_check(b: int, k: int, n: int, r: int, roots: int = 10_000, seed: int = 0) -> CouplingReport:
    """Couple uniform roots of ``G_n`` and ``G_{n-1}`` through ``T^n = T o T^{n-1}``.

    Whenever the level ``n-1`` ball avoids the boundary, its image under the
    copy embedding must be exactly the level ``n`` ball: same vertex set,
    same distances from the root, same induced edges.
    """
    coarse, fine = _Level(b, k, n - 1), _Level(b, k, n)
    emb = product_index(coarse.base, coarse.tiling)  # (|T|, |T^{n-1}|) -> id in T o T^{n-1}
    if emb.shape[0] * emb.shape[1] != fine.graph.n:
        raise TilingError("embedding size mismatch")
    rng = np.random.Generator(np.random.Philox(seed))
    rho_n = rng.integers(0, fine.graph.n, size=roots)
    # inverse map fine id -> (copy, coarse id)
    inv_copy = np.empty(fine.graph.n, dtype=np.int64)
    inv_pos = np.empty(fine.graph.n, dtype=np.int64)
    inv_copy[emb.ravel()] = np.repeat(np.arange(emb.shape[0]), emb.shape[1])
    inv_pos[emb.ravel()] = np.tile(np.arange(emb.shape[1]), emb.shape[0])
    bc, bf = BFS(coarse.graph), BFS(fine.graph)
    clean = violations = touched_c = touched_f = 0
    witness = None
    for root in rho_n.tolist():
        A, j = int(inv_copy[root]), int(inv_pos[root])
        small = rooted_ball(coarse.graph, j, r, coarse.boundary, bc)
        big = rooted_ball(fine.graph, root, r, fine.boundary, bf)
        touched_c += small.boundary_touched
        touched_f += big.boundary_touched
        if small.boundary_touched:
            continue
        clean += 1
        phi = emb[A]
        img_v = phi[small.vertices]
        order = np.argsort(img_v)
        ok = np.array_equal(img_v[order], big.vertices) and np.array_equal(small.distances[order], big.distances)
        if ok:
            e = phi[small.edges]
            e = np.sort(e, axis=1)
            e = e[np.lexsort((e[:, 1], e[:, 0]))]
            ok = np.array_equal(e, big.edges)
        if not ok:
            violations += 1
            if witness is None:
                witness = {"root": int(root), "copy": A, "coarse_root": j}
    return CouplingReport(roots, r, clean, violations, touched_c / roots, touched_f / roots, witness)
