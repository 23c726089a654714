"""Effective resistances on dual and weighted graphs, with certificates."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg

from .dual import DualGraph, WeightedGraph, build_dual
from .tiling import (ColumnSpec, Tiling, TilingError, boundary_sets, concat, gamma_bk,
                     make_column_tiling, power, tower)
from .traversal import BFS

DENSE_CUTOFF = 2000
RTOL = 1e-10


class SolverError(RuntimeError):
    pass


@dataclass
class ResistanceResult:
    value: float
    residual: float
    method: str
    certificates: dict | None = None
    query: str = ""
    iterations: int = 0

    def to_dict(self):
        return {"query": self.query, "value": self.value, "residual": self.residual,
                "method": self.method, "certificates": self.certificates}

    def certified(self, tol=1e-8) -> bool:
        """Lower certificates <= value <= upper certificates (relative ``tol``)."""
        if not self.certificates:
            return True
        slack = tol * max(1.0, abs(self.value))
        for key, bound in self.certificates.items():
            if key.endswith("upper") and bound < self.value - slack:
                return False
            if key.endswith("lower") and bound > self.value + slack:
                return False
        return True


def _weighted_csr(g):
    """``(indptr, indices, conductance)`` CSR triple of any supported graph."""
    if isinstance(g, WeightedGraph):
        A = g.adjacency()
        return A.indptr.astype(np.int64), A.indices, A.data
    return g.indptr, g.indices, np.ones(len(g.indices))


def laplacian(g) -> sp.csr_matrix:
    """Weighted graph Laplacian; self-loops do not enter."""
    if isinstance(g, WeightedGraph):
        A = g.adjacency()
    else:
        A = g.adjacency(np.float64)
    deg = np.asarray(A.sum(axis=1)).ravel()
    return (sp.diags(deg) - A).tocsr()


def _check_connected(L):
    from scipy.sparse.csgraph import connected_components

    k, _ = connected_components(L, directed=False)
    if k != 1:
        raise SolverError("graph is disconnected")


def _pcg(A, b, rtol=RTOL, maxiter=None):
    """Jacobi-preconditioned CG on an SPD system; returns (x, relative residual, iterations)."""
    n = A.shape[0]
    if maxiter is None:
        maxiter = 20 * max(n, 1)
    d = A.diagonal()
    M = LinearOperator((n, n), matvec=lambda v: v / d, dtype=np.float64)
    it = [0]

    def count(_):
        it[0] += 1

    x, info = cg(A, b, rtol=rtol, atol=0.0, maxiter=maxiter, M=M, callback=count)
    if info < 0:
        raise SolverError(f"CG breakdown (info={info})")
    nb = np.linalg.norm(b)
    res = float(np.linalg.norm(b - A @ x) / nb) if nb > 0 else 0.0
    if info > 0:
        raise SolverError(f"CG did not converge in {maxiter} iterations (residual {res:.3e})")
    return x, res, it[0]


def _grounded_solve(L, d, method, ground=None):
    """Solve ``L x = d`` (``sum d = 0``) with ``x[ground] = 0``."""
    n = L.shape[0]
    if ground is None:
        ground = n - 1
    keep = np.ones(n, dtype=bool)
    keep[ground] = False
    Lr = L[keep][:, keep]
    dr = d[keep]
    x = np.zeros(n)
    if n == 1:
        return x, 0.0, method, 0
    if method == "dense":
        if n > DENSE_CUTOFF:
            raise SolverError(f"dense solve refused above {DENSE_CUTOFF} vertices")
        x[keep] = np.linalg.solve(Lr.toarray(), dr)
        it = 0
        tag = "dense-pseudoinverse"
    else:
        x[keep], _, it = _pcg(Lr.tocsr(), dr)
        tag = "iterative-CG"
    nd = np.linalg.norm(d)
    res = float(np.linalg.norm(d - L @ x) / nd) if nd > 0 else 0.0
    return x, res, tag, it


def pinv_resistance(g, d) -> float:
    """Dense Moore-Penrose oracle ``<d, L^+ d>``."""
    L = laplacian(g).toarray()
    if L.shape[0] > DENSE_CUTOFF:
        raise SolverError(f"dense oracle refused above {DENSE_CUTOFF} vertices")
    d = np.asarray(d, dtype=float)
    return float(d @ np.linalg.pinv(L, hermitian=True) @ d)


# ---------------------------------------------------------------------------
# certificates


def _tree_parents(indptr, indices, root):
    """BFS levels from ``root`` and a parent for every non-root vertex."""
    bfs = BFS(_CSR(indptr, indices))
    levels = bfs.run([root])
    dist = bfs.dist.copy()
    parent = np.full(len(indptr) - 1, -1, dtype=np.int64)
    for k in range(1, len(levels)):
        lv = levels[k]
        cnt = indptr[lv + 1] - indptr[lv]
        owner = np.repeat(lv, cnt)
        offs = np.repeat(indptr[lv] - (np.cumsum(cnt) - cnt), cnt) + np.arange(int(cnt.sum()))
        nb = indices[offs]
        ok = dist[nb] == k - 1
        owner, nb = owner[ok], nb[ok]
        first = np.unique(owner, return_index=True)[1]
        parent[owner[first]] = nb[first]
    return levels, parent


def _flow_certificate(L, x, d):
    """Energy of an exactly feasible flow for demand ``d`` (an upper bound).

    Starts from the current induced by ``x`` and routes the leftover
    divergence ``d - L x`` along a BFS spanning tree.
    """
    A = sp.triu(-L, k=1).tocsr()
    A.eliminate_zeros()
    A = A.tocoo()
    u, v, c = A.row.astype(np.int64), A.col.astype(np.int64), A.data
    n = L.shape[0]
    theta = c * (x[u] - x[v])
    surplus = d - L @ x
    Lc = L.tocsr()
    levels, parent = _tree_parents(Lc.indptr.astype(np.int64), Lc.indices, 0)
    tree_flow = np.zeros(n)  # flow on the edge w -> parent[w]
    for lv in levels[:0:-1]:
        tree_flow[lv] = surplus[lv]
        np.add.at(surplus, parent[lv], surplus[lv])
    w = np.concatenate(levels[1:]) if len(levels) > 1 else np.zeros(0, np.int64)
    p = parent[w]
    lo, hi = np.minimum(w, p), np.maximum(w, p)
    keys = u * n + v
    order = np.argsort(keys)
    pos = order[np.searchsorted(keys[order], lo * n + hi)]
    np.add.at(theta, pos, np.where(w < p, tree_flow[w], -tree_flow[w]))
    return float(np.sum(theta**2 / c))


def _dirichlet_certificate(L, x, d):
    """``<d, x>^2 / <x, L x>``, a lower bound for any potential ``x``."""
    num = float(d @ x)
    den = float(x @ (L @ x))
    return num * num / den if den > 0 else 0.0


def _cut_certificate(indptr, indices, data, sources, sinks):
    """Nash-Williams bound from BFS layers around ``sources`` up to ``sinks``."""
    n = len(indptr) - 1
    bfs = BFS(_CSR(indptr, indices))
    levels = bfs.run(sources, targets=sinks)
    dist = bfs.dist
    ds = dist[np.asarray(sinks)]
    if np.any(ds < 0):
        return 0.0
    reach = int(ds.min())
    src = np.repeat(np.arange(n), np.diff(indptr))
    du, dv = dist[src], dist[indices]
    mask = (du >= 0) & (dv == du + 1) & (du < reach)
    cuts = np.bincount(du[mask], weights=data[mask], minlength=reach)
    return float(np.sum(1.0 / cuts[cuts > 0]))


class _CSR:
    def __init__(self, indptr, indices):
        self.indptr = indptr
        self.indices = indices


# ---------------------------------------------------------------------------
# queries


def _as_demand(n, m):
    if isinstance(m, dict):
        v = np.zeros(n)
        for k, val in m.items():
            v[int(k)] += float(val)
        return v
    m = np.asarray(m, dtype=float)
    if m.shape != (n,):
        raise ValueError("demand vector has wrong length")
    return m


def reff_measures(g, s, t, method: str = "cg", certificates: bool = False,
                  query: str = "reff_measures") -> ResistanceResult:
    """``<s - t, L^+ (s - t)>`` for measures of equal total mass."""
    L = laplacian(g)
    n = L.shape[0]
    s, t = _as_demand(n, s), _as_demand(n, t)
    if np.any(s < 0) or np.any(t < 0):
        raise ValueError("measures must be nonnegative")
    if not math.isclose(s.sum(), t.sum(), rel_tol=1e-12, abs_tol=1e-15):
        raise ValueError("demands are not balanced")
    _check_connected(L)
    d = s - t
    if not np.any(d):
        return ResistanceResult(0.0, 0.0, "trivial", None, query)
    x, res, tag, it = _grounded_solve(L, d, method)
    value = float(d @ x)
    cert = None
    if certificates:
        ip, ix, data = _weighted_csr(g)
        cert = {
            "flow_upper": _flow_certificate(L, x, d),
            "dirichlet_lower": _dirichlet_certificate(L, x, d),
            "cut_lower": _cut_certificate(ip, ix, data, np.flatnonzero(s > 0), np.flatnonzero(t > 0))
            if not np.any((s > 0) & (t > 0)) else 0.0,
        }
    return ResistanceResult(value, res, tag, cert, query, it)


def contract(g, a, b_mask=None, keep=None):
    """Contracted Laplacian with ``a`` merged into vertex 0 and the sink into vertex 1.

    Either give ``b_mask`` (boolean sink indicator) or ``keep``: the ids of
    all vertices not in the sink, in which case every neighbour outside
    ``keep`` counts as sink.  Only rows of kept vertices are read.
    """
    indptr, indices, data = _weighted_csr(g)
    n = len(indptr) - 1
    a = np.unique(np.asarray(a, dtype=np.int64))
    if keep is None:
        keep = np.flatnonzero(~b_mask)
    keep = np.unique(np.asarray(keep, dtype=np.int64))
    # compact labels: 0 for a, 1 for sink, 2.. for the rest of keep
    lab = np.full(n, 1, dtype=np.int64)
    rest = np.setdiff1d(keep, a, assume_unique=True)
    lab[a] = 0
    lab[rest] = 2 + np.arange(len(rest))
    starts, stops = indptr[keep], indptr[keep + 1]
    cnt = stops - starts
    rows = np.repeat(keep, cnt)
    offs = np.repeat(starts - (np.cumsum(cnt) - cnt), cnt) + np.arange(int(cnt.sum()))
    cols = indices[offs]
    w = data[offs]
    lu, lv = lab[rows], lab[cols]
    m = 2 + len(rest)
    # each kept-kept edge appears twice; a kept-sink edge once, so add its mirror
    sink_edge = lv == 1
    lu = np.r_[lu, lv[sink_edge]]
    lv2 = np.r_[lv, lu[: len(lv)][sink_edge]]
    w = np.r_[w, w[sink_edge]]
    off = lu != lv2
    A = sp.coo_matrix((w[off], (lu[off], lv2[off])), shape=(m, m)).tocsr()
    A.sum_duplicates()
    deg = np.asarray(A.sum(axis=1)).ravel()
    L = (sp.diags(deg) - A).tocsr()
    return L, A, rest


def _two_point(L, A, method, certificates, query):
    if L.shape[0] < 2 or L[0, 0] == 0:
        raise SolverError("source and sink are not connected")
    _check_connected(L)
    d = np.zeros(L.shape[0])
    d[0], d[1] = 1.0, -1.0
    x, res, tag, it = _grounded_solve(L, d, method, ground=1)
    value = float(x[0])
    cert = None
    if certificates:
        cert = {
            "flow_upper": _flow_certificate(L, x, d),
            "dirichlet_lower": _dirichlet_certificate(L, x, d),
            "cut_lower": _cut_certificate(A.indptr.astype(np.int64), A.indices, A.data, [0], [1]),
        }
    return ResistanceResult(value, res, tag, cert, query, it)


def reff_sets(g, a, b, method: str = "cg", certificates: bool = True,
              query: str = "reff_sets") -> ResistanceResult:
    """``R_eff(A <-> B)``: two-point resistance after contracting each set."""
    n = g.n
    a = np.unique(np.asarray(a, dtype=np.int64))
    b = np.unique(np.asarray(b, dtype=np.int64))
    if len(a) == 0 or len(b) == 0:
        raise ValueError("sets must be nonempty")
    if len(np.intersect1d(a, b)):
        raise ValueError("sets overlap")
    mask = np.zeros(n, dtype=bool)
    mask[b] = True
    L, A, _ = contract(g, a, b_mask=mask)
    return _two_point(L, A, method, certificates, query)


def rho(t: Tiling, method: str = "cg", graph=None, certificates: bool = False) -> ResistanceResult:
    """Resistance between the uniform measures on the left and right boundary tiles."""
    if len(t) == 1:
        return ResistanceResult(0.0, 0.0, "trivial", None, "rho")
    bs = boundary_sets(t)
    if not bs.nondegenerate:
        raise TilingError("rho needs a non-degenerate tiling")
    g = graph if graph is not None else build_dual(t)
    s = np.zeros(g.n)
    s[bs.left] = 1.0 / len(bs.left)
    tt = np.zeros(g.n)
    tt[bs.right] = 1.0 / len(bs.right)
    return reff_measures(g, s, tt, method=method, certificates=certificates, query="rho")


def nash_williams_column_bound(t: Tiling) -> Fraction:
    """Exact ``sum_i 1/|K_i|`` over the columns of a columnar tiling."""
    counts = t.column_counts()
    return sum((Fraction(1, int(h)) for h in counts), Fraction(0))


# ---------------------------------------------------------------------------
# reports


@dataclass
class ConcatBound:
    lhs: float
    rhs: float
    rho_s: float
    rho_t: float
    junction_bound: float
    junction_value: float
    flow_energy: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    def holds(self, tol=1e-9) -> bool:
        return self.slack >= -tol

    def to_dict(self):
        d = asdict(self)
        d["slack"] = self.slack
        return d


def _uniform_heights(t: Tiling, ids) -> bool:
    X, Y, W, H, dx, dy = t.coords()
    h = H[np.asarray(ids)]
    return bool(np.all(h == h[0]))


def concat_bound_check(s: Tiling, t: Tiling, method: str = "cg") -> ConcatBound:
    """Evaluate both sides of ``rho(S|T) <= rho(S) + rho(T) + 1/max(|R(S)|, |L(T)|)``."""
    bs, bt = boundary_sets(s), boundary_sets(t)
    if not _uniform_heights(s, bs.right):
        raise TilingError("tiles on the right edge of S differ in height")
    if not _uniform_heights(t, bt.left):
        raise TilingError("tiles on the left edge of T differ in height")
    st = concat(s, t)
    g = build_dual(st)
    m = max(len(bs.right), len(bt.left))
    rs, rt = rho(s, method).value, rho(t, method).value
    lhs = rho(st, method, graph=g).value
    # middle term: R(S)-uniform to L(T)-uniform inside S|T, and the explicit flow
    right_ids = np.asarray(bs.right)
    left_ids = len(s) + np.asarray(bt.left)
    src = np.zeros(g.n)
    src[right_ids] = 1.0 / len(right_ids)
    dst = np.zeros(g.n)
    dst[left_ids] = 1.0 / len(left_ids)
    mid = reff_measures(g, src, dst, method=method).value
    energy = _junction_flow_energy(st, g, right_ids, left_ids)
    return ConcatBound(lhs, rs + rt + 1.0 / m, rs, rt, 1.0 / m, mid, energy)


def _junction_flow_energy(st: Tiling, g, right_ids, left_ids) -> float:
    """Energy of the flow ``F_AB = len(A cap B)/l2(A) / |R(S)|`` across the seam."""
    X, Y, W, H, dx, dy = st.coords()
    in_left = np.zeros(g.n, dtype=bool)
    in_left[left_ids] = True
    total, energy = Fraction(0), Fraction(0)
    for a in right_ids.tolist():
        for b in g.neighbors(a).tolist():
            if not in_left[b]:
                continue
            overlap = min(int(Y[a]) + int(H[a]), int(Y[b]) + int(H[b])) - max(int(Y[a]), int(Y[b]))
            f = Fraction(overlap, int(H[a])) / len(right_ids)
            total += f
            energy += f * f
    if total != 1:
        raise TilingError(f"junction flow does not carry unit mass ({total})")
    return float(energy)


def _family_tiling(family) -> tuple[Tiling, Fraction]:
    if isinstance(family, ColumnSpec):
        spec = family
    elif family in ("H", "h"):
        spec = ColumnSpec([3, 6, 3])
    else:
        spec = gamma_bk(*family)
    return make_column_tiling(spec), spec.Gamma


@dataclass
class TransienceSeries:
    family: str
    ns: list
    values: list
    increments: list
    ratios: list
    running_sup: list
    Gamma: float
    threshold: float
    residuals: list = field(default_factory=list)

    @property
    def decaying(self) -> bool:
        r = [x for x in self.ratios if x is not None]
        return bool(r) and all(x <= self.threshold for x in r)

    def to_dict(self):
        d = asdict(self)
        d["decaying"] = self.decaying
        return d


def transience_series(family, n_max: int, method: str = "cg", threshold: float = 0.95) -> TransienceSeries:
    """``rho(G(T^0 | T^1 | ... | T^n))`` for ``n = 1..n_max`` with increments."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    base, Gamma = _family_tiling(family)
    values, residuals = [0.0], [0.0]
    for n in range(1, n_max + 1):
        r = rho(tower(base, n, validate=False), method)
        values.append(r.value)
        residuals.append(r.residual)
    inc = [values[i] - values[i - 1] for i in range(1, len(values))]
    ratios = [None] + [inc[i] / inc[i - 1] if inc[i - 1] != 0 else None for i in range(1, len(inc))]
    sup = list(np.maximum.accumulate(values[1:]))
    name = "H" if family in ("H", "h") else str(family)
    return TransienceSeries(name, list(range(1, n_max + 1)), values[1:], inc, ratios,
                            [float(v) for v in sup], float(Gamma), threshold, residuals[1:])


def _ball_keep(g, v_or_set, r):
    bfs = BFS(g)
    levels = bfs.run(np.atleast_1d(v_or_set), max_depth=r)
    return levels


def annulus_resistance(g, x: int, R: int, method: str = "cg", certificates: bool = True) -> ResistanceResult:
    """``R_eff(B(x,R) <-> V \\ B(x,2R))``, reading only the double ball."""
    levels = _ball_keep(g, [x], 2 * R)
    keep = np.concatenate(levels)
    if len(keep) >= g.n:
        raise ValueError(f"B(x, {2 * R}) is the whole graph")
    inner = np.concatenate(levels[: R + 1])
    L, A, _ = contract(g, inner, keep=keep)
    return _two_point(L, A, method, certificates, f"annulus x={x} R={R}")


def reff_point_to_ball_complement(g, v: int, r: int, method: str = "cg",
                                  certificates: bool = False) -> ResistanceResult:
    """``R_eff({v} <-> V \\ B(v, r))``."""
    levels = _ball_keep(g, [v], r)
    keep = np.concatenate(levels)
    if len(keep) >= g.n:
        raise ValueError(f"B(v, {r}) is the whole graph")
    L, A, _ = contract(g, [v], keep=keep)
    return _two_point(L, A, method, certificates, f"point v={v} r={r}")


def results_json(results) -> str:
    return json.dumps([r.to_dict() for r in results], sort_keys=True, indent=1)


def results_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["query", "value", "residual", "method"])
    for r in results:
        w.writerow([r.query, repr(r.value), repr(r.residual), r.method])
    return buf.getvalue()


@dataclass
class PlateauSeries:
    root: int
    radii: list
    values: list
    relative_increments: list
    tol: float

    @property
    def plateaued(self) -> bool:
        inc = self.relative_increments[-2:]
        return len(inc) == 2 and all(x <= self.tol for x in inc)

    def to_dict(self):
        d = asdict(self)
        d["plateaued"] = self.plateaued
        return d


def frontier_plateau(g, root: int, radii, method: str = "cg", tol: float = 0.02) -> PlateauSeries:
    """``R_eff(root <-> V \\ B(root, r))`` on a doubling radius grid and its relative increments."""
    vals = [reff_point_to_ball_complement(g, root, int(r), method).value for r in radii]
    inc = [(vals[i] - vals[i - 1]) / vals[i - 1] for i in range(1, len(vals))]
    return PlateauSeries(int(root), [int(r) for r in radii], vals, inc, tol)
