"""The verification suite behind ``tilegrowth verify``.

Each check returns ``(passed, details)``.  Hard checks test exact
statements (counts, bounds, identities, zero-violation scans) and decide
the exit status; soft checks are finite-size surrogates of asymptotic
statements and are only reported.  Reports contain no timings, so equal
configurations give byte-identical JSON.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .connectivity import exhaustive_check
from .dual import build_cylinder, build_dual, degree_bound
from .growth import (copy_ball_check, diameter, geometric_radii, growth_profile,
                     growth_upper_bound_check)
from .resistance import (annulus_resistance, frontier_plateau, nash_williams_column_bound,
                         pinv_resistance, reff_measures, rho, transience_series)
from .tiling import (ColumnSpec, FamilyParams, alpha, boundary_sets, gamma_bk, make_column_tiling,
                     power, product, tower)
from .walk import WalkExperiment, coupling_check, projection_structure, simulate_walk

H_SPEC = ColumnSpec((3, 6, 3))

PROFILES = {
    "quick": dict(n_H=3, n_T=2, n_rho=3, n_transience=3, plateau=(4, [8, 16, 32, 64]),
                  growth=("H", 3), walk=(2, 500, [4, 16, 64, 256]), annulus=(2, [2, 4], 8),
                  exhaustive=[(4, 4, 2)], coupling=(2, 3, 1000), oracle=(10, 300), triples=5,
                  bound_pairs=[("H", 1, "H", 1)]),
    "default": dict(n_H=4, n_T=3, n_rho=4, n_transience=4, plateau=(5, [32, 64, 128, 256]),
                    growth=("H", 4), walk=(3, 2000, [4, 16, 64, 256, 1024]), annulus=(3, [4, 16], 8),
                    exhaustive=[(4, 4, 2)], coupling=(3, 4, 2000), oracle=(20, 1000), triples=10,
                    bound_pairs=[("H", 1, "H", 2), ("T", 1, "T", 1)]),
    "full": dict(n_H=5, n_T=3, n_rho=5, n_transience=4, plateau=(6, [64, 128, 256, 512]),
                 growth=("H", 5), walk=(4, 10_000, [4, 16, 64, 256, 1024, 4096]),
                 annulus=(3, [4, 16, 64], 32), exhaustive=[(4, 4, 2), (4, 16, 2)],
                 coupling=(3, 4, 10_000), oracle=(50, 2000), triples=20,
                 bound_pairs=[("H", 1, "H", 2), ("H", 2, "H", 2), ("T", 1, "T", 1)]),
}


class BudgetError(RuntimeError):
    pass


BYTES_PER_TILE = 160  # measured peak of graph build + walks, with headroom


def estimate_bytes(tiles: int) -> int:
    return int(tiles) * BYTES_PER_TILE


@dataclass
class Check:
    name: str
    hard: bool
    passed: bool
    details: dict

    def to_dict(self):
        return {"name": self.name, "hard": self.hard, "passed": bool(self.passed),
                "details": _clean(self.details)}


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, Fractions to strings, tuples to lists."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    return x


def _T(b=4, k=16):
    return make_column_tiling(gamma_bk(b, k))


def _H():
    return make_column_tiling(H_SPEC)


# ---------------------------------------------------------------------------
# individual checks


def check_counting(p, fam):
    rows, ok = [], True
    for n in range(0, p["n_H"] + 1):
        t = power(_H(), n, validate=n <= 3)
        bs = boundary_sets(t)
        row = {"n": n, "tiles": len(t), "left": len(bs.left), "right": len(bs.right)}
        ok &= len(t) == 12**n and len(bs.left) == 3**n and len(bs.right) == 3**n
        rows.append(row)
    return ok, {"H": rows}


def check_diameters(p, fam):
    out, ok = [], True
    families = [("H", H_SPEC, p["n_H"]), ("(4,16)", gamma_bk(4, 16), p["n_T"])]
    if fam is not None:
        families.append((fam["name"], fam["spec"], fam["n"]))
    for name, spec, nmax in families:
        for n in range(1, nmax + 1):
            d = diameter(build_dual(power(make_column_tiling(spec), n, validate=False)))
            b = spec.b
            # H: 3^n <= diam <= 3^(n+1); general gamma: b^n <= diam <= 3 b^n
            lo, hi = b**n, 3 * b**n
            good = d.exact and lo <= d.lower and d.upper <= hi
            ok &= good
            out.append({"family": name, "n": n, "diameter": d.lower, "upper": d.upper,
                        "bracket": [lo, hi], "ok": good})
    return ok, {"rows": out}


def check_alpha(p, fam):
    rows, ok = [], True
    for n in range(1, p["n_H"] + 1):
        a = alpha(power(_H(), n, validate=False))
        rows.append({"n": n, "alpha": a})
        ok &= a <= 2
    return ok, {"H": rows}


def check_degree(p, fam):
    rows, ok = [], True
    tils = [("H", n, power(_H(), n, validate=False)) for n in range(1, min(p["n_H"], 4) + 1)]
    tils += [("(4,16)", n, power(_T(), n, validate=False)) for n in range(1, p["n_T"] + 1)]
    tils.append(("H1|H2", 0, tower(_H(), 2, validate=False)))
    if fam is not None:
        tils.append((fam["name"], fam["n"], fam["tiling"]))
    for name, n, t in tils:
        g = build_dual(t)
        a = alpha(t, graph=g)
        dmax = int(g.degrees.max())
        good = dmax <= degree_bound(a)
        ok &= good
        rows.append({"family": name, "n": n, "max_degree": dmax, "bound": degree_bound(a), "ok": good})
    return ok, {"rows": rows}


def check_associativity(p, fam, seed):
    rng = np.random.Generator(np.random.Philox(seed))
    bad = []
    for i in range(p["triples"]):
        specs = [[int(v) for v in rng.integers(1, 5, size=int(rng.integers(1, 4)))] for _ in range(3)]
        S, T, U = (make_column_tiling(s) for s in specs)
        left = product(product(S, T), U)
        right = product(S, product(T, U))
        if not left == right:
            bad.append(specs)
    return not bad, {"triples": p["triples"], "failures": bad}


def check_divisibility(p, fam):
    fams = [(4, 16), (4, 4), (5, 9)]
    rows, ok = [], True
    for b, k in fams:
        for n in range(1, p["n_T"] + 1):
            c = power(_T(b, k), n, validate=False).column_counts().astype(np.int64)
            lo, hi = np.minimum(c[:-1], c[1:]), np.maximum(c[:-1], c[1:])
            good = bool(np.all(hi % lo == 0))
            ok &= good
            rows.append({"bk": [b, k], "n": n, "columns": len(c), "ok": good})
    if fam is not None and fam.get("bk"):
        c = fam["tiling"].column_counts().astype(np.int64)
        good = bool(np.all(np.maximum(c[:-1], c[1:]) % np.minimum(c[:-1], c[1:]) == 0))
        ok &= good
        rows.append({"bk": list(fam["bk"]), "n": fam["n"], "columns": len(c), "ok": good})
    return ok, {"rows": rows}


def _named(kind, n):
    return power(_H() if kind == "H" else _T(), n, validate=False)


def check_growth_bound(p, fam, seed):
    rows, ok = [], True
    for a, na, b, nb in p["bound_pairs"]:
        r = growth_upper_bound_check(_named(a, na), _named(b, nb), samples=64, seed=seed)
        c = copy_ball_check(_named(a, na), _named(b, nb), samples=64, seed=seed)
        ok &= r.passed and c.passed
        rows.append({"S": f"{a}^{na}", "T": f"{b}^{nb}", "upper": r.details, "upper_ok": r.passed,
                     "copy_ball": c.details, "copy_ok": c.passed})
    return ok, {"rows": rows}


def check_growth_fit(p, fam, seed):
    kind, n = p["growth"]
    out, ok = [], True
    targets = [("H", H_SPEC, n), ("(4,16)", gamma_bk(4, 16), min(n, 3))]
    if fam is not None:
        targets.append((fam["name"], fam["spec"], fam["n"]))
    for name, spec, m in targets:
        if m < 2:
            continue
        g = build_dual(power(make_column_tiling(spec), m, validate=False))
        radii = p.get("radius_grid") or geometric_radii(spec.b, spec.b ** (m - 1), spec.b)
        if len(radii) < 2:
            radii = [1] + list(radii)
        prof = growth_profile(g, radii=radii, seed=seed)
        target = math.log(spec.size, spec.b)
        good = abs(prof.exponent - target) <= 0.15
        ok &= good
        out.append({"family": name, "n": m, "radii": prof.radii, "median": prof.median,
                    "exponent": prof.exponent, "target": target, "c": prof.c, "C": prof.C,
                    "residual": prof.residual, "ok": good})
    return ok, {"rows": out}


def check_rho_recursion(p, fam):
    vals = [0.0]
    res = []
    for n in range(1, p["n_rho"] + 1):
        r = rho(power(_H(), n, validate=False))
        vals.append(r.value)
        res.append(r.residual)
    rows, ok = [], True
    for n in range(2, p["n_rho"] + 1):
        rhs = 5 / 6 * vals[n - 1] + 3.0**-n
        good = vals[n] <= rhs + 1e-6
        ok &= good
        rows.append({"n": n, "rho": vals[n], "bound": rhs, "ok": good})
    return ok, {"rho": vals[1:], "residuals": res, "rows": rows}


def check_nash_williams(p, fam):
    rows, ok = [], True
    for name, t0, ratio, nmax in (("H", _H(), Fraction(5, 6), p["n_rho"]),
                                  ("(4,16)", _T(), Fraction(10, 13), p["n_T"] + 1)):
        for n in range(1, nmax + 1):
            s = nash_williams_column_bound(power(t0, n, validate=False))
            good = s == ratio**n
            ok &= good
            rows.append({"family": name, "n": n, "sum": s, "expected": ratio**n, "ok": good})
    return ok, {"rows": rows}


def check_transience(p, fam):
    ser = transience_series("H", p["n_transience"])
    sup_ok = max(ser.running_sup) < 3 * ser.values[-1]
    d = ser.to_dict()
    d["sup_ok"] = sup_ok
    return ser.decaying and sup_ok, d


def check_frontier_plateau(p, fam):
    n, radii = p["plateau"]
    g = build_dual(tower(_H(), n, validate=False))
    ps = frontier_plateau(g, 0, radii)
    return ps.plateaued, ps.to_dict()


def _random_instance(rng, max_n):
    """A random small tiling graph: a power or tower of a random column spec, or a product."""
    while True:
        b = int(rng.integers(1, 5))
        spec = [int(v) for v in rng.integers(1, 6, size=b)]
        t = make_column_tiling(spec)
        kind = int(rng.integers(0, 3))
        if kind == 0:
            t = power(t, int(rng.integers(1, 4)), validate=False)
        elif kind == 1:
            t = tower(t, int(rng.integers(1, 3)), validate=False)
        else:
            t = product(t, make_column_tiling([int(v) for v in rng.integers(1, 5, size=int(rng.integers(1, 4)))]))
        if 3 <= len(t) <= max_n:
            return t


def check_solver_oracle(p, fam, seed):
    count, max_n = p["oracle"]
    rng = np.random.Generator(np.random.Philox(seed))
    worst, rows = 0.0, []
    for _ in range(count):
        t = _random_instance(rng, max_n)
        g = build_dual(t)
        s, u = rng.choice(g.n, size=2, replace=False)
        d = np.zeros(g.n)
        d[s], d[u] = 1.0, -1.0
        dense = pinv_resistance(g, d)
        it = reff_measures(g, (d > 0).astype(float), (d < 0).astype(float), method="cg").value
        err = abs(it - dense) / abs(dense)
        worst = max(worst, err)
        rows.append({"n": g.n, "dense": dense, "cg": it, "rel_err": err})
    return worst <= 1e-8, {"instances": count, "max_rel_err": worst, "rows": rows}


def check_annulus(p, fam, seed):
    n, radii, samples = p["annulus"]
    g = build_dual(power(_T(), n, validate=False))
    rng = np.random.Generator(np.random.Philox(seed))
    xs = rng.integers(0, g.n, size=samples)
    med, counts, refused = [], [], []
    for R in radii:
        vals = []
        for x in xs.tolist():
            try:
                vals.append(annulus_resistance(g, int(x), int(R), certificates=False).value)
            except ValueError:
                pass
        counts.append(len(vals))
        if vals:
            med.append(float(np.median(vals)))
        else:
            med.append(None)
            refused.append(int(R))
    target = FamilyParams(4, 16).resistance_exponent
    slope = None
    good = not refused
    if good:
        slope = float(np.polyfit(np.log(radii), np.log(med), 1)[0])
        good = abs(slope - target) <= 0.15
    return good, {"n": n, "radii": radii, "median": med, "samples": counts, "refused_radii": refused,
                  "slope": slope, "target": target}


def check_walk(p, fam, seed):
    n, reps, times = p["walk"]
    if p.get("replicas"):
        reps = p["replicas"]
    if p.get("time_grid"):
        times = p["time_grid"]
    g = build_cylinder(power(_T(), n, validate=False))
    params = FamilyParams(4, 16)
    st = simulate_walk(WalkExperiment(g, "stationary", times, reps, seed), params)
    proj_ok = all(a >= b for a, b in zip(st.mean, st.projected_mean))
    speed_ok = st.exponent is not None and st.exponent >= 1 / params.d_w - 0.07
    return (proj_ok, speed_ok), {"n": n, **st.to_dict(), "projection_ok": proj_ok,
                                 "speed_threshold": 1 / params.d_w - 0.07}


def check_projection_structure(p, fam):
    rows, ok = [], True
    for b, k, n in ((4, 4, 2), (4, 16, 2)):
        rep = projection_structure(build_cylinder(power(_T(b, k), n, validate=False)))
        ok &= rep.passed
        rows.append({"bk": [b, k], "n": n, "passed": rep.passed, "witness": rep.witness})
    return ok, {"rows": rows}


def check_connectivity(p, fam):
    rows, ok = [], True
    for b, k, n in p["exhaustive"]:
        rep = exhaustive_check(build_cylinder(power(_T(b, k), n, validate=False)), f"({b},{k})^{n}")
        ok &= rep.passed
        rows.append(rep.to_dict())
    return ok, {"rows": rows}


def check_coupling(p, fam, seed):
    lo, hi, roots = p["coupling"]
    rep = coupling_check(4, 16, hi, 2, roots, seed=seed)
    return rep.passed, {"levels": [lo, hi], **rep.to_dict()}


def check_input_graph(path, fam):
    """A serialized graph must equal the graph rebuilt from the configured family."""
    from .io import graph_from_dict, load

    try:
        g = graph_from_dict(load(path))
    except (OSError, ValueError, KeyError, TypeError) as e:
        return False, {"path": str(path), "error": str(e)}
    if fam is None:
        return False, {"path": str(path), "error": "no family configured to compare against"}
    from .dual import CylindricalGraph

    want = fam["graph"](isinstance(g, CylindricalGraph))
    same = (g.n == want.n and np.array_equal(g.indptr, want.indptr)
            and np.array_equal(g.indices, want.indices))
    problems = []
    if not g.is_simple_symmetric():
        problems.append("not simple and symmetric")
    if g.n == want.n and not same:
        diff = np.flatnonzero(np.diff(g.indptr) != np.diff(want.indptr))
        problems.append("edge set differs from the construction"
                        + (f" (first degree mismatch at tile {int(diff[0])})" if len(diff) else ""))
    elif g.n != want.n:
        problems.append(f"vertex count {g.n} != {want.n}")
    return same and not problems, {"path": str(path), "problems": problems}


# ---------------------------------------------------------------------------
# driver


def family_from_config(cfg) -> dict | None:
    spec = bk = None
    if cfg.get("gamma"):
        spec = ColumnSpec(tuple(cfg["gamma"]))
    elif cfg.get("bk"):
        bk = tuple(cfg["bk"])
        spec = gamma_bk(*bk)
    elif cfg.get("degree") is not None:
        return None
    if spec is None:
        return None
    n = int(cfg.get("n") if cfg.get("n") is not None else 1)
    t = power(make_column_tiling(spec), n, validate=False)
    name = f"gamma={list(spec.gamma)}"
    return {"name": name, "spec": spec, "n": n, "tiling": t, "bk": bk,
            "graph": lambda cyl=False: build_cylinder(t) if cyl else build_dual(t)}


def largest_tiles(p) -> int:
    walk_n = p["walk"][0]
    return max(12 ** p["n_H"], 64 ** walk_n, 12 ** p["plateau"][0] * 12 // 11)


def run_suite(cfg: dict) -> dict:
    profile = cfg.get("profile") or "default"
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}")
    p = dict(PROFILES[profile])
    if cfg.get("n") is not None and not (cfg.get("gamma") or cfg.get("bk")):
        p["n_H"] = min(p["n_H"], int(cfg["n"]))
        p["n_rho"] = min(p["n_rho"], int(cfg["n"]))
    for key in ("replicas", "time_grid", "radius_grid"):
        if cfg.get(key):
            p[key] = cfg[key]
    budget = float(cfg.get("budget", 8.0)) * 2**30
    need = estimate_bytes(largest_tiles(p))
    if need > budget:
        raise BudgetError(f"estimated peak {need / 2**30:.2f} GiB exceeds budget {budget / 2**30:.2f} GiB")
    seed = int(cfg.get("seed", 0))
    fam = family_from_config(cfg)

    checks: list[Check] = []

    def add(name, hard, result):
        ok, details = result
        checks.append(Check(name, hard, bool(ok), details))

    if cfg.get("graph"):
        add("input_graph_matches_construction", True, check_input_graph(cfg["graph"], fam))
    add("tile_and_boundary_counts", True, check_counting(p, fam))
    add("diameter_bracket", True, check_diameters(p, fam))
    add("alpha_of_H_powers", True, check_alpha(p, fam))
    add("degree_bound", True, check_degree(p, fam))
    add("product_associativity", True, check_associativity(p, fam, seed))
    add("column_divisibility", True, check_divisibility(p, fam))
    add("growth_upper_bound_192", True, check_growth_bound(p, fam, seed))
    add("growth_exponent_fit", False, check_growth_fit(p, fam, seed))
    add("rho_H_recursion", True, check_rho_recursion(p, fam))
    add("nash_williams_identity", True, check_nash_williams(p, fam))
    add("transience_increments", True, check_transience(p, fam))
    add("frontier_resistance_plateau", False, check_frontier_plateau(p, fam))
    add("solver_vs_pseudoinverse", True, check_solver_oracle(p, fam, seed))
    add("annulus_resistance_slope", False, check_annulus(p, fam, seed))
    (proj_ok, speed_ok), wd = check_walk(p, fam, seed)
    add("walk_projection_inequality", True, (proj_ok, wd))
    add("walk_speed_exponent", False, (speed_ok, {k: wd[k] for k in ("exponent", "band", "speed_threshold")}))
    add("projected_walk_law", True, check_projection_structure(p, fam))
    add("ball_convexity_and_complements", True, check_connectivity(p, fam))
    add("level_coupling", True, check_coupling(p, fam, seed))

    hard_fail = [c.name for c in checks if c.hard and not c.passed]
    soft_fail = [c.name for c in checks if not c.hard and not c.passed]
    return {"config": cfg, "profile": profile, "checks": [c.to_dict() for c in checks],
            "hard_failures": hard_fail, "soft_failures": soft_fail, "passed": not hard_fail}
