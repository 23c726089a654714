"""Acceptance suite: one test per criterion, each at full scale and tolerance.

Every test prints a single ``criterion N: PASS|FAIL ...`` line; the lines are
repeated in the terminal summary.  Run standalone with
``python tests/test_acceptance.py`` for just the summary.
"""
import time
from fractions import Fraction

import pytest

from tilegrowth import alpha, build_dual, gamma_bk, make_column_tiling, power
from tilegrowth.cli import main
from tilegrowth.dual import degree_bound
from tilegrowth.resistance import nash_williams_column_bound
from tilegrowth.suite import (PROFILES, check_annulus, check_associativity, check_connectivity,
                              check_counting, check_coupling, check_diameters, check_divisibility,
                              check_frontier_plateau, check_growth_bound, check_growth_fit,
                              check_rho_recursion, check_solver_oracle, check_transience, check_walk)

P = PROFILES["full"]
SEED = 0
H = make_column_tiling([3, 6, 3])
T = make_column_tiling(gamma_bk(4, 16))
RESULTS = {}


def report(n, ok, msg, t0):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {msg}  ({time.perf_counter() - t0:.0f} s)"
    RESULTS[n] = line
    print(line)
    assert ok, line


def test_criterion_01_counting_and_diameter():
    t0 = time.perf_counter()
    ok_c, c = check_counting(P, None)
    ok_d, d = check_diameters(P, None)
    diams = {f"{r['family']}^{r['n']}": r["diameter"] for r in d["rows"]}
    report(1, ok_c and ok_d, f"diam {diams}", t0)


def test_criterion_02_structure():
    t0 = time.perf_counter()
    ok = True
    alphas, worst = [], 0
    for n in range(1, 6):
        t = power(H, n, validate=False)
        g = build_dual(t)
        a = alpha(t, graph=g)
        alphas.append(str(a))
        ok &= a <= 2
        ok &= int(g.degrees.max()) <= degree_bound(a)
        worst = max(worst, int(g.degrees.max()))
    for n in range(1, 4):
        t = power(T, n, validate=False)
        g = build_dual(t)
        ok &= int(g.degrees.max()) <= degree_bound(alpha(t, graph=g))
    ok_a, a = check_associativity(P, None, SEED)
    ok_v, _ = check_divisibility(P, None)
    report(2, ok and ok_a and ok_v,
           f"alpha(H^n) {alphas}, max degree {worst}, triples {a['triples']}", t0)


def test_criterion_03_growth():
    t0 = time.perf_counter()
    ok_f, f = check_growth_fit(P, None, SEED)
    ok_b, b = check_growth_bound(P, None, SEED)
    fits = ", ".join(f"{r['family']}^{r['n']} {r['exponent']:.3f} (target {r['target']:.3f}, radii "
                     f"{r['radii']})" for r in f["rows"])
    report(3, ok_f and ok_b, f"{fits}; 192 bound {'ok' if ok_b else 'violated'}", t0)


def test_criterion_04_resistance_recursion():
    t0 = time.perf_counter()
    ok_r, r = check_rho_recursion(P, None)
    ok = ok_r
    for t0_, ratio, nmax in ((H, Fraction(5, 6), 5), (T, Fraction(10, 13), 4)):
        for n in range(1, nmax + 1):
            ok &= nash_williams_column_bound(power(t0_, n, validate=False)) == ratio**n
    slack = min(row["bound"] - row["rho"] for row in r["rows"])
    report(4, ok, f"rho(H^n) {[round(v, 6) for v in r['rho']]}, min slack {slack:.2e}", t0)


def test_criterion_05_transience():
    t0 = time.perf_counter()
    ok_t, t = check_transience(P, None)
    ok_p, p = check_frontier_plateau(P, None)
    inc = [round(x, 4) for x in p["relative_increments"]]
    ratios = [None if x is None else round(x, 3) for x in t["ratios"]]
    report(5, ok_t and ok_p,
           f"increment ratios {ratios}; plateau radii {p['radii']} increments {inc} (tol {p['tol']})", t0)


def test_criterion_06_solver_oracle():
    t0 = time.perf_counter()
    ok, d = check_solver_oracle(P, None, SEED)
    sizes = [r["n"] for r in d["rows"]]
    report(6, ok, f"{d['instances']} instances up to {max(sizes)} vertices, max rel err "
                  f"{d['max_rel_err']:.1e}", t0)


def test_criterion_07_annulus():
    t0 = time.perf_counter()
    ok, d = check_annulus(P, None, SEED)
    msg = f"radii {d['radii']} medians {d['median']} slope {d['slope']} target {d['target']:.3f}"
    if d["refused_radii"]:
        msg += f"; B(x, 2R) = V for R in {d['refused_radii']}"
    report(7, ok, msg, t0)


def test_criterion_08_walk_speed():
    t0 = time.perf_counter()
    (ok_proj, ok_speed), d = check_walk(P, None, SEED)
    report(8, ok_proj and ok_speed,
           f"exponent {d['exponent']:.3f} >= {d['speed_threshold']:.3f}, band {d['band']}, "
           f"{d['replicas']} replicas, projection {'ok' if ok_proj else 'violated'}", t0)


def test_criterion_09_connectivity():
    t0 = time.perf_counter()
    ok, d = check_connectivity(P, None)
    msg = "; ".join(f"{r['graph']}: {r['checks']} checks, {r['convexity_violations']} convexity, "
                    f"{r['complement_failures']} complement, {r['certificate_failures']} certificate"
                    for r in d["rows"])
    report(9, ok, msg, t0)


def test_criterion_10_coupling():
    t0 = time.perf_counter()
    ok, d = check_coupling(P, None, SEED)
    report(10, ok, f"levels {d['levels']}, {d['roots']} roots, {d['clean']} clean, "
                   f"{d['violations']} violations", t0)


def test_criterion_11_determinism(tmp_path):
    t0 = time.perf_counter()
    out = tmp_path / "report.json"
    texts = []
    for _ in range(2):
        code = main(["verify", "--bk", "4,16", "--n", "2", "--profile", "quick", "--seed", "7",
                     "--out", str(out)])
        texts.append(out.read_bytes())
    same = texts[0] == texts[1]
    report(11, same and code in (0, 1), f"two verify runs, {len(texts[0])} bytes, identical={same}", t0)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
