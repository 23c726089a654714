from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse.csgraph import connected_components, shortest_path

from tilegrowth import build_cylinder, build_dual, gamma_bk, make_column_tiling, power
from tilegrowth.connectivity import (ball_complement_connected, column_arcs,
                                     complement_is_vertically_convex, exhaustive_check,
                                     guarantee_radius, horizontal_line_certificate,
                                     recheck_convexity_witness, verify_line_certificate,
                                     vertical_convexity_check)
from tilegrowth.dual import DualGraph, _csr_from_pairs
from tilegrowth.growth import ball

T44 = make_column_tiling(gamma_bk(4, 4))
T416 = make_column_tiling(gamma_bk(4, 16))


def test_column_arcs():
    assert column_arcs([], 5) == []
    assert column_arcs([0, 1, 2, 3, 4], 5) == [(0, 4)]
    assert column_arcs([1, 2], 5) == [(1, 2)]
    # wraps on a cycle, splits on a path
    assert column_arcs([4, 0], 5) == [(4, 0)]
    assert column_arcs([4, 0], 5, cyclic=False) == [(0, 0), (4, 4)]
    assert sorted(column_arcs([0, 2], 5)) == [(0, 0), (2, 2)]


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12).flatmap(lambda h: st.tuples(st.just(h), st.sets(st.integers(0, h - 1)))),
       st.booleans())
def test_column_arcs_cover_rows(hr, cyclic):
    h, rows = hr
    arcs = column_arcs(sorted(rows), h, cyclic)
    covered = set()
    for a, b in arcs:
        r = a
        while True:
            assert r not in covered
            covered.add(r)
            if r == b:
                break
            r = (r + 1) % h
    assert covered == rows
    # arcs are maximal: the rows just outside each arc are absent
    if rows and len(rows) < h:
        for a, b in arcs:
            before, after = (a - 1) % h, (b + 1) % h
            if cyclic or a > 0:
                assert before not in rows
            if cyclic or b < h - 1:
                assert after not in rows


def _bent_graph():
    # column 0 = {0, 1, 2}, column 1 = {3}; 0 and 2 meet through 3, 1 hangs off 2 via 4
    e = np.array([[0, 3], [3, 2], [2, 4], [4, 1]])
    ip, ix, tg = _csr_from_pairs(5, e[:, 0], e[:, 1], np.ones(4, dtype=np.uint8))
    return DualGraph(ip, ix, tg, column_offsets=np.array([0, 3, 4, 5]))


def test_constructed_violation_and_recheck():
    g = _bent_graph()
    rep = vertical_convexity_check(g, 0, 2, cyclic=False)
    assert not rep.convex
    (bad,) = rep.violations()
    assert bad.column == 0 and bad.witness["in"] == [0, 2] and bad.witness["gap"] == [1, 1]
    assert recheck_convexity_witness(g, 0, 2, bad.witness)
    # the same ball is a single arc once the column closes into a cycle
    assert vertical_convexity_check(g, 0, 2, cyclic=True).convex


@pytest.mark.parametrize("t", [T44, T416, power(T44, 2)])
def test_balls_convex_on_cylinders(t):
    g = build_cylinder(t)
    D = shortest_path(g.adjacency(), unweighted=True)
    for v in range(0, g.n, max(1, g.n // 40)):
        for R in range(0, int(D[v].max()) + 1):
            rep = vertical_convexity_check(g, v, R)
            assert rep.convex, rep.to_dict()


def test_guarantee_radius():
    assert guarantee_radius(build_cylinder(T44)) == Fraction(4, 3)
    assert guarantee_radius(build_cylinder(power(T416, 2))) == Fraction(16, 3)


def test_complement_matches_scipy():
    g = build_cylinder(power(T44, 2))
    A = g.adjacency().tocsr()
    for v in range(0, g.n, 17):
        for R in range(0, 9):
            b = ball(g, v, R)
            keep = np.setdiff1d(np.arange(g.n), b)
            rep = ball_complement_connected(g, v, R)
            if len(keep) == 0:
                assert rep.connected
                continue
            k, _ = connected_components(A[keep][:, keep], directed=False)
            assert rep.connected == (k == 1)
            if not rep.connected:
                a, c = rep.witness
                assert a in keep and c in keep


def test_disconnected_complement_has_witness():
    # outside the guaranteed range a ball can cut a short cylinder in two
    g = build_cylinder(T44)
    found = False
    for v in range(g.n):
        for R in range(1, 4):
            rep = ball_complement_connected(g, v, R)
            if not rep.connected:
                found = True
                assert not rep.in_guarantee and rep.witness is not None
                assert rep.certificate is None
    assert found


def test_line_certificate_roundtrip():
    g = build_cylinder(power(T416, 2))
    b = ball(g, 100, 3)
    cert = horizontal_line_certificate(g, b)
    assert cert is not None and cert["valid"]
    assert verify_line_certificate(g, b, cert)
    # a forged certificate through a ball tile is rejected
    forged = dict(cert, tiles=list(cert["tiles"]))
    forged["tiles"][len(forged["tiles"]) // 2] = int(b[0])
    assert not verify_line_certificate(g, b, forged)


def test_complement_convexity():
    g = build_cylinder(power(T44, 2))
    for v in (0, 40, 200):
        for R in range(0, 6):
            assert complement_is_vertically_convex(g, v, R)


def test_exhaustive_small():
    rep = exhaustive_check(build_cylinder(power(T44, 2)), "T44^2")
    assert rep.passed, rep.to_dict()
    assert rep.checks == 256 * 6
    d = rep.to_dict()
    assert d["passed"] and d["radii"] == [0, 1, 2, 3, 4, 5]


def test_exhaustive_check_on_plain_dual():
    # without wrap edges the columns are paths; the check still runs
    rep = exhaustive_check(build_dual(T416), "T416 dual", radii=[0, 1])
    assert rep.checks == 64 * 2 and rep.convexity_violations == 0
