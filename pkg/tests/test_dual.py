from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tilegrowth import (TilingError, alpha, build_cylinder, build_dual, columns, concat, cylindrify,
                        gamma_bk, linearize, make_column_tiling, power, product, stack, tower,
                        unit_tiling)
from tilegrowth.dual import degree_bound, edge_count_between
from tilegrowth.tiling import Tile, from_tiles

H = make_column_tiling([3, 6, 3])
I = unit_tiling()


def brute_edges(t):
    """O(N^2) oracle: tiles share a segment of positive length (exact Fractions)."""
    tiles = t.tiles
    out = set()
    for i, a in enumerate(tiles):
        for j in range(i + 1, len(tiles)):
            b = tiles[j]
            ov_x = min(a.x1, b.x1) - max(a.p[0], b.p[0])
            ov_y = min(a.y1, b.y1) - max(a.p[1], b.p[1])
            touch_v = (a.x1 == b.p[0] or b.x1 == a.p[0]) and ov_y > 0
            touch_h = (a.y1 == b.p[1] or b.y1 == a.p[1]) and ov_x > 0
            if touch_v or touch_h:
                out.add((i, j))
    return out


def graph_edges(g):
    return {tuple(map(int, e)) for e in g.edges()}


specs = st.lists(st.integers(1, 5), min_size=1, max_size=4)


@settings(max_examples=40, deadline=None)
@given(specs, specs, st.integers(0, 2))
def test_adjacency_matches_brute_force(s, t, kind):
    S, T = make_column_tiling(s), make_column_tiling(t)
    tl = [product(S, T), concat(S, T), stack(S, 2)][kind]
    if len(tl) > 400:
        return
    want = brute_edges(tl)
    for method in ("sweep", "columnar") if tl.has_uniform_columns else ("sweep",):
        g = build_dual(tl, method=method)
        assert graph_edges(g) == want
        assert g.is_simple_symmetric()


def test_brute_force_on_non_columnar_tiling():
    # a pinwheel-like tiling with corner-only contacts
    tiles = [Tile((0, 0), 2, 1), Tile((2, 0), 1, 2), Tile((1, 2), 2, 1), Tile((0, 1), 1, 2),
             Tile((1, 1), 1, 1)]
    t = from_tiles(tiles, Tile((0, 0), 3, 3))
    g = build_dual(t)
    assert graph_edges(g) == brute_edges(t)
    assert g.degrees.tolist().count(4) == 1


def test_H_fig4_neighbourhoods():
    g = build_dual(H)
    # middle column ids 3..8; tile 5 is interior there
    x = 5
    nb, tags = g.neighbors(x), g.neighbor_tags(x)
    vertical = sorted(nb[tags == 1].tolist())
    horizontal = sorted(nb[tags == 2].tolist())
    assert vertical == [4, 6]
    assert len(horizontal) == 2
    assert horizontal[0] in range(0, 3) and horizontal[1] in range(9, 12)


def test_examples():
    g = build_dual(concat(I, I))
    assert g.n == 2 and g.n_edges == 1
    assert build_dual(H).n == 12
    g2 = build_dual(power(H, 2))
    assert g2.degrees.max() <= 12


def test_connectivity_flag():
    tiles = [Tile((0, 0), 1, 1), Tile((1, 1), 1, 1), Tile((1, 0), 1, 1), Tile((0, 1), 1, 1)]
    assert build_dual(from_tiles(tiles)).is_connected()
    from tilegrowth.dual import DualGraph

    # two isolated vertices: the flag is computed, not assumed
    assert not DualGraph([0, 0, 0], [], []).is_connected()


@pytest.mark.parametrize("n", [1, 2, 3])
def test_columnar_equals_sweep(n):
    for spec in ([3, 6, 3], gamma_bk(4, 16), gamma_bk(5, 7)):
        t = power(make_column_tiling(spec), n, validate=False)
        if len(t) > 30000:
            continue
        a, b = build_dual(t, method="columnar"), build_dual(t, method="sweep")
        assert np.array_equal(a.indptr, b.indptr)
        assert np.array_equal(a.indices, b.indices)
        assert np.array_equal(a.tags, b.tags)


def test_degree_bound_everywhere():
    for t in [H, power(H, 2), power(H, 3), tower(H, 2), make_column_tiling(gamma_bk(4, 16)),
              power(make_column_tiling(gamma_bk(4, 16)), 2)]:
        g = build_dual(t)
        assert g.degrees.max() <= degree_bound(alpha(t, graph=g))


def test_columns():
    assert [len(c) for c in columns(H)] == [3, 6, 3]
    assert len(columns(power(make_column_tiling(gamma_bk(4, 16)), 2))) == 16
    assert columns(I) == [[0]]


def test_linearize_H():
    L = linearize(build_dual(H))
    assert L.n == 3
    assert L.edges.tolist() == [[0, 1], [1, 2]]
    assert L.conductance.tolist() == [6, 6]
    assert L.self_loops.tolist() == [6, 12, 6]


def test_linearize_single_column():
    L = linearize(build_dual(I))
    assert L.n == 1 and len(L.edges) == 0 and L.self_loops.tolist() == [2]


@pytest.mark.parametrize("t", [H, power(H, 2), power(make_column_tiling(gamma_bk(4, 16)), 2)])
def test_linearize_accounting(t):
    g = build_dual(t)
    L = linearize(g)
    # every vertex weight is the self loop plus incident conductances
    assert L.vertex_weights.sum() == L.self_loops.sum() + 2 * L.conductance.sum()
    # conductances by brute force over graph edges
    col = g.column_of()
    e = g.edges()
    cross = e[col[e[:, 0]] != col[e[:, 1]]]
    counts = {}
    for u, v in cross:
        key = (int(col[u]), int(col[v]))
        counts[key] = counts.get(key, 0) + 1
    assert {tuple(k): int(c) for k, c in zip(L.edges.tolist(), L.conductance)} == counts
    sizes = np.diff(g.column_offsets)
    for c in range(len(sizes) - 1):
        assert counts[(c, c + 1)] == edge_count_between(int(sizes[c]), int(sizes[c + 1]))


def test_cylinder_H():
    g = build_cylinder(H)
    off = g.column_offsets
    for c, size in enumerate([3, 6, 3]):
        a = int(off[c])
        ids = set(range(a, a + size))
        for u in ids:
            same = [v for v in g.neighbors(u).tolist() if v in ids]
            assert len(same) == 2  # a cycle
    g4 = build_cylinder(make_column_tiling([4, 4, 4, 4]))
    assert all(d in (3, 4) for d in g4.degrees.tolist())


def test_cylindrify_matches_direct():
    for t in [H, power(H, 2), power(make_column_tiling(gamma_bk(4, 16)), 2)]:
        a, b = cylindrify(build_dual(t)), build_cylinder(t)
        assert np.array_equal(a.indptr, b.indptr) and np.array_equal(a.indices, b.indices)
        assert np.array_equal(a.tags, b.tags)


def test_cylinder_refusals():
    with pytest.raises(TilingError):
        build_cylinder(power(H, 0))
    with pytest.raises(TilingError):
        build_cylinder(make_column_tiling([2, 2]))
    with pytest.raises(TilingError):
        cylindrify(build_cylinder(H))


@pytest.mark.parametrize("bk,n", [((4, 4), 2), ((4, 16), 2), ((5, 9), 2)])
def test_cylinder_vertical_symmetry(bk, n):
    from tilegrowth.dual import column_neighbour_counts

    g = build_cylinder(power(make_column_tiling(gamma_bk(*bk)), n, validate=False))
    for c in range(len(g.column_offsets) - 1):
        left, same, right, skips = column_neighbour_counts(g, c)
        assert not skips
        assert len(set(left.tolist())) == 1 and len(set(right.tolist())) == 1
        assert set(same.tolist()) == {2}


def test_projection_distance_inequality():
    from scipy.sparse.csgraph import shortest_path

    g = build_cylinder(power(make_column_tiling(gamma_bk(4, 16)), 2))
    L = linearize(g)
    dg = shortest_path(g.adjacency(), unweighted=True)
    col = g.column_of()
    dl = np.abs(col[:, None] - col[None, :])
    assert np.all(dg >= dl)
    assert L.n == 16


def test_weighted_graph_validation():
    from tilegrowth.dual import WeightedGraph

    with pytest.raises(ValueError):
        WeightedGraph(2, np.array([[0, 1]]), np.array([0.0]), np.array([1.0, 1.0]))
