import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tilegrowth import (ColumnSpec, FamilyParams, Tile, TilingError, alpha, boundary_sets, concat,
                        gamma_bk, make_column_tiling, max_side, mixed_power_for_degree, power,
                        product, stack, tower, unit_tiling)
from tilegrowth.tiling import from_tiles

H = make_column_tiling([3, 6, 3])
I = unit_tiling()


def tile_set(t):
    return sorted(x.key() for x in t.tiles)


def test_column_tiling_examples():
    assert len(H) == 12
    assert list(H.column_counts()) == [3, 6, 3]
    assert len(I) == 1 and I.tile(0).ell1 == 1
    t = make_column_tiling([4, 4, 52, 4])
    assert len(t) == 64 and list(t.column_counts()) == [4, 4, 52, 4]
    # column 2 tiles are 1/4 wide and 1/52 tall
    a = t.tile(8)
    assert (a.ell1, a.ell2) == (Fraction(1, 4), Fraction(1, 52))


def test_column_tiling_errors():
    with pytest.raises(TilingError):
        make_column_tiling([])
    with pytest.raises(TilingError):
        make_column_tiling([3, 0, 3])


def test_gamma_bk_examples():
    assert gamma_bk(4, 4).gamma == (4, 4, 4, 4)
    assert gamma_bk(4, 16).gamma == (4, 4, 52, 4)
    assert FamilyParams(4, 16).d_g == pytest.approx(3.0)
    assert FamilyParams(4, 16).Gamma == Fraction(10, 13)
    for b, k in [(3, 16), (4, 3), (5, 4)]:
        with pytest.raises(TilingError):
            gamma_bk(b, k)


@pytest.mark.parametrize("b", range(4, 65, 5))
def test_gamma_bk_invariants(b):
    for k in range(b, 65):
        g = gamma_bk(b, k).gamma
        assert len(g) == b and sum(g) == b * k
        assert min(g) == b and g[0] == g[-1] == b
        assert not gamma_bk(b, k).violations()


def test_d_w_value():
    # d_w = 3 + log_4(10/13)
    assert 1 / FamilyParams(4, 16).d_w == pytest.approx(0.35584, abs=1e-4)


def test_product_counts_and_sides():
    hh = product(H, H)
    assert len(hh) == 144
    assert len(power(H, 3)) == 1728
    assert len(power(make_column_tiling([4, 4, 52, 4]), 2)) == 4096
    sides = {(x.ell1, x.ell2) for x in hh.tiles}
    want = {(a.ell1 * b.ell1, a.ell2 * b.ell2) for a in H.tiles for b in H.tiles}
    assert sides == want


def test_identity_and_power_zero():
    t = make_column_tiling([2, 1, 3])
    assert product(I, t) == t and product(t, I) == t
    assert power(H, 0) == I
    with pytest.raises(TilingError):
        power(H, -1)


def test_product_rejects_non_unit():
    with pytest.raises(TilingError):
        product(concat(I, I), H)


def test_associativity_H():
    a = product(product(H, H), H)
    b = product(H, product(H, H))
    assert tile_set(a) == tile_set(b)


specs = st.lists(st.integers(1, 4), min_size=1, max_size=3)


@settings(max_examples=30, deadline=None)
@given(specs, specs, specs)
def test_associativity_random(s, t, u):
    S, T, U = map(make_column_tiling, (s, t, u))
    a = product(product(S, T), U)
    b = product(S, product(T, U))
    assert a == b
    assert len(a) == len(S) * len(T) * len(U)


@settings(max_examples=25, deadline=None)
@given(specs, specs)
def test_product_cardinality_and_validation(s, t):
    S, T = make_column_tiling(s), make_column_tiling(t)
    st_ = product(S, T)
    assert len(st_) == len(S) * len(T)
    st_.validate()
    area = sum(x.ell1 * x.ell2 for x in st_.tiles)
    assert area == 1


def test_concat_examples():
    t = concat(power(H, 0), H)
    assert len(t) == 13 and t.region.ell1 == 2 and t.region.ell2 == 1
    assert len(concat(H, power(H, 2))) == 156
    assert len(concat(I, I)) == 2
    with pytest.raises(TilingError):
        concat(I, stack(I, 2))


def test_stack_examples():
    assert stack(H, 1) == H
    t = stack(I, 3)
    assert len(t) == 3 and t.region.ell2 == 3
    t = stack(H, 2)
    assert len(t) == 24 and (t.region.ell1, t.region.ell2) == (1, 2)
    with pytest.raises(TilingError):
        stack(H, 0)


def test_tower_size():
    assert len(tower(H, 3)) == 1 + 12 + 144 + 1728


def test_mixed_power_for_degree():
    with pytest.raises(TilingError):
        mixed_power_for_degree(2, 1)
    t, hs = mixed_power_for_degree(2.1, 1)
    assert hs == [0] and t == make_column_tiling([4, 4, 4, 4])
    for d, n in [(3, 2), (2.5, 3), (3.7, 4)]:
        t, hs = mixed_power_for_degree(d, n)
        used = 0.0
        for j, h in enumerate(hs, start=1):
            used += math.log(1 + h / 4, 4)
            assert used <= (d - 2) * j + 1e-12
            # maximal: h + 1 would break the constraint
            assert used - math.log(1 + h / 4, 4) + math.log(1 + (h + 1) / 4, 4) > (d - 2) * j
        assert abs(used - (d - 2) * n) <= 1
        assert len(t) == math.prod(4 * (4 + h) for h in hs)


def test_alpha_and_max_side():
    assert alpha(H) == 2
    assert alpha(I) == 1
    assert alpha(power(H, 2)) <= 2
    assert max_side(I) == 1
    assert max_side(make_column_tiling([4, 4, 52, 4])) == Fraction(1, 4)
    for k in range(1, 4):
        assert max_side(power(H, k)) == Fraction(1, 3**k)


def test_alpha_generic_path_agrees():
    # the explicit-tile path must agree with the column fast path
    t = power(H, 2)
    explicit = from_tiles(t.tiles)
    assert not explicit.has_uniform_columns
    assert alpha(explicit) == alpha(t)


@pytest.mark.parametrize("spec", [[4, 4, 4, 4], [4, 4, 52, 4], [3, 6, 3], [5, 10, 5]])
def test_alpha_monotone_in_powers(spec):
    t = make_column_tiling(spec)
    a1 = alpha(t)
    assert a1 <= Fraction(sum(spec), len(spec))
    for n in (2, 3):
        assert alpha(power(t, n, validate=False)) <= a1


def test_boundary_sets():
    for n in range(0, 4):
        bs = boundary_sets(power(H, n))
        assert len(bs.left) == len(bs.right) == 3**n
    bs = boundary_sets(I)
    assert list(bs.left) == list(bs.right) == [0] and not bs.nondegenerate
    assert boundary_sets(H).nondegenerate
    hh = product(H, H)
    assert len(boundary_sets(hh).left) == len(boundary_sets(H).left) ** 2
    # column form and explicit form agree
    explicit = from_tiles(hh.tiles)
    for a, b in zip(boundary_sets(hh).__dict__.values(), boundary_sets(explicit).__dict__.values()):
        assert np.array_equal(np.sort(a), np.sort(b))


@pytest.mark.parametrize("bk", [(4, 16), (4, 4), (5, 9), (6, 20)])
def test_consecutive_column_divisibility(bk):
    for n in (1, 2, 3):
        c = power(make_column_tiling(gamma_bk(*bk)), n, validate=False).column_counts().astype(int)
        for h, h2 in zip(c, c[1:]):
            assert max(h, h2) % min(h, h2) == 0


def test_validation_rejects_overlap_and_gap():
    a = Tile((0, 0), 1, Fraction(1, 2))
    b = Tile((0, Fraction(1, 3)), 1, Fraction(2, 3))
    with pytest.raises(TilingError):
        from_tiles([a, b], Tile((0, 0), 1, 1))
    with pytest.raises(TilingError):
        from_tiles([a], Tile((0, 0), 1, 1))


def test_canonical_order():
    t = from_tiles(list(reversed(H.tiles)))
    keys = [(x.p[0], x.p[1]) for x in t.tiles]
    assert keys == sorted(keys)
    assert t == H


def test_tile_rejects_nonpositive():
    with pytest.raises(TilingError):
        Tile((0, 0), 0, 1)


def test_columnspec_reports_violations():
    assert ColumnSpec((3, 6, 3)).violations() == []
    assert ColumnSpec((4, 3, 5)).violations()
