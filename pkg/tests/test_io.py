import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tilegrowth import (TilingError, build_cylinder, build_dual, concat, gamma_bk, linearize,
                        make_column_tiling, power)
from tilegrowth.io import (dumps, graph_from_dict, graph_to_dict, load, parse_q, q, save,
                           tiling_from_dict, tiling_to_dict)

H = make_column_tiling([3, 6, 3])


def test_rational_format():
    assert q(Fraction(1, 3)) == "1/3"
    assert q(2) == "2/1"
    assert parse_q("6/4") == Fraction(3, 2)
    assert parse_q(5) == 5
    with pytest.raises(TilingError):
        parse_q(0.5)


def test_dumps_is_canonical():
    assert dumps({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}\n'
    with pytest.raises(ValueError):
        dumps({"x": float("nan")})


specs = st.lists(st.integers(1, 5), min_size=1, max_size=4)


@settings(max_examples=25, deadline=None)
@given(specs, st.integers(1, 2))
def test_tiling_roundtrip(spec, n):
    t = power(make_column_tiling(spec), n)
    d = json.loads(dumps(tiling_to_dict(t)))
    back = tiling_from_dict(d)
    assert back == t
    assert dumps(tiling_to_dict(back)) == dumps(d)


def test_tiling_dict_shape():
    d = tiling_to_dict(H)
    assert d["region"] == {"p": ["0/1", "0/1"], "l": ["1/1", "1/1"]}
    assert d["tiles"][0] == {"id": 0, "p": ["0/1", "0/1"], "l": ["1/3", "1/3"]}
    assert d["tiles"][3] == {"id": 3, "p": ["1/3", "0/1"], "l": ["1/3", "1/6"]}
    assert tiling_from_dict(tiling_to_dict(concat(H, H))) == concat(H, H)


def test_tiling_rejects_bad_ids_and_overlaps():
    d = tiling_to_dict(H)
    d["tiles"][0]["id"], d["tiles"][1]["id"] = 1, 0
    with pytest.raises(TilingError):
        tiling_from_dict(d)
    d = tiling_to_dict(H)
    d["tiles"][1]["p"] = ["0/1", "1/6"]
    with pytest.raises(TilingError):
        tiling_from_dict(d)


@pytest.mark.parametrize("make", [lambda: build_dual(power(H, 2)),
                                  lambda: build_cylinder(power(make_column_tiling(gamma_bk(4, 16)), 2))])
def test_graph_roundtrip(make, tmp_path):
    g = make()
    path = tmp_path / "g.json"
    save(graph_to_dict(g), path)
    h = graph_from_dict(load(path))
    assert type(h) is type(g)
    assert np.array_equal(h.indptr, g.indptr) and np.array_equal(h.indices, g.indices)
    assert np.array_equal(h.tags, g.tags)
    assert np.array_equal(h.column_offsets, g.column_offsets)


def test_weighted_roundtrip():
    L = linearize(build_dual(power(H, 2)))
    M = graph_from_dict(json.loads(dumps(graph_to_dict(L))))
    assert np.array_equal(M.edges, L.edges)
    assert np.array_equal(M.conductance, L.conductance)
    assert np.array_equal(M.self_loops, L.self_loops)


def test_graph_validation():
    d = graph_to_dict(build_dual(H))
    bad = dict(d, edges=d["edges"] + [[0, 99]])
    with pytest.raises(ValueError):
        graph_from_dict(bad)
    bad = dict(d, columns=[[0, 1], [2]])
    with pytest.raises(ValueError):
        graph_from_dict(bad)
