"""JSON serialization of tilings and graphs (deterministic key and element order)."""
from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .dual import CylindricalGraph, DualGraph, WeightedGraph, _csr_from_pairs
from .tiling import Tile, Tiling, TilingError, from_tiles


def q(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_q(s) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    if not isinstance(s, str):
        raise TilingError(f"rational must be a 'num/den' string, got {s!r}")
    return Fraction(s)


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def tiling_to_dict(t: Tiling) -> dict:
    X, Y, W, H, dx, dy = t.coords()
    r = t.region
    tiles = []
    for i in range(len(X)):
        tiles.append({
            "id": i,
            "p": [q(Fraction(int(X[i]), dx)), q(Fraction(int(Y[i]), dy))],
            "l": [q(Fraction(int(W[i]), dx)), q(Fraction(int(H[i]), dy))],
        })
    return {"region": {"p": [q(r.p[0]), q(r.p[1])], "l": [q(r.ell1), q(r.ell2)]},
            "kind": t.kind, "tiles": tiles}


def tiling_from_dict(d: dict, validate: bool = True) -> Tiling:
    r = d["region"]
    region = Tile((parse_q(r["p"][0]), parse_q(r["p"][1])), parse_q(r["l"][0]), parse_q(r["l"][1]))
    tiles = [Tile((parse_q(a["p"][0]), parse_q(a["p"][1])), parse_q(a["l"][0]), parse_q(a["l"][1]),
                  int(a.get("id", -1))) for a in d["tiles"]]
    t = from_tiles(tiles, region, validate=validate)
    ids = [a.get("id") for a in d["tiles"]]
    if all(i is not None for i in ids):
        # stored ids must agree with the canonical order
        order = sorted(range(len(tiles)), key=lambda i: (tiles[i].p[0], tiles[i].p[1]))
        if [ids[i] for i in order] != list(range(len(tiles))):
            raise TilingError("tile ids are not in canonical (p_x, p_y) order")
    return t


def graph_to_dict(g) -> dict:
    if isinstance(g, WeightedGraph):
        return {"n": int(g.n), "edges": g.edges.astype(int).tolist(),
                "weights": [float(c) for c in g.conductance],
                "self_loops": [float(c) for c in g.self_loops], "kind": "weighted"}
    e = g.edges()
    out = {"n": int(g.n), "edges": e.astype(int).tolist(),
           "tags": g.edge_tags().astype(int).tolist(),
           "kind": "cylinder" if isinstance(g, CylindricalGraph) else "dual"}
    if g.column_offsets is not None:
        off = g.column_offsets
        out["columns"] = [list(range(int(off[c]), int(off[c + 1]))) for c in range(len(off) - 1)]
    return out


def graph_from_dict(d: dict, tiling: Tiling | None = None):
    n = int(d["n"])
    e = np.asarray(d["edges"], dtype=np.int64).reshape(-1, 2)
    if d.get("kind") == "weighted":
        return WeightedGraph(n, e, np.asarray(d["weights"], float), np.asarray(d["self_loops"], float))
    if len(e) and (e.min() < 0 or e.max() >= n):
        raise ValueError("edge endpoint out of range")
    tags = np.asarray(d.get("tags", [0] * len(e)), dtype=np.uint8)
    indptr, indices, tg = _csr_from_pairs(n, e[:, 0], e[:, 1], tags)
    off = None
    cols = d.get("columns")
    if cols:
        flat = [v for c in cols for v in c]
        if flat != list(range(n)):
            raise ValueError("columns must partition 0..n-1 in order")
        off = np.cumsum([0] + [len(c) for c in cols])
    cls = CylindricalGraph if d.get("kind") == "cylinder" else DualGraph
    return cls(indptr, indices, tg, tiling, off)


def save(obj, path):
    with open(path, "w") as f:
        f.write(dumps(obj))


def load(path):
    with open(path) as f:
        return json.load(f)
