"""Command line interface: ``tilegrowth build | verify | render``.

Exit codes: 0 pass, 1 assertion failure, 2 usage error, 3 budget refusal.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .dual import build_cylinder, build_dual, linearize
from .io import dumps, graph_to_dict, load, tiling_from_dict, tiling_to_dict
from .suite import BudgetError, estimate_bytes, run_suite
from .svg import MAX_TILES, tiling_svg
from .tiling import (ColumnSpec, TilingError, concat_all, gamma_bk, make_column_tiling,
                     mixed_power_for_degree, power)

log = logging.getLogger("tilegrowth")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def _ints(s: str) -> list[int]:
    try:
        out = [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {s!r}")
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tilegrowth", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def family(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--gamma", type=_ints, help="column spec, e.g. 3,6,3")
        g.add_argument("--bk", type=_ints, help="family parameters b,k, e.g. 4,16")
        g.add_argument("--degree", type=float, help="target growth degree d > 2 (mixed power)")
        p.add_argument("--n", type=int, default=None, help="power / level")

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--budget", type=float, default=8.0, help="memory budget in GiB")
        p.add_argument("-v", "--verbose", action="store_true")

    b = sub.add_parser("build", help="construct a tiling and its graph and serialize them")
    family(b)
    common(b)
    b.add_argument("--format", choices=["json", "csv"], default="json")
    b.add_argument("--graph", choices=["dual", "cylinder", "linear", "none"], default="dual")

    v = sub.add_parser("verify", help="run the verification suite")
    family(v)
    common(v)
    v.add_argument("--profile", choices=["quick", "default", "full"], default="default")
    v.add_argument("--replicas", type=int, default=None)
    v.add_argument("--time-grid", type=_ints, default=None)
    v.add_argument("--radius-grid", type=_ints, default=None)
    v.add_argument("--format", choices=["json", "csv"], default="json")
    v.add_argument("--graph", type=str, default=None, help="serialized graph to check against the family")

    r = sub.add_parser("render", help="write an SVG picture of a tiling")
    family(r)
    common(r)
    r.add_argument("--format", choices=["svg"], default="svg")
    r.add_argument("--tower", action="store_true", help="render T^1 | T^2 | ... | T^n")
    r.add_argument("--input", type=str, default=None, help="tiling JSON to render")
    return ap


def resolve(args) -> dict:
    """Validated, fully explicit configuration (embedded in every output)."""
    cfg = {"subcommand": args.subcommand, "seed": args.seed, "out": args.out,
           "budget": args.budget, "format": args.format, "version": __version__}
    cfg["gamma"] = args.gamma
    cfg["bk"] = args.bk
    cfg["degree"] = args.degree
    cfg["n"] = args.n
    if args.n is not None and args.n < 0:
        raise UsageError("--n must be nonnegative")
    if args.bk is not None and len(args.bk) != 2:
        raise UsageError("--bk takes exactly two integers b,k")
    if args.gamma is not None:
        ColumnSpec(tuple(args.gamma))
    if args.bk is not None:
        gamma_bk(*args.bk)
    if args.degree is not None and args.degree <= 2:
        raise UsageError("--degree must exceed 2")
    if args.subcommand == "build":
        cfg["graph"] = args.graph
    if args.subcommand == "verify":
        cfg.update(profile=args.profile, replicas=args.replicas, time_grid=args.time_grid,
                   radius_grid=args.radius_grid, graph=args.graph)
        if args.replicas is not None and args.replicas < 2:
            raise UsageError("--replicas must be >= 2")
        for key in ("time_grid", "radius_grid"):
            grid = cfg[key]
            if grid is not None and (any(x <= 0 for x in grid) or sorted(set(grid)) != grid or len(grid) < 2):
                raise UsageError(f"--{key.replace('_', '-')} must be >= 2 increasing positive integers")
    if args.subcommand == "render":
        cfg.update(tower=args.tower, input=args.input)
    return cfg


def _spec(cfg) -> ColumnSpec | None:
    if cfg.get("gamma"):
        return ColumnSpec(tuple(cfg["gamma"]))
    if cfg.get("bk"):
        return gamma_bk(*cfg["bk"])
    return None


def expected_tiles(cfg) -> int:
    """Closed-form tile count, known before any construction."""
    spec = _spec(cfg)
    n = cfg["n"] if cfg["n"] is not None else 1
    if spec is None:
        if cfg.get("degree") is not None:
            # prod 16 (1 + h_j/4) <= 16^n 4^((d-2) n) = 4^(d n)
            return int(4 ** (cfg["degree"] * max(n, 0)))
        return 1
    if cfg.get("tower"):
        return sum(spec.size**j for j in range(1, n + 1))
    return spec.size**n


def construct(cfg):
    spec = _spec(cfg)
    n = cfg["n"] if cfg["n"] is not None else 1
    extra = {}
    if cfg.get("degree") is not None:
        if n < 1:
            raise UsageError("--degree needs --n >= 1")
        t, hs = mixed_power_for_degree(cfg["degree"], n)
        extra["h"] = hs
        return t, extra
    if spec is None:
        raise UsageError("one of --gamma, --bk, --degree is required")
    base = make_column_tiling(spec)
    if cfg.get("tower"):
        if n < 1:
            raise UsageError("--tower needs --n >= 1")
        return concat_all([power(base, j, validate=False) for j in range(1, n + 1)], validate=False), extra
    return power(base, n, validate=len(base) ** n <= 50_000), extra


def _check_budget(cfg, tiles):
    need = estimate_bytes(tiles)
    if need > cfg["budget"] * 2**30:
        raise BudgetError(f"{tiles} tiles need about {need / 2**30:.2f} GiB, budget is {cfg['budget']} GiB")


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def cmd_build(cfg) -> int:
    tiles = expected_tiles(cfg)
    _check_budget(cfg, tiles)
    t, extra = construct(cfg)
    td = tiling_to_dict(t)
    td["config"] = cfg
    if extra:
        td["construction"] = extra
    out = cfg["out"]
    gd = None
    if cfg["graph"] != "none":
        if cfg["graph"] == "cylinder":
            g = build_cylinder(t)
        else:
            g = build_dual(t)
            if cfg["graph"] == "linear":
                g = linearize(g)
        gd = graph_to_dict(g)
        gd["config"] = cfg
    if cfg["format"] == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "x", "y", "l1", "l2"])
        for a in td["tiles"]:
            w.writerow([a["id"], *a["p"], *a["l"]])
        tiling_text = buf.getvalue()
        graph_text = None
        if gd is not None:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["u", "v"] + (["weight"] if "weights" in gd else []))
            for i, e in enumerate(gd["edges"]):
                w.writerow(e + ([gd["weights"][i]] if "weights" in gd else []))
            graph_text = buf.getvalue()
        ext = "csv"
    else:
        tiling_text, graph_text, ext = dumps(td), None if gd is None else dumps(gd), "json"
    if out is None:
        print(f"tiles  {len(t)}")
        if gd is not None:
            print(f"graph  {cfg['graph']}  vertices {gd['n']}  edges {len(gd['edges'])}")
        print("(use --out DIR to write files)")
        return EXIT_OK
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    _write(d / f"tiling.{ext}", tiling_text)
    if graph_text is not None:
        _write(d / f"graph.{ext}", graph_text)
    if ext == "csv":
        _write(d / "config.json", dumps(cfg))
    print(f"tiles {len(t)} -> {d / f'tiling.{ext}'}")
    if graph_text is not None:
        print(f"graph {gd['n']} vertices, {len(gd['edges'])} edges -> {d / f'graph.{ext}'}")
    return EXIT_OK


def _report_csv(rep) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "hard", "passed"])
    for c in rep["checks"]:
        w.writerow([c["name"], int(c["hard"]), int(c["passed"])])
    w.writerow(["#config", json.dumps(rep["config"], sort_keys=True), ""])
    return buf.getvalue()


def cmd_verify(cfg) -> int:
    rep = run_suite(cfg)
    width = max(len(c["name"]) for c in rep["checks"])
    for c in rep["checks"]:
        status = "PASS" if c["passed"] else ("FAIL" if c["hard"] else "fail (soft)")
        print(f"{c['name']:<{width}}  {'hard' if c['hard'] else 'soft'}  {status}")
    if rep["hard_failures"]:
        print("hard failures: " + ", ".join(rep["hard_failures"]))
    text = dumps(rep) if cfg["format"] == "json" else _report_csv(rep)
    if cfg["out"] is not None:
        _write(cfg["out"], text)
    return EXIT_OK if rep["passed"] else EXIT_FAIL


def cmd_render(cfg) -> int:
    if cfg.get("input"):
        d = load(cfg["input"])
        if len(d.get("tiles", [])) > MAX_TILES:
            raise BudgetError(f"refusing to render {len(d['tiles'])} tiles (limit {MAX_TILES})")
        t = tiling_from_dict(d)
    else:
        tiles = expected_tiles(cfg)
        if tiles > MAX_TILES:
            raise BudgetError(f"refusing to render {tiles} tiles (limit {MAX_TILES})")
        t, _ = construct(cfg)
    svg = tiling_svg(t, metadata=cfg)
    _write(cfg["out"], svg)
    if cfg["out"] is not None:
        print(f"{len(t)} tiles -> {cfg['out']}")
    return EXIT_OK


COMMANDS = {"build": cmd_build, "verify": cmd_verify, "render": cmd_render}


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve(args)
        return COMMANDS[cfg["subcommand"]](cfg)
    except BudgetError as e:
        print(f"budget refusal: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, TilingError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
