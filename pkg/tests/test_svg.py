import re

import pytest

from tilegrowth import TilingError, concat_all, make_column_tiling, power, unit_tiling
from tilegrowth.svg import MAX_TILES, tiling_svg

H = make_column_tiling([3, 6, 3])


def rects(svg):
    return re.findall(r'<rect id="t(\d+)" x="([\d.]+)" y="([\d.]+)" width="([\d.]+)" height="([\d.]+)"', svg)


def test_rect_counts():
    assert len(rects(tiling_svg(H))) == 12
    assert len(rects(tiling_svg(unit_tiling()))) == 1
    assert len(rects(tiling_svg(power(H, 2)))) == 144


def test_geometry_of_H():
    r = rects(tiling_svg(H, height=300, margin=0))
    # first tile is the bottom-left 1/3 square: lowest row of the picture
    _, x, y, w, h = r[0]
    assert (float(x), float(y), float(w), float(h)) == (0, 200, 100, 100)
    area = sum(float(a[3]) * float(a[4]) for a in r)
    assert area == pytest.approx(300 * 300)


def test_tower_strip_and_metadata():
    t = concat_all([power(H, j) for j in (1, 2)])
    svg = tiling_svg(t, title="H | H^2", metadata={"n": 2}, highlight=[0])
    assert len(rects(svg)) == 156
    assert "<title>H | H^2</title>" in svg and '{"n": 2}' in svg
    assert svg.count('fill="#bbbbbb"') == 1
    assert svg.startswith("<svg") and svg.endswith("</svg>\n")


def test_refuses_huge():
    assert MAX_TILES == 100_000
    with pytest.raises(TilingError):
        tiling_svg(power(H, 5))
