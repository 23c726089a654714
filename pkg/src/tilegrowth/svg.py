"""SVG pictures of tilings: one stroked rectangle per tile."""
from __future__ import annotations

from xml.sax.saxutils import quoteattr

import numpy as np

from .tiling import Tiling, TilingError

MAX_TILES = 100_000


def _num(v: float) -> str:
    s = f"{v:.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("", "-0") else s


def tiling_svg(t: Tiling, height: float = 400.0, margin: float = 4.0, highlight=None,
               title: str | None = None, metadata: dict | None = None) -> str:
    """Render ``t`` with the region's bottom-left at the lower left of the picture.

    ``highlight`` is an optional set of tile ids filled in grey.
    """
    if len(t) > MAX_TILES:
        raise TilingError(f"refusing to render {len(t)} tiles (limit {MAX_TILES})")
    r = t.region
    scale = height / float(r.ell2)
    width = float(r.ell1) * scale
    xy = t.float_coords()
    x = (xy[:, 0] - float(r.p[0])) * scale + margin
    y = (float(r.p[1] + r.ell2) - xy[:, 1] - xy[:, 3]) * scale + margin
    w = xy[:, 2] * scale
    h = xy[:, 3] * scale
    hl = set() if highlight is None else {int(i) for i in np.asarray(list(highlight)).ravel()}
    stroke = max(0.2, min(1.0, 0.25 * float(np.min(np.minimum(w, h))))) if len(w) else 1.0
    W, H = width + 2 * margin, height + 2 * margin
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(W)}" height="{_num(H)}" '
           f'viewBox="0 0 {_num(W)} {_num(H)}">']
    if title:
        out.append(f"<title>{title}</title>")
    if metadata:
        import json

        out.append(f"<desc>{json.dumps(metadata, sort_keys=True)}</desc>")
    out.append(f'<g fill="white" stroke="black" stroke-width={quoteattr(_num(stroke))}>')
    for i in range(len(x)):
        fill = ' fill="#bbbbbb"' if i in hl else ""
        out.append(f'<rect id="t{i}" x="{_num(x[i])}" y="{_num(y[i])}" '
                   f'width="{_num(w[i])}" height="{_num(h[i])}"{fill}/>')
    out.append("</g></svg>")
    return "\n".join(out) + "\n"
