"""Deterministic cluster rendering in rotated display coordinates.

Display x is the deviation, display y the height (up).  PGM output is
ASCII P2 with background 255, cluster sites 0 and red sites 128; SVG
output draws one rect per site.  Same input, same bytes.
"""

from __future__ import annotations

from .lattice import deviation, height

PGM_BG = 255
PGM_BLACK = 0
PGM_RED = 128


def _bounds(sites):
    ds = [deviation(p) for p in sites]
    hs = [height(p) for p in sites]
    return min(ds), max(ds), min(hs), max(hs)


def render_pgm(sites, path, red=()) -> None:
    sites = set(map(tuple, sites))
    red = set(map(tuple, red))
    if not sites | red:
        raise ValueError("nothing to render")
    dmin, dmax, hmin, hmax = _bounds(sites | red)
    width = dmax - dmin + 1
    hgt = hmax - hmin + 1
    rows = [[PGM_BG] * width for _ in range(hgt)]
    for p in sorted(sites | red):
        x = deviation(p) - dmin
        y = hmax - height(p)
        rows[y][x] = PGM_RED if p in red else PGM_BLACK
    lines = ["P2", f"{width} {hgt}", "255"]
    lines.extend(" ".join(str(v) for v in row) for row in rows)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_pgm(path):
    with open(path) as fh:
        tokens = fh.read().split()
    if tokens[0] != "P2":
        raise ValueError("not an ASCII PGM file")
    width, hgt = int(tokens[1]), int(tokens[2])
    values = [int(v) for v in tokens[4 : 4 + width * hgt]]
    return width, hgt, values


def render_svg(sites, path, red=(), cell: int = 8) -> None:
    sites = set(map(tuple, sites))
    red = set(map(tuple, red))
    if not sites | red:
        raise ValueError("nothing to render")
    dmin, dmax, hmin, hmax = _bounds(sites | red)
    width = (dmax - dmin + 1) * cell
    hgt = (hmax - hmin + 1) * cell
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{hgt}" '
        f'viewBox="0 0 {width} {hgt}">',
        f'<rect width="{width}" height="{hgt}" fill="#ffffff"/>',
    ]
    for p in sorted(sites | red):
        x = (deviation(p) - dmin) * cell
        y = (hmax - height(p)) * cell
        fill = "#cc2222" if p in red else "#000000"
        parts.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}"/>')
    parts.append("</svg>")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
