"""Text renderings of polygons, crease trees and F grids (SVG, CSV, JSON)."""

from __future__ import annotations

import json
import math

import numpy as np

from ._numfmt import fmt_number, round_floats
from .errors import UnsupportedFormat
from .polygon import Polygon, metrics, vertices
from .tropical import CornerLocusGraph

__all__ = [
    "POLYGON_FORMATS",
    "LOCUS_FORMATS",
    "emit_geometry",
    "emit_locus",
    "emit_grid",
    "polygon_from_json",
    "fmt_number",
    "round_floats",
    "dumps",
]

POLYGON_FORMATS = ("svg", "csv", "json")
LOCUS_FORMATS = ("svg", "json")
VIEWBOX = "-1.2 -1.2 2.4 2.4"


def dumps(obj, digits: int = 17) -> str:
    return json.dumps(round_floats(obj, digits), indent=2, allow_nan=False) + "\n"


def _svg(body: list[str], stroke_width: float) -> str:
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{VIEWBOX}" width="600" height="600">',
        # y axis up
        '<g transform="scale(1,-1)">',
        f'<circle cx="0" cy="0" r="1" fill="none" stroke="#888888" stroke-width="{fmt_number(stroke_width, 6)}"/>',
    ]
    return "\n".join(head + body + ["</g>", "</svg>", ""])


def emit_geometry(poly: Polygon, fmt: str, *, digits: int = 17, stroke_width: float = 0.005) -> str:
    """SVG (unit circle plus closed polygon path), CSV of vertices, or JSON with normals and metrics."""
    if fmt not in POLYGON_FORMATS:
        raise UnsupportedFormat(f"polygon format {fmt!r}; expected one of {', '.join(POLYGON_FORMATS)}")
    if fmt == "json":
        m = metrics(poly)
        doc = {
            "level": poly.level,
            "normals": poly.normals.tolist(),
            "metrics": {"area": m.area, "perimeter": m.perimeter, "lattice_perimeter": m.lattice_perimeter},
        }
        return dumps(doc, digits)
    pts = vertices(poly)
    if fmt == "csv":
        rows = ["x,y"] + [f"{fmt_number(x, digits)},{fmt_number(y, digits)}" for x, y in pts]
        return "\n".join(rows) + "\n"
    coords = " L ".join(f"{fmt_number(x, digits)} {fmt_number(y, digits)}" for x, y in pts)
    path = f'<path d="M {coords} Z" fill="none" stroke="#1f4e9c" stroke-width="{fmt_number(stroke_width, 6)}"/>'
    return _svg([path], stroke_width)


def polygon_from_json(text: str) -> Polygon:
    doc = json.loads(text)
    return Polygon.from_normals(doc["normals"], level=doc.get("level"))


def emit_locus(graph: CornerLocusGraph, fmt: str, *, digits: int = 17, stroke_width: float = 0.004) -> str:
    """Crease tree as JSON (vertices with pair, point and value; index edges) or SVG."""
    if fmt not in LOCUS_FORMATS:
        raise UnsupportedFormat(f"locus format {fmt!r}; expected one of {', '.join(LOCUS_FORMATS)}")
    if fmt == "json":
        doc = {
            "vertices": [
                {
                    "pair": "origin" if v.pair is None else list(v.pair.entries),
                    "p": list(v.p),
                    "value": v.value,
                }
                for v in graph.vertices
            ],
            "edges": [list(e) for e in graph.edges],
        }
        return dumps(doc, digits)
    body = []
    for i, j in graph.edges:
        (x1, y1), (x2, y2) = graph.vertices[i].p, graph.vertices[j].p
        body.append(
            f'<polyline points="{fmt_number(x1, digits)},{fmt_number(y1, digits)} '
            f'{fmt_number(x2, digits)},{fmt_number(y2, digits)}" fill="none" stroke="#b03a2e" '
            f'stroke-width="{fmt_number(stroke_width, 6)}"/>'
        )
    for v in graph.vertices:
        # dot area tracks the vertex value; floor keeps deep vertices visible
        r = max(0.004, 0.03 * math.sqrt(v.value))
        body.append(
            f'<circle cx="{fmt_number(v.p[0], digits)}" cy="{fmt_number(v.p[1], digits)}" '
            f'r="{fmt_number(r, 6)}" fill="#b03a2e"/>'
        )
    return _svg(body, stroke_width)


def emit_grid(points, values, *, digits: int = 17) -> str:
    """CSV with header ``x,y,F``."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    vals = np.asarray(values, dtype=np.float64).ravel()
    rows = ["x,y,F"] + [
        f"{fmt_number(x, digits)},{fmt_number(y, digits)},{fmt_number(f, digits)}" for (x, y), f in zip(pts, vals)
    ]
    return "\n".join(rows) + "\n"
