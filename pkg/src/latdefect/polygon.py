"""Unimodular polygons circumscribed about the unit disc, built by corner cropping.

A polygon is stored as its fan of outward primitive normals; every side is the
tangent line ``w.p = |w|``. Cropping a corner between normals ``v`` and ``w``
inserts the mediant ``v + w``. All lengths and areas are computed per corner
from ``t = tan(theta/2) = det(v, w) / (|v||w| + v.w)``, which avoids
subtracting nearly equal vertex coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import LevelTooDeep
from .lattice import UnimodularPair, defect

__all__ = [
    "MAX_LEVEL",
    "Polygon",
    "PolygonMetrics",
    "CroppedTriangle",
    "UnimodularityReport",
    "build_polygon",
    "quadrant_fan",
    "vertices",
    "metrics",
    "check_unimodular",
    "cropped_triangle",
    "cropped_area_defect_ratio",
]

MAX_LEVEL = 24
MEMORY_BUDGET_BYTES = 2 << 30


def quadrant_fan(n: int) -> np.ndarray:
    """Normals of P_n from (1, 0) to (0, 1) inclusive: ``2**n + 1`` rows."""
    fan = np.array([[1, 0], [0, 1]], dtype=np.int64)
    for _ in range(n):
        nxt = np.empty((2 * len(fan) - 1, 2), dtype=np.int64)
        nxt[0::2] = fan
        nxt[1::2] = fan[:-1] + fan[1:]
        fan = nxt
    return fan


def _rot(arr: np.ndarray, k: int = 1) -> np.ndarray:
    out = arr
    for _ in range(k % 4):
        out = np.stack([-out[:, 1], out[:, 0]], axis=1)
    return out


@dataclass(frozen=True, eq=False)
class Polygon:
    """Fan of outward normals.

    With ``symmetric=True`` only the first-quadrant fan (both axis normals
    included) is stored and the other quadrants are its rotations; otherwise
    ``fan`` is the full cyclic list in counterclockwise order.
    """

    fan: np.ndarray
    level: int | None = None
    symmetric: bool = True

    @classmethod
    def from_normals(cls, normals, level: int | None = None) -> "Polygon":
        return cls(np.asarray(normals, dtype=np.int64).reshape(-1, 2), level, symmetric=False)

    @property
    def normals(self) -> np.ndarray:
        if not self.symmetric:
            return self.fan
        q1 = self.fan[:-1]
        return np.concatenate([_rot(q1, k) for k in range(4)])

    def __len__(self) -> int:
        return 4 * (len(self.fan) - 1) if self.symmetric else len(self.fan)

    def _corner_normals(self) -> tuple[np.ndarray, np.ndarray, int]:
        # (v, w) per corner and the multiplicity for symmetric storage
        if self.symmetric:
            return self.fan[:-1], self.fan[1:], 4
        full = self.fan
        return full, np.roll(full, -1, axis=0), 1


def build_polygon(n: int, max_level: int = MAX_LEVEL) -> Polygon:
    """P_n: crop every corner of P_0 = [-1, 1]^2 ``n`` times (4 * 2**n sides)."""
    if n < 0:
        raise ValueError("level must be >= 0")
    if n > max_level:
        raise LevelTooDeep(f"level {n} exceeds the configured maximum {max_level}")
    # fan plus a handful of float work arrays per quadrant corner
    if (2**n + 1) * 8 * 12 > MEMORY_BUDGET_BYTES:
        raise LevelTooDeep(f"level {n} needs more than {MEMORY_BUDGET_BYTES >> 20} MiB")
    return Polygon(quadrant_fan(n), level=n, symmetric=True)


def _corner_geometry(v: np.ndarray, w: np.ndarray):
    a, b = v[:, 0].astype(np.float64), v[:, 1].astype(np.float64)
    c, d = w[:, 0].astype(np.float64), w[:, 1].astype(np.float64)
    nv = np.hypot(a, b)
    nw = np.hypot(c, d)
    det = a * d - b * c
    t = det / (nv * nw + (a * c + b * d))
    return a, b, c, d, nv, nw, t


def vertices(poly: Polygon) -> np.ndarray:
    """Counterclockwise vertices; vertex i joins the sides with normals i and i+1."""
    v, w, _ = poly._corner_normals()
    a, b, _, _, nv, _, t = _corner_geometry(v, w)
    q = np.stack([(a - t * b) / nv, (b + t * a) / nv], axis=1)
    if poly.symmetric:
        q = np.concatenate([_rot(q, k) for k in range(4)])
    return q


@dataclass(frozen=True)
class PolygonMetrics:
    area: float
    perimeter: float
    lattice_perimeter: float


def metrics(poly: Polygon) -> PolygonMetrics:
    """Shoelace area, Euclidean perimeter and lattice perimeter.

    A side with normal w runs between the tangent point and the two adjacent
    corners, so its length is ``t_prev + t_next``; its lattice length divides by
    ``|w|`` because the side direction rot90(w) is primitive.
    """
    v, w, mult = poly._corner_normals()
    a, b, c, d, nv, nw, t = _corner_geometry(v, w)
    q = np.stack([(a - t * b) / nv, (b + t * a) / nv], axis=1)
    if poly.symmetric:
        # quadrant chain: (1, 0) -> corners -> (0, 1) -> origin
        chain = np.concatenate([[[1.0, 0.0]], q, [[0.0, 1.0]]])
        side_len = np.concatenate([[t[0]], t[:-1] + t[1:], [t[-1]]])
        side_norm = np.concatenate([[nv[0]], nw[:-1], [nw[-1]]])
    else:
        chain = np.concatenate([q, q[:1]])
        side_len = np.roll(t, 1) + t
        side_norm = nv
    cross = chain[:-1, 0] * chain[1:, 1] - chain[:-1, 1] * chain[1:, 0]
    area = mult * 0.5 * math.fsum(cross)
    perimeter = mult * math.fsum(side_len)
    lattice = mult * math.fsum(side_len / side_norm)
    return PolygonMetrics(area, perimeter, lattice)


@dataclass(frozen=True)
class UnimodularityReport:
    ok: bool
    checked: int
    violations: list = field(default_factory=list)

    @property
    def first_violation(self):
        return self.violations[0] if self.violations else None


def check_unimodular(poly: Polygon) -> UnimodularityReport:
    """Adjacent normals, and adjacent side directions, must have determinant 1."""
    normals = poly.normals
    nxt = np.roll(normals, -1, axis=0)
    det = normals[:, 0] * nxt[:, 1] - normals[:, 1] * nxt[:, 0]
    sides = _rot(normals)
    sides_nxt = np.roll(sides, -1, axis=0)
    side_det = sides[:, 0] * sides_nxt[:, 1] - sides[:, 1] * sides_nxt[:, 0]
    gcd = np.gcd(normals[:, 0], normals[:, 1])
    bad = np.nonzero((det != 1) | (np.abs(side_det) != 1) | (gcd != 1))[0]
    violations = [
        {"index": int(i), "normal": normals[i].tolist(), "next": nxt[i].tolist(), "det": int(det[i])} for i in bad
    ]
    return UnimodularityReport(ok=not violations, checked=len(normals), violations=violations)


@dataclass(frozen=True)
class CroppedTriangle:
    pair: UnimodularPair
    vertices: tuple[tuple[float, float], tuple[float, float], tuple[float, float]]
    area: float


def cropped_triangle(pair: UnimodularPair) -> CroppedTriangle:
    """Triangle cut from the corner of ``(v, w)`` by the tangent line normal to v + w.

    Vertices are the corner q and its two neighbours on the sides of v and w.
    Edge lengths from q are differences of half-angle tangents, rewritten
    without cancellation. The shoelace cross product in coordinates centred at
    q factors as ``len_v * len_w * det(v, w) / (|v||w|)``; the integer
    determinant is taken exactly instead of from rounded unit vectors.
    """
    a, b, c, d = pair.entries
    nv = math.hypot(a, b)
    nw = math.hypot(c, d)
    nu = math.hypot(a + c, b + d)
    dot = a * c + b * d
    t_vw = 1.0 / (nv * nw + dot)
    t_vu = 1.0 / (nv * nu + (a * (a + c) + b * (b + d)))
    t_uw = 1.0 / (nu * nw + ((a + c) * c + (b + d) * d))
    len_v = nv * (nv + (nv * nv + 2 * dot) / (nu + nw)) * t_vw * t_vu
    len_w = nw * (nw + (nw * nw + 2 * dot) / (nu + nv)) * t_vw * t_uw
    ev = (len_v * b / nv, -len_v * a / nv)
    ew = (-len_w * d / nw, len_w * c / nw)
    area = 0.5 * len_v * len_w * abs(a * d - b * c) / (nv * nw)
    q = ((a - t_vw * b) / nv, (b + t_vw * a) / nv)
    verts = (q, (q[0] + ev[0], q[1] + ev[1]), (q[0] + ew[0], q[1] + ew[1]))
    return CroppedTriangle(pair, verts, area)


def cropped_area_defect_ratio(pair: UnimodularPair) -> float:
    """Shoelace area over half the squared defect; 1 up to rounding."""
    return cropped_triangle(pair).area / (0.5 * defect(pair) ** 2)
