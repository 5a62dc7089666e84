"""The lower envelope F(p) = inf over nonzero lattice w of (w.p + |w|) on the unit disc.

Each primitive w contributes the plane of the tangent line ``w.p = |w|``; F is
concave and piecewise linear, and its crease set is a tree whose vertex values
are the defects of unimodular pairs. The cube-sum identity
``4 - 2 * sum(f**3) = 3 * integral(F)`` ties the envelope back to the series
engine and is checked numerically here.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import EdgeValidationFailed, Uncertified, VertexCheckFailed, VertexOutsideDisc
from .lattice import PrimitiveVector, UnimodularPair, _pair, _vec, defect, mediant_children, rotate_pair
from .series import truncated_sum

__all__ = [
    "FValue",
    "TropicalVertex",
    "CornerLocusGraph",
    "QuadratureResult",
    "CubeCheck",
    "evaluate_F",
    "evaluate_F_many",
    "vertex_of_pair",
    "corner_locus",
    "integrate_F",
    "lemma_cubes_check",
    "ORIGIN_PLANES",
    "RICHARDSON_ORDERS",
]

TIE_TOL = 1e-9
SEARCH_CAP = 10**6
# interior margin below which F is not evaluated (F -> 0 at the rim)
RIM_MARGIN = 1e-9
ORIGIN_PLANES = (_vec(1, 0), _vec(0, 1), _vec(-1, 0), _vec(0, -1))
# Midpoint error in r behaves like h**(7/4) from F ~ (1 - r)**(3/4) near the rim,
# then like h**2 from the creases; later stages are plain polynomial orders.
RICHARDSON_ORDERS = (1.75, 2.0, 3.0, 4.0, 5.0)


def _angle_key(w: PrimitiveVector) -> float:
    return math.atan2(w.y, w.x) % (2 * math.pi)


@dataclass(frozen=True)
class FValue:
    p: tuple[float, float]
    value: float
    active: tuple[PrimitiveVector, ...]
    certified: bool


def _check_point(p) -> tuple[float, float]:
    px, py = float(p[0]), float(p[1])
    if not math.hypot(px, py) <= 1.0 - RIM_MARGIN:
        raise ValueError(f"point {p} is not inside the disc of radius 1 - {RIM_MARGIN:g}")
    return px, py


def evaluate_F(p, tie_tol: float = TIE_TOL, cap: int = SEARCH_CAP, support=None) -> FValue:
    """Certified value of F at an interior point with its minimizing normals.

    Lattice rows are scanned outward with a lower bound that grows linearly in
    the row index, so the search stops exactly when no further w can come
    within ``tie_tol`` of the best value. ``active`` lists every primitive w
    within ``tie_tol`` of the minimum, counterclockwise from angle 0.

    ``support`` is reserved for support functions of other convex domains and
    must be None.
    """
    if support is not None:
        raise NotImplementedError("only the unit disc (support |w|) is implemented")
    px, py = _check_point(p)
    value, cand, certified = K.envelope_point(px, py, float(tie_tol), int(cap), True)
    if not certified:
        raise Uncertified(f"lattice search cap {cap} reached at p = ({px!r}, {py!r})", value)
    active = sorted(
        (_vec(int(x), int(y)) for x, y, _ in cand if math.gcd(int(x), int(y)) == 1),
        key=_angle_key,
    )
    return FValue((px, py), float(value), tuple(active), True)


def evaluate_F_many(points, cap: int = SEARCH_CAP, threads: int = 1) -> np.ndarray:
    """F at each row of an ``(n, 2)`` array; raises Uncertified if any point is not certified."""
    pts = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 2)
    if pts.size and not np.all(np.hypot(pts[:, 0], pts[:, 1]) <= 1.0 - RIM_MARGIN):
        raise ValueError("all points must lie inside the disc")
    px, py = pts[:, 0].copy(), pts[:, 1].copy()
    if threads <= 1 or len(pts) < 4096:
        values, ok = K.envelope_many(px, py, int(cap))
    else:
        bounds = np.linspace(0, len(pts), threads + 1).astype(int)
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda ij: K.envelope_many(px[ij[0] : ij[1]], py[ij[0] : ij[1]], int(cap)), zip(bounds[:-1], bounds[1:])))
        values = np.concatenate([v for v, _ in parts])
        ok = np.concatenate([c for _, c in parts])
    if not ok.all():
        i = int(np.argmin(ok))
        raise Uncertified(f"lattice search cap {cap} reached at p = {pts[i].tolist()}", float(values[i]))
    return values


# -- corner locus ------------------------------------------------------------------


@dataclass(frozen=True)
class TropicalVertex:
    """A vertex of the crease tree; ``pair`` is None for the origin hub."""

    pair: UnimodularPair | None
    p: tuple[float, float]
    value: float
    parent: int | None = None

    @property
    def planes(self) -> tuple[PrimitiveVector, ...]:
        if self.pair is None:
            return ORIGIN_PLANES
        return (self.pair.v, self.pair.w, self.pair.mediant)


def _quadrant_of(pair: UnimodularPair) -> int:
    for k in range(4):
        if rotate_pair(pair, -k).first_quadrant:
            return k
    raise ValueError(f"{pair.entries} does not lie in a closed quadrant")


def _rotate_point(p: tuple[float, float], k: int) -> tuple[float, float]:
    x, y = p
    for _ in range(k % 4):
        x, y = -y, x
    return (x, y)


def vertex_of_pair(pair: UnimodularPair, *, verify: bool = True, parent: int | None = None) -> TropicalVertex:
    """Point where the planes of v, w and v + w meet, and their common value f.

    Subtracting the equations gives ``v.p = f - |v|`` and ``w.p = f - |w|``,
    so ``p = f (d - b, a - c) - q`` with q the polygon corner of (v, w); both
    terms are evaluated without cancellation. Pairs from other quadrants are
    rotated into the first, solved there and rotated back.
    """
    k = _quadrant_of(pair)
    a, b, c, d = rotate_pair(pair, -k).entries
    nv = math.hypot(a, b)
    nw = math.hypot(c, d)
    t = 1.0 / (nv * nw + (a * c + b * d))
    f = defect(pair)
    q = ((a - t * b) / nv, (b + t * a) / nv)
    p = _rotate_point((f * (d - b) - q[0], f * (a - c) - q[1]), k)
    # deep vertices approach the rim; allow for rounding of |p| there
    if not math.hypot(*p) <= 1.0 + 1e-12:
        raise VertexOutsideDisc(f"vertex of {pair.entries} at {p} is not inside the disc")
    vertex = TropicalVertex(pair, p, f, parent)
    if verify:
        if not math.hypot(*p) <= 1.0 - RIM_MARGIN:
            raise Uncertified(f"vertex of {pair.entries} lies within {RIM_MARGIN:g} of the rim", f)
        fv = evaluate_F(p)
        if abs(fv.value - f) > 1e-12 or not set(vertex.planes) <= set(fv.active):
            raise VertexCheckFailed(
                f"F at the vertex of {pair.entries} is {fv.value!r} with active {[tuple(w) for w in fv.active]}, expected {f!r}"
            )
    return vertex


@dataclass
class CornerLocusGraph:
    vertices: list[TropicalVertex]
    edges: list[tuple[int, int]]
    depth: int
    validated: bool = False

    def is_tree(self) -> bool:
        n = len(self.vertices)
        if len(self.edges) != n - 1:
            return False
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i, j in self.edges:
            ri, rj = find(i), find(j)
            if ri == rj:
                return False
            parent[ri] = rj
        return True


def _shared_planes(u: TropicalVertex, v: TropicalVertex) -> set[PrimitiveVector]:
    return set(u.planes) & set(v.planes)


def corner_locus(depth: int, *, validate: bool = True, tie_tol: float = TIE_TOL) -> CornerLocusGraph:
    """Origin hub plus the vertices of every pair of depth <= ``depth`` in all quadrants.

    Edges join the hub to each quadrant root and each pair to its two mediant
    children. With ``validate`` the midpoint of every edge must have exactly the
    two planes its endpoints share as active set; the first mismatch raises
    :class:`EdgeValidationFailed`.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    verts = [TropicalVertex(None, (0.0, 0.0), 1.0)]
    edges: list[tuple[int, int]] = []
    for k in range(4):
        level = [(rotate_pair(_pair(1, 0, 0, 1), k), 0)]
        for dpt in range(depth + 1):
            nxt = []
            for pair, par in level:
                idx = len(verts)
                verts.append(vertex_of_pair(pair, verify=False, parent=par))
                edges.append((par, idx))
                if dpt < depth:
                    nxt.extend((child, idx) for child in mediant_children(pair))
            level = nxt
    graph = CornerLocusGraph(verts, edges, depth)
    if validate:
        for i, j in edges:
            u, v = verts[i], verts[j]
            mid = ((u.p[0] + v.p[0]) / 2, (u.p[1] + v.p[1]) / 2)
            got = set(evaluate_F(mid, tie_tol=tie_tol).active)
            want = _shared_planes(u, v)
            if got != want:
                raise EdgeValidationFailed(
                    f"edge {i}-{j}: active set {sorted(tuple(w) for w in got)} at the midpoint, "
                    f"expected {sorted(tuple(w) for w in want)}",
                    edge=(i, j),
                )
        graph.validated = True
    return graph


# -- quadrature --------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureResult:
    integral: float
    error_estimate: float
    levels: tuple[float, ...]
    grids: tuple[tuple[int, int], ...]


def _polar_sector_sum(nr: int, na: int, func, threads: int) -> float:
    """Midpoint rule over the disc using the 8-fold symmetry of the integrand.

    Only the sector 0 <= theta <= pi/4 is sampled (``na / 8`` angular cells);
    the sector edges are mirror lines, so the integrand has no kink inside a
    cell that straddles them.
    """
    r = (np.arange(nr) + 0.5) / nr
    theta = (np.arange(na // 8) + 0.5) * (2.0 * math.pi / na)
    rr, tt = np.meshgrid(r, theta, indexing="ij")
    x, y = (rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()
    if func is None:
        vals = evaluate_F_many(np.stack([x, y], axis=1), threads=threads)
    else:
        vals = np.broadcast_to(np.asarray(func(x, y), dtype=np.float64), x.shape)
    weighted = vals * rr.ravel()
    return 8.0 * math.fsum(weighted) * (1.0 / nr) * (2.0 * math.pi / na)


def _richardson(values: list[float], orders=RICHARDSON_ORDERS) -> tuple[float, float]:
    """Eliminate error terms h**k (grid ratio 2) in turn.

    The error estimate is the total correction applied to the finest level,
    which is conservative: single-stage corrections fluctuate with how the
    creases of F cross the grid.
    """
    if len(values) == 1:
        return values[0], math.nan
    row = list(values)
    for k in orders[: len(values) - 1]:
        factor = 2.0**k - 1.0
        row = [row[i + 1] + (row[i + 1] - row[i]) / factor for i in range(len(row) - 1)]
    return row[-1], abs(row[-1] - values[-1])


def integrate_F(
    radial_cells: int = 256,
    angular_cells: int = 256,
    refinement_levels: int = 3,
    func=None,
    threads: int = 1,
) -> QuadratureResult:
    """Integral of F over the unit disc: polar midpoint grids plus Richardson extrapolation.

    Level ``i`` uses ``radial_cells * 2**i`` by ``angular_cells * 2**i`` cells.
    ``func(x, y)``, if given, replaces F (a vectorized test integrand that must
    share the square lattice symmetries).
    """
    if radial_cells < 16 or angular_cells < 16:
        raise ValueError("need at least 16 cells in each direction")
    if angular_cells % 8:
        raise ValueError("angular_cells must be a multiple of 8")
    if not 1 <= refinement_levels <= len(RICHARDSON_ORDERS) + 1:
        raise ValueError(f"refinement_levels must be in 1..{len(RICHARDSON_ORDERS) + 1}")
    grids = tuple((radial_cells << i, angular_cells << i) for i in range(refinement_levels))
    levels = [_polar_sector_sum(nr, na, func, threads) for nr, na in grids]
    integral, err = _richardson(levels)
    return QuadratureResult(integral, err, tuple(levels), grids)


@dataclass(frozen=True)
class CubeCheck:
    residual: float
    s3: float
    s3_tail_bound: float
    integral: float
    integral_error: float
    bound: float = field(init=False)

    def __post_init__(self):
        # 2 * (S3 uncertainty) + 3 * (quadrature uncertainty)
        object.__setattr__(self, "bound", 2.0 * self.s3_tail_bound + 3.0 * self.integral_error)

    def to_dict(self) -> dict:
        return {
            "residual": self.residual,
            "bound": self.bound,
            "s3": self.s3,
            "s3_tail_bound": self.s3_tail_bound,
            "integral": self.integral,
            "integral_error": self.integral_error,
        }


def lemma_cubes_check(
    threshold: float = 1e-10,
    radial_cells: int = 256,
    angular_cells: int = 256,
    refinement_levels: int = 3,
    s3_shift: float = 0.0,
    threads: int = 1,
) -> CubeCheck:
    """``|4 - 2 S3 - 3 integral(F)|`` with S3 summed over first-quadrant pairs.

    ``s3_shift`` perturbs S3 before forming the residual, for sensitivity checks.
    """
    rep = truncated_sum(3.0, threshold=threshold, threads=threads)
    s3 = rep.total + s3_shift
    quad = integrate_F(radial_cells, angular_cells, refinement_levels, threads=threads)
    residual = abs(4.0 - 2.0 * s3 - 3.0 * quad.integral)
    return CubeCheck(residual, s3, rep.error_estimate, quad.integral, quad.error_estimate)
