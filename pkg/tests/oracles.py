"""Reference implementations that share no code with the package.

Each one trades speed for directness: high-precision arithmetic, brute-force
enumeration, or the plainest search that is still certifiable.
"""

from __future__ import annotations

import itertools
import math

import mpmath
import numba
import numpy as np

mpmath.mp.dps = 60

# first-quadrant sum of f**3 from _subtree_threshold_sum(1, 0, 0, 1, 1e-10, 3.0);
# the same value comes out at 1e-9, the tail past 1e-10 is below 1e-22
S3_FIXTURE = 0.21349025954230438


def defect_mp(a, b, c, d) -> float:
    """Defining difference of roots at 60 significant digits."""
    s = mpmath.sqrt
    return float(s(a * a + b * b) + s(c * c + d * d) - s((a + c) ** 2 + (b + d) ** 2))


def corner_point_mp(a, b, c, d):
    """Meeting point of the tangent lines v.q = |v|, w.q = |w| by Cramer's rule."""
    nv = mpmath.sqrt(a * a + b * b)
    nw = mpmath.sqrt(c * c + d * d)
    det = a * d - b * c
    return (nv * d - b * nw) / det, (a * nw - c * nv) / det


def corner_remainders_mp(a, b, c, d) -> tuple[float, float]:
    """R1 and R2 straight from the corner geometry: Cramer's rule, distances, arc angle."""
    nv = mpmath.sqrt(a * a + b * b)
    nw = mpmath.sqrt(c * c + d * d)
    qx, qy = corner_point_mp(a, b, c, d)
    tv = (a / nv, b / nv)
    tw = (c / nw, d / nw)
    r1 = mpmath.hypot(qx - tv[0], qy - tv[1]) / nv + mpmath.hypot(qx - tw[0], qy - tw[1]) / nw
    # kite O, t_v, q, t_w minus the circular sector between t_v and t_w
    theta = mpmath.acos(tv[0] * tw[0] + tv[1] * tw[1])
    kite = abs(tv[0] * qy - tv[1] * qx) / 2 + abs(qx * tw[1] - qy * tw[0]) / 2
    r2 = 2 * (kite - theta / 2)
    return float(r1), float(r2)


def vertex_linear_solve(a, b, c, d) -> tuple[tuple[float, float], float]:
    """Meeting point of the planes of v, w, v+w by solving the 2x2 system in mpmath."""
    nv = mpmath.sqrt(a * a + b * b)
    nw = mpmath.sqrt(c * c + d * d)
    nu = mpmath.sqrt((a + c) ** 2 + (b + d) ** 2)
    # (v - w).p = |w| - |v| ; (v - u).p = |u| - |v|  with u = v + w, so -w.p = |u| - |v|
    m = mpmath.matrix([[a - c, b - d], [-c, -d]])
    rhs = mpmath.matrix([nw - nv, nu - nv])
    p = mpmath.lu_solve(m, rhs)
    return (float(p[0]), float(p[1])), float(a * p[0] + b * p[1] + nv)


def ring_search_F(px: float, py: float, cap: int = 10**5) -> float:
    """Concentric square rings by max-norm; stop once ring radius * (1 - |p|) beats the best value."""
    r = math.hypot(px, py)
    best = math.inf
    for k in range(1, cap + 1):
        xs = np.arange(-k, k + 1)
        side = np.arange(-k + 1, k)
        w = np.concatenate(
            [
                np.stack([xs, np.full_like(xs, k)], 1),
                np.stack([xs, np.full_like(xs, -k)], 1),
                np.stack([np.full_like(side, k), side], 1),
                np.stack([np.full_like(side, -k), side], 1),
            ]
        ).astype(float)
        best = min(best, float((w[:, 0] * px + w[:, 1] * py + np.hypot(w[:, 0], w[:, 1])).min()))
        if k * (1 - r) > best:
            return best
    raise RuntimeError("ring search cap reached")


def sl2z_brute(bound: int):
    """Every integer matrix with entries in [-bound, bound] and determinant 1."""
    rng = range(-bound, bound + 1)
    return [(a, b, c, d) for a, b, c, d in itertools.product(rng, repeat=4) if a * d - b * c == 1]


def extended_defect_mp(a, b, c, d) -> float:
    s = mpmath.sqrt
    quads = []
    for x, y in ((a, b), (c, d)):
        quads.append({q for q, ok in enumerate((x >= 0 <= y, x <= 0 <= y, x <= 0 >= y, x >= 0 >= y)) if ok})
    sign = 1 if quads[0] & quads[1] else -1
    return float(s(a * a + b * b) + s(c * c + d * d) - s((a + sign * c) ** 2 + (b + sign * d) ** 2))


@numba.njit(cache=True)
def _subtree_threshold_sum(a0, b0, c0, d0, tau, power):
    # every descendant (x, y) keeps one vector at least min(|v|, |w|) long and one
    # at least |v + w| long, and f(x, y) <= 1 / (|x| |y| max(|x|, |y|))
    stack = np.empty((1 << 12, 4), np.int64)
    stack[0, 0], stack[0, 1], stack[0, 2], stack[0, 3] = a0, b0, c0, d0
    sp = 1
    total = 0.0
    comp = 0.0
    while sp > 0:
        sp -= 1
        a, b, c, d = stack[sp, 0], stack[sp, 1], stack[sp, 2], stack[sp, 3]
        nv = math.hypot(a, b)
        nw = math.hypot(c, d)
        nu = math.hypot(a + c, b + d)
        f = 2.0 / ((nv * nw + a * c + b * d) * (nv + nw + nu))
        if f >= tau:
            y = f**power - comp
            s = total + y
            comp = (s - total) - y
            total = s
        if max(f, 1.0 / (min(nv, nw) * nu * nu)) >= tau:
            if sp + 2 > stack.shape[0]:
                grown = np.empty((2 * stack.shape[0], 4), np.int64)
                grown[:sp] = stack[:sp]
                stack = grown
            stack[sp, 0], stack[sp, 1], stack[sp, 2], stack[sp, 3] = a, b, a + c, b + d
            sp += 1
            stack[sp, 0], stack[sp, 1], stack[sp, 2], stack[sp, 3] = a + c, b + d, c, d
            sp += 1
    return total


def subtree_sum_extrapolated(a, b, c, d) -> float:
    """Sum of f over the subtree of (v, w) without using any remainder formula.

    Brute-force sums above thresholds 1e-6 * 8**-k converge like tau**(1/3)
    (pair count ~ tau**(-2/3)) with a tau**(1/2) correction from the harmonic
    chains; two Richardson stages remove both.
    """
    taus = [1e-6 * 8.0**-k for k in range(6)]
    s = [_subtree_threshold_sum(a, b, c, d, t, 1.0) for t in taus]
    first = [y + (y - x) / (2.0 - 1.0) for x, y in zip(s, s[1:])]
    r2 = 8.0**0.5
    second = [y + (y - x) / (r2 - 1.0) for x, y in zip(first, first[1:])]
    return second[-1]


def subtree_sum_squares(a, b, c, d, tau: float = 1e-12) -> float:
    """Plain truncated sum of f**2; the tail decays like tau**(4/3)."""
    return _subtree_threshold_sum(a, b, c, d, tau, 2.0)
