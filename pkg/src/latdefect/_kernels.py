"""Compiled traversal kernels for the Stern-Brocot corner tree.

Conventions shared by every kernel:

* a node is ``(a, b, c, d, depth)`` with ``v = (a, b)``, ``w = (c, d)``;
* ``t = 1 / (|v||w| + v.w)`` is tan of half the angle between the normals;
* "cropping" a node adds its defect to the partial sums and replaces it by its
  two mediant children; uncropped nodes form the frontier.

Key modes: 0 = R1 remainder, 1 = gain bound on f over the subtree,
2 = R2 remainder, 3 = depth (crop while depth < max_depth).
"""

from __future__ import annotations

import heapq
import math

import numba
import numpy as np

MODE_R1 = 0
MODE_GAIN = 1
MODE_R2 = 2
MODE_DEPTH = 3

# accumulator slots, each stored as (hi, lo) Neumaier pairs
ACC_PARTIAL = 0
ACC_COMPANION = 1
ACC_REM1 = 2
ACC_REM2 = 3
ACC_TAIL = 4
N_ACC = 5

CNT_CROPPED = 0
CNT_FRONTIER = 1
CNT_MAXDEPTH = 2
CNT_OVERFLOW = 3
N_CNT = 4

# float-exact integer range for hypot
ENTRY_LIMIT = 1 << 53


@numba.njit(cache=True, nogil=True)
def r2_from_t(t):
    # 2 (t - atan t); odd series below 0.25 avoids cancellation (14 terms: 0.0625**14 < 1e-16)
    if t < 0.25:
        t2 = t * t
        s = 0.0
        for k in range(14, 0, -1):
            s = 1.0 / (2 * k + 1) - t2 * s
        return 2.0 * t * t2 * s
    return 2.0 * (t - math.atan(t))


@numba.njit(cache=True, nogil=True)
def corner_values(a, b, c, d):
    nv = math.hypot(a, b)
    nw = math.hypot(c, d)
    nu = math.hypot(a + c, b + d)
    t = 1.0 / (nv * nw + (a * c + b * d))
    f = 2.0 * t / (nv + nw + nu)
    return nv, nw, nu, t, f


@numba.njit(cache=True, nogil=True)
def node_key(a, b, c, d, depth, mode):
    nv, nw, nu, t, f = corner_values(a, b, c, d)
    if mode == MODE_R1:
        return t * (1.0 / nv + 1.0 / nw)
    if mode == MODE_GAIN:
        return max(f, 1.0 / (min(nv, nw) * nu * nu))
    if mode == MODE_R2:
        return r2_from_t(t)
    return -float(depth)


@numba.njit(cache=True, nogil=True)
def _add(acc, slot, x):
    hi = acc[slot, 0]
    s = hi + x
    if abs(hi) >= abs(x):
        acc[slot, 1] += (hi - s) + x
    else:
        acc[slot, 1] += (x - s) + hi
    acc[slot, 0] = s


@numba.njit(cache=True, nogil=True)
def _crop(acc, a, b, c, d, alpha):
    nv, nw, nu, t, f = corner_values(a, b, c, d)
    _add(acc, ACC_PARTIAL, f**alpha)
    _add(acc, ACC_COMPANION, (nv * nw * nu) ** (-alpha))


@numba.njit(cache=True, nogil=True)
def _leave(acc, a, b, c, d, alpha):
    nv, nw, nu, t, f = corner_values(a, b, c, d)
    r1 = t * (1.0 / nv + 1.0 / nw)
    _add(acc, ACC_REM1, r1)
    _add(acc, ACC_REM2, r2_from_t(t))
    _add(acc, ACC_TAIL, r1**alpha)


@numba.njit(cache=True, nogil=True)
def _should_crop(a, b, c, d, depth, mode, tau, max_depth):
    if max_depth >= 0 and depth >= max_depth:
        return False
    if mode == MODE_DEPTH:
        return True
    return node_key(a, b, c, d, depth, mode) >= tau


@numba.njit(cache=True, nogil=True)
def dfs_sum(roots, mode, tau, max_depth, alpha, stop_depth):
    """Depth-first crop of every node meeting the criterion below ``roots``.

    Nodes reaching ``stop_depth`` (when >= 0) are not processed; they are
    returned as seeds so callers can hand disjoint subtrees to workers.
    """
    acc = np.zeros((N_ACC, 2))
    cnt = np.zeros(N_CNT, dtype=np.int64)
    cap = 1024
    stack = np.empty((cap, 5), dtype=np.int64)
    sp = 0
    for i in range(roots.shape[0]):
        stack[sp] = roots[roots.shape[0] - 1 - i]
        sp += 1
    seeds = np.empty((16, 5), dtype=np.int64)
    ns = 0
    while sp > 0:
        sp -= 1
        a = stack[sp, 0]
        b = stack[sp, 1]
        c = stack[sp, 2]
        d = stack[sp, 3]
        depth = stack[sp, 4]
        if stop_depth >= 0 and depth == stop_depth:
            if ns == seeds.shape[0]:
                grown = np.empty((2 * ns, 5), dtype=np.int64)
                grown[:ns] = seeds
                seeds = grown
            seeds[ns] = stack[sp]
            ns += 1
            continue
        if depth > cnt[CNT_MAXDEPTH]:
            cnt[CNT_MAXDEPTH] = depth
        if not _should_crop(a, b, c, d, depth, mode, tau, max_depth):
            _leave(acc, a, b, c, d, alpha)
            cnt[CNT_FRONTIER] += 1
            continue
        e = a + c
        g = b + d
        if e >= ENTRY_LIMIT or g >= ENTRY_LIMIT:
            cnt[CNT_OVERFLOW] = 1
            break
        _crop(acc, a, b, c, d, alpha)
        cnt[CNT_CROPPED] += 1
        if sp + 2 > cap:
            grown = np.empty((2 * cap, 5), dtype=np.int64)
            grown[:sp] = stack[:sp]
            stack = grown
            cap *= 2
        # the child keeping the shorter of v, w has the larger subtree; visit it last
        if a * a + b * b <= c * c + d * d:
            first_a, first_b, first_c, first_d = a, b, e, g
            last_a, last_b, last_c, last_d = e, g, c, d
        else:
            first_a, first_b, first_c, first_d = e, g, c, d
            last_a, last_b, last_c, last_d = a, b, e, g
        stack[sp, 0] = first_a
        stack[sp, 1] = first_b
        stack[sp, 2] = first_c
        stack[sp, 3] = first_d
        stack[sp, 4] = depth + 1
        sp += 1
        stack[sp, 0] = last_a
        stack[sp, 1] = last_b
        stack[sp, 2] = last_c
        stack[sp, 3] = last_d
        stack[sp, 4] = depth + 1
        sp += 1
    return acc, cnt, seeds[:ns].copy()


@numba.njit(cache=True, nogil=True)
def best_first_sum(a0, b0, c0, d0, mode, budget, tau, alpha):
    """Crop the ``budget`` highest-key corners, one at a time, from a max-heap."""
    acc = np.zeros((N_ACC, 2))
    cnt = np.zeros(N_CNT, dtype=np.int64)
    heap = [(-node_key(a0, b0, c0, d0, 0, mode), a0, b0, c0, d0, np.int64(0))]
    n = 0
    while n < budget and len(heap) > 0:
        if -heap[0][0] < tau:
            break
        item = heapq.heappop(heap)
        a, b, c, d, depth = item[1], item[2], item[3], item[4], item[5]
        e = a + c
        g = b + d
        if e >= ENTRY_LIMIT or g >= ENTRY_LIMIT:
            cnt[CNT_OVERFLOW] = 1
            heapq.heappush(heap, item)
            break
        _crop(acc, a, b, c, d, alpha)
        n += 1
        if depth + 1 > cnt[CNT_MAXDEPTH]:
            cnt[CNT_MAXDEPTH] = depth + 1
        heapq.heappush(heap, (-node_key(a, b, e, g, depth + 1, mode), a, b, e, g, depth + 1))
        heapq.heappush(heap, (-node_key(e, g, c, d, depth + 1, mode), e, g, c, d, depth + 1))
    # frontier in sorted order so the remainder sum is reproducible
    heap.sort()
    for item in heap:
        _leave(acc, item[1], item[2], item[3], item[4], alpha)
    cnt[CNT_CROPPED] = n
    cnt[CNT_FRONTIER] = len(heap)
    return acc, cnt


# -- lower envelope of the lattice tangent planes ---------------------------------
#
# For a fixed row y the plane value g(x) = x px + y py + |(x, y)| is convex in x
# with continuous minimiser x* = -px |y| / s, s = sqrt(1 - px^2), and row minimum
# |y| (s + sign(y) py) > 0. Rows are scanned outward from y = 0 until that lower
# bound exceeds the best value found; within a row, x is scanned outward from x*
# until g exceeds it. Both stops are certificates, so the result is the exact
# infimum up to rounding.


@numba.njit(cache=True, nogil=True, inline="always")
def _plane(x, y, px, py):
    return x * px + y * py + math.hypot(x, y)


@numba.njit(cache=True, nogil=True)
def _scan_row(y, px, py, s, slack, best, cand, nc, keep):
    xs = -px * abs(y) / s
    x0 = math.floor(xs)
    for direction in (-1, 1):
        x = x0 if direction < 0 else x0 + 1
        while True:
            if x == 0 and y == 0:
                x += direction
                continue
            g = _plane(float(x), float(y), px, py)
            if g > best + slack:
                break
            if g < best:
                best = g
            if keep:
                if nc == cand.shape[0]:
                    # drop entries that can no longer tie, then grow if still full
                    m = 0
                    for i in range(nc):
                        if cand[i, 2] <= best + slack:
                            cand[m] = cand[i]
                            m += 1
                    nc = m
                    if nc == cand.shape[0]:
                        grown = np.empty((2 * nc, 3))
                        grown[:nc] = cand
                        cand = grown
                cand[nc, 0] = x
                cand[nc, 1] = y
                cand[nc, 2] = g
                nc += 1
            x += direction
    return best, cand, nc


@numba.njit(cache=True, nogil=True)
def envelope_point(px, py, slack, cap, keep):
    """Minimum plane value at (px, py), candidates within ``slack`` and a certified flag."""
    s = math.sqrt(1.0 - px * px)
    best = min(1.0 + px, 1.0 - px, 1.0 + py, 1.0 - py)
    cand = np.empty((16, 3))
    nc = 0
    best, cand, nc = _scan_row(0, px, py, s, slack, best, cand, nc, keep)
    up = s + py
    down = s - py
    y = 1
    certified = False
    while y <= cap:
        go_up = y * up <= best + slack
        go_down = y * down <= best + slack
        if not go_up and not go_down:
            certified = True
            break
        if go_up:
            best, cand, nc = _scan_row(y, px, py, s, slack, best, cand, nc, keep)
        if go_down:
            best, cand, nc = _scan_row(-y, px, py, s, slack, best, cand, nc, keep)
        y += 1
    m = 0
    for i in range(nc):
        if cand[i, 2] <= best + slack:
            cand[m] = cand[i]
            m += 1
    return best, cand[:m].copy(), certified


@numba.njit(cache=True, nogil=True)
def envelope_many(px, py, cap):
    n = px.shape[0]
    out = np.empty(n)
    ok = np.empty(n, dtype=np.bool_)
    for i in range(n):
        best, _, cert = envelope_point(px[i], py[i], 0.0, cap, False)
        out[i] = best
        ok[i] = cert
    return out, ok


# -- random tree walks -------------------------------------------------------------


@numba.njit(cache=True, nogil=True)
def random_walks(target, words, max_entry):
    """Walk ``target[i]`` steps from the root, branch bits taken 63 per word of ``words[i]``."""
    n = target.shape[0]
    out = np.empty((n, 4), dtype=np.int64)
    for i in range(n):
        a, b, c, d = 1, 0, 0, 1
        for step in range(target[i]):
            e = a + c
            g = b + d
            if e > max_entry or g > max_entry:
                break
            if (words[i, step // 63] >> (step % 63)) & 1:
                a, b = e, g
            else:
                c, d = e, g
        out[i, 0] = a
        out[i, 1] = b
        out[i, 2] = c
        out[i, 3] = d
    return out
