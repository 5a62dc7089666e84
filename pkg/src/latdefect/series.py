"""Partial sums of f**alpha over first-quadrant unimodular pairs.

For alpha = 1 and alpha = 2 every uncropped corner carries an exact remainder:

* ``R1`` is the lattice length of the two half-sides meeting at the corner;
  cropping removes exactly ``f`` of it, so R1 equals the sum of f over the
  corner's subtree.
* ``R2`` is twice the area between the corner and the disc; cropping removes
  a triangle of area ``f**2 / 2``.

Hence ``partial + remainder`` equals 2 (resp. 2 - pi/2) at every frontier,
which the reports expose as a self-check. For other alpha the engine reports
a rigorous tail bound (alpha >= 1) or a flagged extrapolation (alpha < 1).
"""

from __future__ import annotations

import functools
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels as K
from ._numfmt import round_floats
from .errors import DivergenceSuspected
from .lattice import ExtendedMatrix, UnimodularPair, enumerate_pairs, extended_defect

__all__ = [
    "SIGMA_F",
    "SIGMA_F2",
    "CornerState",
    "SumReport",
    "corner_state",
    "corner_remainders",
    "gain_bound",
    "exact_partial_sum",
    "truncated_sum",
    "zeta_scan",
    "extended_sum",
    "extended_partial_sums",
    "sl2z_matrices",
    "first_quadrant_bounded_sum",
]

SIGMA_F = 2.0
SIGMA_F2 = 2.0 - math.pi / 2.0

SPLIT_DEPTH = 6

_KEYS = {"remainder": K.MODE_R1, "gain": K.MODE_GAIN, "remainder2": K.MODE_R2}


# -- corner geometry -------------------------------------------------------------


def corner_remainders(pair: UnimodularPair) -> tuple[float, float]:
    """``(R1, R2)`` for the corner of ``pair`` in closed, cancellation-free form."""
    a, b, c, d = pair.entries
    nv = math.hypot(a, b)
    nw = math.hypot(c, d)
    t = 1.0 / (nv * nw + (a * c + b * d))
    return t * (1.0 / nv + 1.0 / nw), float(K.r2_from_t(t))


def gain_bound(pair: UnimodularPair) -> float:
    """Upper bound on f for the pair and every descendant.

    A descendant keeps one vector of length >= min(|v|, |w|) and one of length
    >= |v + w|, and f <= 1 / (|x||y| max(|x|, |y|)) for any pair (x, y).
    """
    a, b, c, d = pair.entries
    return float(K.node_key(a, b, c, d, 0, K.MODE_GAIN))


@dataclass(frozen=True)
class CornerState:
    pair: UnimodularPair
    q: tuple[float, float]
    t_v: tuple[float, float]
    t_w: tuple[float, float]
    r1: float
    r2: float


def corner_state(pair: UnimodularPair) -> CornerState:
    """Corner of the circumscribed polygon where the tangent lines of v and w meet.

    ``q`` solves ``v.q = |v|, w.q = |w|``; it is evaluated as
    ``(v + t rot90(v)) / |v|`` which is the exact solution without the
    cancellation of Cramer's rule.
    """
    a, b, c, d = pair.entries
    nv = math.hypot(a, b)
    nw = math.hypot(c, d)
    t = 1.0 / (nv * nw + (a * c + b * d))
    q = ((a - t * b) / nv, (b + t * a) / nv)
    r1, r2 = corner_remainders(pair)
    return CornerState(pair, q, (a / nv, b / nv), (c / nw, d / nw), r1, r2)


# -- reports ---------------------------------------------------------------------

MODES = ("exact-remainder", "bounded-tail", "heuristic", "divergent")


@dataclass(frozen=True)
class SumReport:
    power: float
    partial: float
    remainder: float
    total: float
    terms: int
    frontier_size: int
    mode: str
    error_estimate: float = math.nan
    companion: float = math.nan
    budget_exhausted: bool = False
    extra: dict = field(default_factory=dict)

    def to_dict(self, digits: int = 17) -> dict:
        out = asdict(self)
        return round_floats(out, digits)


@dataclass
class _Totals:
    acc: np.ndarray
    cropped: int
    frontier: int
    max_depth: int
    exhausted: bool = False

    def value(self, slot: int) -> float:
        return math.fsum(self.acc[slot])


def _merge(parts: list[tuple[np.ndarray, np.ndarray]]) -> _Totals:
    acc = np.zeros((K.N_ACC, 2))
    for slot in range(K.N_ACC):
        # single correctly rounded value; lo slot stays zero
        acc[slot, 0] = math.fsum(float(x) for a, _ in parts for x in a[slot])
    cnt = [int(sum(c[i] for _, c in parts)) for i in range(K.N_CNT)]
    if cnt[K.CNT_OVERFLOW]:
        raise OverflowError("pair entries exceeded 2**53; lower the budget")
    return _Totals(acc, cnt[K.CNT_CROPPED], cnt[K.CNT_FRONTIER], max(int(c[K.CNT_MAXDEPTH]) for _, c in parts))


def _root_array() -> np.ndarray:
    return np.array([[1, 0, 0, 1, 0]], dtype=np.int64)


def _run_threshold(mode: int, tau: float, max_depth: int, alpha: float, threads: int = 1) -> _Totals:
    """DFS crop of all corners meeting the criterion, split into fixed seed subtrees.

    The split depth does not depend on ``threads`` so the merged result is
    bit-identical for every worker count.
    """
    acc, cnt, seeds = K.dfs_sum(_root_array(), mode, tau, max_depth, float(alpha), SPLIT_DEPTH)
    parts = [(acc, cnt)]

    def work(seed):
        a, c, _ = K.dfs_sum(seed.reshape(1, 5), mode, tau, max_depth, float(alpha), -1)
        return a, c

    if threads > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts.extend(pool.map(work, list(seeds)))
    else:
        parts.extend(work(s) for s in seeds)
    return _merge(parts)


@functools.lru_cache(maxsize=64)
def _run_best_first(mode: int, budget: int, tau: float, alpha: float) -> _Totals:
    acc, cnt = K.best_first_sum(1, 0, 0, 1, mode, int(budget), tau, float(alpha))
    totals = _merge([(acc, cnt)])
    totals.exhausted = totals.cropped >= budget
    return totals


def _threads(threads: int | None) -> int:
    return max(1, threads or 1)


# -- exact partial sums ----------------------------------------------------------


def exact_partial_sum(
    power: int,
    *,
    depth: int | None = None,
    budget: int | None = None,
    key: str | None = None,
    threads: int | None = 1,
) -> SumReport:
    """Partial sum of f**power with the exact geometric remainder of the frontier.

    ``depth=n`` crops every pair of depth < n (frontier = the 2**n depth-n
    corners, i.e. the corners of P_n). ``budget=M`` crops M corners
    best-first; ``key`` defaults to ``"gain"`` for power 1 and ``"remainder2"``
    for power 2.
    """
    if power not in (1, 2):
        raise ValueError("exact remainders exist only for power 1 and 2")
    if (depth is None) == (budget is None):
        raise ValueError("give exactly one of depth or budget")
    if depth is not None:
        if depth < 0:
            raise ValueError("depth must be >= 0")
        tot = _run_threshold(K.MODE_DEPTH, 0.0, int(depth), float(power), _threads(threads))
        frontier_policy = {"depth": int(depth)}
    else:
        key = key or ("gain" if power == 1 else "remainder2")
        tot = _run_best_first(_KEYS[key], int(budget), 0.0, float(power))
        frontier_policy = {"budget": int(budget), "key": key}
    partial = tot.value(K.ACC_PARTIAL)
    remainder = tot.value(K.ACC_REM1 if power == 1 else K.ACC_REM2)
    target = SIGMA_F if power == 1 else SIGMA_F2
    total = partial + remainder
    return SumReport(
        power=float(power),
        partial=partial,
        remainder=remainder,
        total=total,
        terms=tot.cropped,
        frontier_size=tot.frontier,
        mode="exact-remainder",
        error_estimate=abs(total - target),
        budget_exhausted=tot.exhausted,
        extra=frontier_policy,
    )


# -- truncated sums for general alpha -------------------------------------------


def _bounded(alpha: float, tot: _Totals, policy: dict) -> SumReport:
    partial = tot.value(K.ACC_PARTIAL)
    bound = tot.value(K.ACC_TAIL)
    return SumReport(
        power=alpha,
        partial=partial,
        remainder=bound,
        total=partial + bound / 2.0,
        terms=tot.cropped,
        frontier_size=tot.frontier,
        mode="bounded-tail",
        error_estimate=bound / 2.0,
        companion=tot.value(K.ACC_COMPANION),
        budget_exhausted=tot.exhausted,
        extra=policy,
    )


def _geometric_tail(ratio: float) -> float:
    return ratio / (1.0 - ratio)


def truncated_sum(
    alpha: float,
    *,
    max_nodes: int | None = None,
    threshold: float | None = None,
    key: str = "gain",
    threads: int | None = 1,
) -> SumReport:
    """Sum of f**alpha over cropped corners with a tail estimate.

    alpha >= 1: ``remainder`` bounds the tail by sum(R1**alpha) over the
    frontier (each subtree's terms are <= its R1 and sum to R1), ``total`` is
    the midpoint of ``[partial, partial + remainder]``. A threshold alone runs
    a memory-light DFS that crops every corner whose ``key`` is >= threshold;
    ``max_nodes`` runs best-first.

    alpha < 1: no rigorous tail exists. Partial sums at budgets M/8, M/4, M/2, M
    are extrapolated assuming increments shrink like 2**-beta and
    2**-(beta + 1/4), beta = 3 alpha / 2 - 1, and the report is flagged
    ``heuristic``. If the increments do not shrink across the three doublings
    (or beta <= 0) :class:`DivergenceSuspected` is raised.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    mode = _KEYS[key]
    tau = float(threshold) if threshold is not None else 0.0
    if alpha >= 1.0:
        if max_nodes is not None:
            tot = _run_best_first(mode, int(max_nodes), tau, float(alpha))
            return _bounded(alpha, tot, {"max_nodes": int(max_nodes), "threshold": threshold, "key": key})
        if threshold is None:
            raise ValueError("give max_nodes or threshold")
        tot = _run_threshold(mode, tau, -1, float(alpha), _threads(threads))
        return _bounded(alpha, tot, {"threshold": tau, "key": key})
    return _heuristic_sum(alpha, int(max_nodes or 2**20), mode, tau, key)


def _heuristic_sum(alpha: float, max_nodes: int, mode: int, tau: float, key: str) -> SumReport:
    budgets = [max(1, max_nodes >> k) for k in (3, 2, 1, 0)]
    runs = [_run_best_first(mode, m, tau, float(alpha)) for m in budgets]
    sums = [r.value(K.ACC_PARTIAL) for r in runs]
    incs = [b - a for a, b in zip(sums, sums[1:])]
    last = runs[-1]
    beta = 1.5 * alpha - 1.0
    policy = {"budgets": budgets, "partials": sums, "key": key, "beta": beta}
    shrinking = [b < a for a, b in zip(incs, incs[1:])]
    if beta <= 0.0 or not any(shrinking):
        report = SumReport(
            power=alpha,
            partial=sums[-1],
            remainder=math.nan,
            total=math.nan,
            terms=last.cropped,
            frontier_size=last.frontier,
            mode="divergent",
            companion=last.value(K.ACC_COMPANION),
            budget_exhausted=last.exhausted,
            extra=policy,
        )
        ratios = [b / a for a, b in zip(incs, incs[1:]) if a]
        raise DivergenceSuspected(f"alpha={alpha}: increment ratios {ratios} do not shrink", report)
    g1 = _geometric_tail(2.0**-beta)
    g2 = _geometric_tail(2.0 ** -(beta + 0.25))
    first = [s + inc * g1 for s, inc in zip(sums[1:], incs)]
    second = [e1 + (e1 - e0) * g2 for e0, e1 in zip(first, first[1:])]
    total = second[-1]
    return SumReport(
        power=alpha,
        partial=sums[-1],
        remainder=total - sums[-1],
        total=total,
        terms=last.cropped,
        frontier_size=last.frontier,
        mode="heuristic",
        error_estimate=abs(second[-1] - second[-2]),
        companion=last.value(K.ACC_COMPANION),
        budget_exhausted=last.exhausted,
        extra=policy,
    )


def zeta_scan(alphas, *, max_nodes: int = 2**20, threshold: float | None = None) -> list[SumReport]:
    """One report per alpha; divergent alphas come back with ``mode='divergent'``.

    Each report's ``companion`` is sum (|v||w||v+w|)**-alpha over the same pairs.
    """
    out = []
    for alpha in alphas:
        try:
            out.append(truncated_sum(float(alpha), max_nodes=max_nodes, threshold=threshold))
        except DivergenceSuspected as exc:
            out.append(exc.report)
    return out


# -- the sum over all of SL(2, Z) --------------------------------------------------


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _k_interval(base: int, step: int, bound: int) -> tuple[float, float]:
    # k with |base + k step| <= bound
    if step == 0:
        return (-math.inf, math.inf) if abs(base) <= bound else (1.0, 0.0)
    lo, hi = (-bound - base) / step, (bound - base) / step
    return (min(lo, hi), max(lo, hi))


def sl2z_matrices(bound: int):
    """All (a, b, c, d) with ad - bc = 1 and every |entry| <= bound."""
    for a, b in itertools.product(range(-bound, bound + 1), repeat=2):
        if math.gcd(a, b) != 1:
            continue
        g, x, y = _egcd(a, b)
        # a x + b y = g = +-1, so (c, d) = s (-y, x) solves ad - bc = 1
        s = g
        c0, d0 = -s * y, s * x
        lo1, hi1 = _k_interval(c0, a, bound)
        lo2, hi2 = _k_interval(d0, b, bound)
        lo, hi = math.ceil(max(lo1, lo2) - 1e-9), math.floor(min(hi1, hi2) + 1e-9)
        for k in range(lo, hi + 1):
            c, d = c0 + k * a, d0 + k * b
            if abs(c) <= bound and abs(d) <= bound:
                yield a, b, c, d


def extended_partial_sums(max_bound: int) -> list[tuple[int, float]]:
    """``(N, sum of extended_defect over |entries| <= N)`` for N = 1..max_bound."""
    buckets: dict[int, list[float]] = {}
    for a, b, c, d in sl2z_matrices(max_bound):
        m = max(abs(a), abs(b), abs(c), abs(d))
        buckets.setdefault(m, []).append(extended_defect(ExtendedMatrix(a, b, c, d)))
    out = []
    running: list[float] = []
    for n in range(1, max_bound + 1):
        running.extend(buckets.get(n, []))
        out.append((n, math.fsum(running)))
    return out


def extended_sum(N: int) -> SumReport:
    """Sum of the extended defect over SL(2, Z) matrices with entries bounded by N.

    No limit is known, so the report is a plain partial sum flagged heuristic.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    terms = [extended_defect(ExtendedMatrix(*m)) for m in sl2z_matrices(N)]
    partial = math.fsum(terms)
    return SumReport(
        power=1.0,
        partial=partial,
        remainder=math.nan,
        total=partial,
        terms=len(terms),
        frontier_size=0,
        mode="heuristic",
        extra={"N": N},
    )


def first_quadrant_bounded_sum(N: int) -> float:
    """Sum of f over tree pairs whose entries are all <= N (cross-check for the extended sum)."""
    return math.fsum(t.f for t in enumerate_pairs("threshold-on-f", max_entry=N))
