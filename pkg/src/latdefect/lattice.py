"""Exact lattice arithmetic: primitive vectors, unimodular pairs and the defect f.

Every first-quadrant pair ``(v, w)`` with ``det(v, w) = 1`` appears exactly once
in the Stern-Brocot tree rooted at ``((1, 0), (0, 1))``; the children of
``(v, w)`` are ``(v, v + w)`` and ``(v + w, w)``.

Coordinates are Python ints, so they never overflow; floats only appear when a
norm or a defect is evaluated.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Union

import numpy as np

from . import _kernels as K
from .errors import BudgetExhausted, NotPrimitive, NotUnimodular, ZeroVector

__all__ = [
    "PrimitiveVector",
    "UnimodularPair",
    "DefectTerm",
    "ExtendedMatrix",
    "ROOT",
    "make_primitive",
    "defect",
    "defect_naive",
    "defect_arrays",
    "defect_naive_many",
    "mediant_children",
    "enumerate_pairs",
    "extended_defect",
    "extended_defect_naive",
    "same_closed_quadrant",
    "rotate_pair",
    "LATTICE_SYMMETRIES",
    "random_walk_pairs",
    "PairStream",
]


@dataclass(frozen=True, slots=True)
class PrimitiveVector:
    x: int
    y: int

    def __post_init__(self):
        if self.x == 0 and self.y == 0:
            raise ZeroVector("the zero vector has no direction")
        if math.gcd(self.x, self.y) != 1:
            raise NotPrimitive(f"({self.x}, {self.y}) is not primitive")

    @property
    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def dot(self, other: "PrimitiveVector") -> int:
        return self.x * other.x + self.y * other.y

    def det(self, other: "PrimitiveVector") -> int:
        return self.x * other.y - self.y * other.x

    def rotated(self, quarter_turns: int = 1) -> "PrimitiveVector":
        x, y = self.x, self.y
        for _ in range(quarter_turns % 4):
            x, y = -y, x
        return _vec(x, y)

    def __iter__(self):
        yield self.x
        yield self.y


def _vec(x: int, y: int) -> PrimitiveVector:
    # Skips the gcd check; callers guarantee primitivity (e.g. sums of a basis).
    v = object.__new__(PrimitiveVector)
    object.__setattr__(v, "x", x)
    object.__setattr__(v, "y", y)
    return v


def make_primitive(x: int, y: int) -> PrimitiveVector:
    """Validate ``(x, y)`` as a primitive lattice vector and return it unchanged."""
    return PrimitiveVector(int(x), int(y))


@dataclass(frozen=True, slots=True)
class UnimodularPair:
    v: PrimitiveVector
    w: PrimitiveVector

    def __post_init__(self):
        if self.v.det(self.w) != 1:
            raise NotUnimodular(f"det({tuple(self.v)}, {tuple(self.w)}) = {self.v.det(self.w)}, expected 1")

    @classmethod
    def of(cls, a: int, b: int, c: int, d: int) -> "UnimodularPair":
        return cls(make_primitive(a, b), make_primitive(c, d))

    @property
    def entries(self) -> tuple[int, int, int, int]:
        return (self.v.x, self.v.y, self.w.x, self.w.y)

    @property
    def mediant(self) -> PrimitiveVector:
        return _vec(self.v.x + self.w.x, self.v.y + self.w.y)

    @property
    def first_quadrant(self) -> bool:
        return min(self.entries) >= 0

    def __iter__(self):
        yield self.v
        yield self.w


def _pair(a: int, b: int, c: int, d: int) -> UnimodularPair:
    p = object.__new__(UnimodularPair)
    object.__setattr__(p, "v", _vec(a, b))
    object.__setattr__(p, "w", _vec(c, d))
    return p


ROOT = _pair(1, 0, 0, 1)


@dataclass(frozen=True, slots=True)
class DefectTerm:
    pair: UnimodularPair
    f: float
    depth: int


@dataclass(frozen=True, slots=True)
class ExtendedMatrix:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise NotUnimodular(f"{self} has determinant {self.a * self.d - self.b * self.c}")


def defect(pair: UnimodularPair) -> float:
    """Triangle-inequality defect ``|v| + |w| - |v + w|`` without cancellation.

    Uses ``f = 2 / ((|v||w| + v.w) (|v| + |w| + |v+w|))``, which follows from
    ``|v|^2 |w|^2 - (v.w)^2 = det(v, w)^2 = 1``.
    """
    a, b, c, d = pair.entries
    nv = math.hypot(a, b)
    nw = math.hypot(c, d)
    nu = math.hypot(a + c, b + d)
    return 2.0 / ((nv * nw + (a * c + b * d)) * (nv + nw + nu))


def _fixed_point_bits(*entries: int) -> int:
    # Defect is >= ~1/(4 |v|^3), so 3 bits per input bit plus a 53-bit mantissa and margin.
    top = max(abs(e) for e in entries).bit_length()
    return 3 * top + 96


def defect_naive(pair: UnimodularPair, bits: int | None = None) -> float:
    """Evaluate ``sqrt(a²+b²) + sqrt(c²+d²) - sqrt((a+c)²+(b+d)²)`` literally.

    Each root is taken in binary fixed point with ``bits`` fractional bits via
    ``math.isqrt``; the result is off by at most ``2 * 2**-bits`` before the final
    rounding to float.
    """
    a, b, c, d = pair.entries
    return _naive_sum(a * a + b * b, c * c + d * d, (a + c) ** 2 + (b + d) ** 2, bits or _fixed_point_bits(a, b, c, d))


def _naive_sum(n1: int, n2: int, n3: int, bits: int, sign: int = 1) -> float:
    shift = 2 * bits
    total = math.isqrt(n1 << shift) + math.isqrt(n2 << shift) - sign * math.isqrt(n3 << shift)
    return total / (1 << bits)


def defect_naive_many(entries) -> np.ndarray:
    """:func:`defect_naive` for each ``a, b, c, d`` row, skipping pair validation."""
    out = np.empty(len(entries))
    for i, (a, b, c, d) in enumerate(np.asarray(entries, dtype=np.int64).tolist()):
        out[i] = _naive_sum(a * a + b * b, c * c + d * d, (a + c) ** 2 + (b + d) ** 2, _fixed_point_bits(a, b, c, d))
    return out


def defect_arrays(a, b, c, d) -> np.ndarray:
    """Vectorised :func:`defect` for arrays of first-quadrant pair entries."""
    a, b, c, d = (np.asarray(x, dtype=np.float64) for x in (a, b, c, d))
    nv = np.hypot(a, b)
    nw = np.hypot(c, d)
    nu = np.hypot(a + c, b + d)
    return 2.0 / ((nv * nw + (a * c + b * d)) * (nv + nw + nu))


def mediant_children(pair: UnimodularPair) -> tuple[UnimodularPair, UnimodularPair]:
    a, b, c, d = pair.entries
    e, g = a + c, b + d
    return _pair(a, b, e, g), _pair(e, g, c, d)


# -- enumeration -------------------------------------------------------------

Priority = Union[str, Callable[[UnimodularPair], float]]


def _resolve_priority(priority: Priority) -> Callable[[UnimodularPair], float]:
    if callable(priority):
        return priority
    from . import series

    table = {
        "remainder": lambda p: series.corner_remainders(p)[0],
        "remainder2": lambda p: series.corner_remainders(p)[1],
        "gain": series.gain_bound,
    }
    try:
        return table[priority]
    except KeyError:
        raise ValueError(f"unknown priority {priority!r}; expected one of {sorted(table)}") from None


class PairStream:
    """Iterator over :class:`DefectTerm` produced by :func:`enumerate_pairs`.

    After iteration, ``frontier`` lists the ``(pair, depth)`` corners that were
    never expanded and ``budget_exhausted`` tells whether ``max_nodes`` (rather
    than the strategy's own stopping rule) ended the run.
    """

    def __init__(self, strategy: str, max_depth, max_nodes, f_threshold, max_entry, priority, strict):
        self.strategy = strategy
        self.max_depth = max_depth
        self.max_nodes = max_nodes
        self.f_threshold = f_threshold
        self.max_entry = max_entry
        self.priority = priority
        self.strict = strict
        self.frontier: list[tuple[UnimodularPair, int]] = []
        self.budget_exhausted = False
        self.yielded = 0
        self._iter = None

    def __iter__(self) -> Iterator[DefectTerm]:
        return self

    def __next__(self) -> DefectTerm:
        if self._iter is None:
            self._iter = getattr(self, "_run_" + self.strategy.replace("-", "_"))()
        return next(self._iter)

    def _budget_left(self) -> bool:
        return self.max_nodes is None or self.yielded < self.max_nodes

    def _finish(self, frontier, exhausted: bool):
        self.frontier = list(frontier)
        self.budget_exhausted = exhausted
        if exhausted and self.strict:
            raise BudgetExhausted(f"node budget {self.max_nodes} exhausted", self.frontier, self.yielded)

    def _emit(self, pair: UnimodularPair, depth: int) -> DefectTerm:
        self.yielded += 1
        return DefectTerm(pair, defect(pair), depth)

    def _run_breadth_by_depth(self):
        level = [ROOT]
        depth = 0
        max_depth = self.max_depth if self.max_depth is not None else math.inf
        while depth <= max_depth:
            nxt = []
            for i, pair in enumerate(level):
                if not self._budget_left():
                    self._finish([(p, depth) for p in level[i:]] + [(p, depth + 1) for p in nxt], True)
                    return
                yield self._emit(pair, depth)
                nxt.extend(mediant_children(pair))
            level = nxt
            depth += 1
        self._finish([(p, depth) for p in level], False)

    def _run_best_first_by_remainder(self):
        key = _resolve_priority(self.priority)
        counter = itertools.count()
        heap = [(-key(ROOT), next(counter), ROOT, 0)]
        threshold = self.f_threshold
        while heap:
            neg, _, pair, depth = heap[0]
            stop_depth = self.max_depth is not None and depth > self.max_depth
            stop_key = threshold is not None and -neg < threshold
            if stop_key or stop_depth:
                break
            if not self._budget_left():
                self._finish([(p, d) for _, _, p, d in sorted(heap)], True)
                return
            heapq.heappop(heap)
            yield self._emit(pair, depth)
            for child in mediant_children(pair):
                heapq.heappush(heap, (-key(child), next(counter), child, depth + 1))
        self._finish([(p, d) for _, _, p, d in sorted(heap)], False)

    def _run_threshold_on_f(self):
        from .series import gain_bound

        tau = self.f_threshold if self.f_threshold is not None else 0.0
        if tau <= 0.0 and self.max_entry is None:
            raise ValueError("threshold strategy needs f_threshold > 0 or max_entry")
        limit = self.max_entry
        frontier = []
        stack = [(ROOT, 0)]
        while stack:
            pair, depth = stack.pop()
            if limit is not None and max(pair.entries) > limit:
                frontier.append((pair, depth))
                continue
            if gain_bound(pair) < tau or (self.max_depth is not None and depth > self.max_depth):
                frontier.append((pair, depth))
                continue
            f = defect(pair)
            if f >= tau:
                if not self._budget_left():
                    self._finish(frontier + [(pair, depth)] + stack[::-1], True)
                    return
                self.yielded += 1
                yield DefectTerm(pair, f, depth)
            left, right = mediant_children(pair)
            stack.append((right, depth + 1))
            stack.append((left, depth + 1))
        self._finish(frontier, False)


_STRATEGIES = {"breadth-by-depth", "best-first-by-remainder", "threshold-on-f"}


def enumerate_pairs(
    strategy: str = "breadth-by-depth",
    *,
    max_depth: int | None = None,
    max_nodes: int | None = None,
    f_threshold: float | None = None,
    max_entry: int | None = None,
    priority: Priority = "remainder",
    strict: bool = False,
) -> PairStream:
    """Stream first-quadrant unimodular pairs from the Stern-Brocot tree.

    ``breadth-by-depth`` yields the 2**k pairs of depth k for k <= max_depth.
    ``best-first-by-remainder`` pops corners by ``priority`` (the R1 remainder
    by default, ``"gain"`` for the subtree bound on f, or any callable).
    ``threshold-on-f`` yields exactly the pairs with f >= f_threshold (and, when
    given, all entries <= max_entry), pruning subtrees by the gain bound.

    With ``strict=True`` a run cut short by ``max_nodes`` raises
    :class:`BudgetExhausted` after the last term instead of just setting
    ``budget_exhausted``.
    """
    if strategy not in _STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {sorted(_STRATEGIES)}")
    if max_depth is None and max_nodes is None and f_threshold is None and max_entry is None:
        raise ValueError("budget is empty: give max_depth, max_nodes, f_threshold or max_entry")
    return PairStream(strategy, max_depth, max_nodes, f_threshold, max_entry, priority, strict)


# -- symmetries and the full SL(2, Z) extension -------------------------------

LATTICE_SYMMETRIES: tuple[tuple[int, int, int, int], ...] = (
    (1, 0, 0, 1),
    (0, -1, 1, 0),
    (-1, 0, 0, -1),
    (0, 1, -1, 0),
    (1, 0, 0, -1),
    (-1, 0, 0, 1),
    (0, 1, 1, 0),
    (0, -1, -1, 0),
)


def rotate_pair(pair: UnimodularPair, quarter_turns: int) -> UnimodularPair:
    """Rotate both vectors by a multiple of 90 degrees (determinant is preserved)."""
    v = pair.v.rotated(quarter_turns)
    w = pair.w.rotated(quarter_turns)
    return _pair(v.x, v.y, w.x, w.y)


def _closed_quadrants(x: int, y: int) -> set[int]:
    out = set()
    if x >= 0 and y >= 0:
        out.add(0)
    if x <= 0 and y >= 0:
        out.add(1)
    if x <= 0 and y <= 0:
        out.add(2)
    if x >= 0 and y <= 0:
        out.add(3)
    return out


def same_closed_quadrant(a: int, b: int, c: int, d: int) -> bool:
    """True when one closed quadrant contains both (a, b) and (c, d); axis vectors sit in two."""
    return bool(_closed_quadrants(a, b) & _closed_quadrants(c, d))


def extended_defect(m: ExtendedMatrix) -> float:
    """Defect on all of SL(2, Z): ``|v|+|w|-|v+w|`` within a quadrant, ``|v|+|w|-|v-w|`` across.

    Both branches use the cancellation-free form
    ``2 g / (|v| + |w| + |v ± w|)`` with ``g = |v||w| ∓ v.w`` rewritten as
    ``1 / (|v||w| ± v.w)`` whenever the direct difference would cancel.
    """
    a, b, c, d = m.a, m.b, m.c, m.d
    nv = math.hypot(a, b)
    nw = math.hypot(c, d)
    dot = a * c + b * d
    if same_closed_quadrant(a, b, c, d):
        s = 1
        nz = math.hypot(a + c, b + d)
    else:
        s = -1
        nz = math.hypot(a - c, b - d)
    # g = |v||w| - s*v.w ; |v|^2|w|^2 - dot^2 = 1
    sd = s * dot
    g = 1.0 / (nv * nw + sd) if sd >= 0 else nv * nw - sd
    return 2.0 * g / (nv + nw + nz)


def extended_defect_naive(m: ExtendedMatrix, bits: int | None = None) -> float:
    a, b, c, d = m.a, m.b, m.c, m.d
    bits = bits or _fixed_point_bits(a, b, c, d, 1)
    if same_closed_quadrant(a, b, c, d):
        n3 = (a + c) ** 2 + (b + d) ** 2
    else:
        n3 = (a - c) ** 2 + (b - d) ** 2
    return _naive_sum(a * a + b * b, c * c + d * d, n3, bits)


# -- random tree walks ---------------------------------------------------------


def random_walk_pairs(n: int, max_entry: int, rng: np.random.Generator, max_steps: int = 200) -> np.ndarray:
    """End points of ``n`` random root-to-node walks with every entry <= max_entry.

    Each walk picks left/right uniformly and stops after a random number of steps
    in [1, max_steps] or just before an entry would exceed ``max_entry``.
    Returns an ``(n, 4)`` int64 array of ``a, b, c, d``.
    """
    if max_entry >= K.ENTRY_LIMIT:
        raise OverflowError("max_entry must stay below 2**53")
    target = rng.integers(1, max_steps + 1, size=n)
    words = rng.integers(0, 2**63, size=(n, (max_steps + 62) // 63), dtype=np.int64)
    return K.random_walks(target, words, int(max_entry))
