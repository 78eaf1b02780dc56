"""Compact subsets of the real line as finite unions of closed intervals.

A :class:`CompactSet` is always kept in canonical form: parts sorted, pairwise
disjoint, and separated by gaps larger than ``MERGE_EPS`` (relative).  All
arithmetic is exact up to floating-point rounding; in particular the Hausdorff
distance is computed in closed form, never by sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MERGE_EPS = 1e-12
CONTAINMENT_EPS = 1e-9


@dataclass(frozen=True, order=True)
class Interval:
    """Closed interval ``[lo, hi]``; a point when ``lo == hi``."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"interval endpoints must be finite, got [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __str__(self) -> str:
        return f"[{self.lo!r},{self.hi!r}]"


# single-interval elements of K_c(R)
ConvexCompact = Interval


def _merge_tol(a: float, b: float) -> float:
    return MERGE_EPS * max(1.0, abs(a), abs(b))


def _normalize(pairs: Iterable[tuple[float, float]]) -> tuple[Interval, ...]:
    items = sorted((float(lo), float(hi)) for lo, hi in pairs)
    if not items:
        raise ValueError("a compact set must be non-empty")
    merged: list[list[float]] = [list(items[0])]
    for lo, hi in items[1:]:
        cur = merged[-1]
        if lo - cur[1] <= _merge_tol(lo, cur[1]):
            cur[1] = max(cur[1], hi)
        else:
            merged.append([lo, hi])
    return tuple(Interval(lo, hi) for lo, hi in merged)


class CompactSet:
    """Non-empty compact subset of R stored as disjoint closed intervals."""

    __slots__ = ("_parts",)

    def __init__(self, parts: Iterable[Interval | tuple[float, float]]):
        pairs = [(p.lo, p.hi) if isinstance(p, Interval) else tuple(p) for p in parts]
        for lo, hi in pairs:
            if lo > hi:
                raise ValueError(f"empty interval [{lo}, {hi}]")
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError("compact sets must have finite endpoints")
        self._parts = _normalize(pairs)

    @classmethod
    def interval(cls, lo: float, hi: float) -> CompactSet:
        return cls([(lo, hi)])

    @classmethod
    def point(cls, x: float) -> CompactSet:
        return cls([(x, x)])

    @property
    def parts(self) -> tuple[Interval, ...]:
        return self._parts

    @property
    def lo(self) -> float:
        return self._parts[0].lo

    @property
    def hi(self) -> float:
        return self._parts[-1].hi

    @property
    def is_convex(self) -> bool:
        return len(self._parts) == 1

    @property
    def is_point(self) -> bool:
        return self.is_convex and self._parts[0].lo == self._parts[0].hi

    def hull(self) -> CompactSet:
        return CompactSet.interval(self.lo, self.hi)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array([p.lo for p in self._parts]), np.array([p.hi for p in self._parts]))

    def __len__(self) -> int:
        return len(self._parts)

    def __iter__(self):
        return iter(self._parts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CompactSet):
            return NotImplemented
        return self._parts == other._parts

    def __hash__(self) -> int:
        return hash(self._parts)

    def __repr__(self) -> str:
        return f"CompactSet({str(self)})"

    def __str__(self) -> str:
        return " ∪ ".join(str(p) for p in self._parts)

    def __add__(self, other: CompactSet) -> CompactSet:
        return minkowski_sum(self, other)

    def __sub__(self, other: CompactSet) -> CompactSet:
        return set_difference(self, other)

    def __neg__(self) -> CompactSet:
        return scale(-1.0, self)

    def __rmul__(self, k: float) -> CompactSet:
        return scale(k, self)

    def translate(self, c: float) -> CompactSet:
        return CompactSet((p.lo + c, p.hi + c) for p in self._parts)


def as_set(x: CompactSet | Interval | float | tuple[float, float]) -> CompactSet:
    if isinstance(x, CompactSet):
        return x
    if isinstance(x, Interval):
        return CompactSet([x])
    if isinstance(x, tuple):
        return CompactSet.interval(*x)
    return CompactSet.point(float(x))


def minkowski_sum(a: CompactSet, b: CompactSet) -> CompactSet:
    return CompactSet((p.lo + q.lo, p.hi + q.hi) for p in a.parts for q in b.parts)


def scale(k: float, a: CompactSet) -> CompactSet:
    if k == 0:
        return CompactSet.point(0.0)
    if k > 0:
        return CompactSet((k * p.lo, k * p.hi) for p in a.parts)
    return CompactSet((k * p.hi, k * p.lo) for p in a.parts)


def set_difference(a: CompactSet, b: CompactSet) -> CompactSet:
    """Element-wise difference ``{x - y : x in a, y in b}`` (not the set-theoretic one)."""
    return minkowski_sum(a, scale(-1.0, b))


def distance_to_set(x: np.ndarray | float, s: CompactSet) -> np.ndarray:
    """Euclidean distance from each point of ``x`` to the set ``s``."""
    x = np.asarray(x, dtype=float)
    los, his = s.arrays()
    idx = np.searchsorted(los, x, side="right") - 1
    left = np.where(idx >= 0, x - his[np.clip(idx, 0, None)], np.inf)
    nxt = idx + 1
    right = np.where(nxt < len(los), los[np.clip(nxt, None, len(los) - 1)] - x, np.inf)
    return np.maximum(np.minimum(left, right), 0.0)


def _directed(a: CompactSet, b: CompactSet) -> float:
    # d(., b) restricted to a is piecewise linear; its maxima sit at endpoints of
    # a or at midpoints of b's gaps that fall inside a
    alo, ahi = a.arrays()
    candidates = [alo, ahi]
    if len(b) > 1:
        blo, bhi = b.arrays()
        mids = 0.5 * (bhi[:-1] + blo[1:])
        inside = np.zeros(mids.shape, dtype=bool)
        for p in a.parts:
            inside |= (mids >= p.lo) & (mids <= p.hi)
        candidates.append(mids[inside])
    return float(np.max(distance_to_set(np.concatenate(candidates), b)))


def hausdorff_distance(a: CompactSet, b: CompactSet) -> float:
    if a.is_convex and b.is_convex:
        return max(abs(a.lo - b.lo), abs(a.hi - b.hi))
    return max(_directed(a, b), _directed(b, a))


def diameter(a: CompactSet) -> float:
    return a.hi - a.lo


def norm_to_zero(a: CompactSet) -> float:
    """Hausdorff distance from ``a`` to ``{0}``."""
    return max(abs(a.lo), abs(a.hi))


def subset_leq(a: CompactSet, b: CompactSet, eps: float = CONTAINMENT_EPS) -> bool:
    """True when every part of ``a`` lies in some part of ``b`` up to ``eps``."""
    blo, bhi = b.arrays()
    for p in a.parts:
        inside = (blo - eps <= p.lo) & (p.hi <= bhi + eps)
        if not inside.any():
            return False
    return True


def interval_hausdorff(alo, ahi, blo, bhi) -> np.ndarray:
    """Vectorised Hausdorff distance between intervals ``[alo,ahi]`` and ``[blo,bhi]``."""
    return np.maximum(np.abs(np.subtract(alo, blo)), np.abs(np.subtract(ahi, bhi)))


def interval_scale(k: float, lo, hi) -> tuple[np.ndarray, np.ndarray]:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if k >= 0:
        return k * lo, k * hi
    return k * hi, k * lo


def union(sets: Sequence[CompactSet]) -> CompactSet:
    return CompactSet(p for s in sets for p in s.parts)
