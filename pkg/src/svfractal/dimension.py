"""Moran-equation bounds on the Hausdorff dimension of the graph, and a box counter."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DegenerateSequence, MonotonicityViolation, TooFewScales
from .partition import Partition

K_MAX = 64
STALL_TOL = 1e-9
MORAN_TOL = 1e-12
TAIL_WINDOW = 8
DEFAULT_SCALES = (1 / 8, 1 / 16, 1 / 32, 1 / 64, 1 / 128, 1 / 256)


@dataclass(frozen=True)
class RatioSequence:
    """Contraction ratios ``r_1, r_2, ...`` in ``(0, 1)``.

    ``length`` is ``None`` for an infinite sequence given by ``term(i)``
    (vectorised over 1-based ``i``); explicit sequences are finite.
    """

    kind: str
    term: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    length: Optional[int] = None

    @classmethod
    def explicit(cls, values: Sequence[float]) -> RatioSequence:
        v = np.asarray(values, dtype=float)
        _validate(v)
        return cls("explicit", lambda i: v[np.asarray(i) - 1], len(v))

    @classmethod
    def formula(cls, term: Callable[[np.ndarray], np.ndarray], kind: str = "formula") -> RatioSequence:
        return cls(kind, lambda i: np.asarray(term(np.asarray(i, dtype=float)), dtype=float))

    @classmethod
    def from_system(cls, alpha: float, partition: Partition, bound: str) -> RatioSequence:
        """``min(|alpha|, a_i)`` for ``bound="lower"``, ``max(...)`` for ``"upper"``."""
        a = abs(alpha)
        if bound == "lower":
            if a == 0:
                raise DegenerateSequence("alpha = 0 gives zero lower ratios")
            return cls("system:lower", lambda i: np.minimum(a, partition.slopes(np.asarray(i))))
        if bound == "upper":
            return cls("system:upper", lambda i: np.maximum(a, partition.slopes(np.asarray(i))))
        raise ValueError("bound must be 'lower' or 'upper'")

    def first(self, k: int) -> np.ndarray:
        if self.length is not None:
            k = min(k, self.length)
        v = self.term(np.arange(1, k + 1))
        _validate(v)
        return v


def _validate(v: np.ndarray):
    if len(v) == 0 or np.any(~np.isfinite(v)) or np.any(v <= 0) or np.any(v >= 1):
        raise DegenerateSequence("ratios must lie strictly between 0 and 1")


def _moran_sum(r: np.ndarray, s: float) -> float:
    return math.fsum(np.power(r, s).tolist())


def _bisect_decreasing(f: Callable[[float], float], tol: float) -> float:
    """Root of a strictly decreasing ``f`` with ``f(0) > 0``."""
    lo, hi = 0.0, 1.0
    while f(hi) > 0:
        lo, hi = hi, 2 * hi
        if hi > 1e6:
            raise DegenerateSequence("Moran root exceeds 1e6")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = f(mid)
        if abs(val) <= tol or hi - lo <= 4 * math.ulp(hi):
            return mid
        if val > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def moran_solve_finite(b: Sequence[float], tol: float = MORAN_TOL) -> float:
    """Unique ``s`` with ``sum_i b_i^s = 1``."""
    r = np.asarray(b, dtype=float)
    if len(r) < 2:
        raise ValueError("need at least two ratios")
    _validate(r)
    return _bisect_decreasing(lambda s: _moran_sum(r, s) - 1.0, tol)


@dataclass(frozen=True)
class StarResult:
    s_star: float
    s_k: list[float]
    stalled: bool

    @property
    def not_stalled(self) -> bool:
        return not self.stalled


def s_star(b: RatioSequence, k_max: int = K_MAX, stall_tol: float = STALL_TOL) -> StarResult:
    """Roots ``s_2, s_3, ...`` of the truncated Moran equations.

    Stops once an increment drops below ``stall_tol``.  A finite explicit
    sequence that runs out first is also reported as stalled, since its last
    root is the exact value.
    """
    r = b.first(k_max)
    seq: list[float] = []
    for k in range(2, len(r) + 1):
        s = moran_solve_finite(r[:k])
        if seq and s < seq[-1] - 1e-12:
            raise MonotonicityViolation(f"s_{k} = {s} < s_{k - 1} = {seq[-1]}")
        seq.append(s)
        if len(seq) > 1 and seq[-1] - seq[-2] < stall_tol:
            return StarResult(seq[-1], seq, True)
    exhausted = b.length is not None and b.length <= k_max
    return StarResult(seq[-1], seq, exhausted)


def _positive_infimum(r: np.ndarray) -> bool:
    # running minimum stops decreasing over the second half of the window
    half = len(r) // 2
    return bool(np.min(r[half:]) >= np.min(r[:half]))


def s_upper(c: RatioSequence, k_max: int = K_MAX, tol: float = MORAN_TOL) -> float:
    """``max(inf{s : sum_i c_i^s <= 1}, 1)``, or ``inf`` when the series diverges for every ``s``.

    Terms beyond ``k_max`` are replaced by a geometric tail whose ratio is the
    largest successive quotient among the last eight computed terms.
    """
    r = c.first(k_max)
    if c.length is not None and c.length <= k_max:
        root = moran_solve_finite(r, tol) if len(r) >= 2 else 0.0
        return max(root, 1.0)
    if _positive_infimum(r):
        return math.inf
    w = r[-TAIL_WINDOW:]
    rho = float(np.max(w[1:] / w[:-1]))
    if not rho < 1:
        return math.inf
    last = float(r[-1])

    def f(s: float) -> float:
        q = rho**s
        return _moran_sum(r, s) + last**s * q / (1 - q) - 1.0

    return max(_bisect_decreasing(f, tol), 1.0)


@dataclass
class DimensionReport:
    s_star: float
    s_upper: float
    s_k_sequence: list[float]
    stalled: bool = True
    box_estimate: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "s_star": self.s_star,
            "s_k": list(self.s_k_sequence),
            "stalled": self.stalled,
            "s_upper": "inf" if math.isinf(self.s_upper) else self.s_upper,
            "box_estimate": self.box_estimate,
        }


def dimension_report(
    alpha: float, partition: Partition, k_max: int = K_MAX, stall_tol: float = STALL_TOL
) -> DimensionReport:
    star = s_star(RatioSequence.from_system(alpha, partition, "lower"), k_max, stall_tol)
    upper = s_upper(RatioSequence.from_system(alpha, partition, "upper"), k_max)
    return DimensionReport(star.s_star, upper, star.s_k, star.stalled)


def box_counts(t, lo, hi, scales: Sequence[float]) -> np.ndarray:
    """Occupied cells of the union of vertical segments ``{t} x [lo, hi]`` per scale."""
    t, lo, hi = (np.asarray(x, dtype=float) for x in (t, lo, hi))
    x0, y0 = t.min(), lo.min()
    counts = []
    for d in scales:
        col = np.floor((t - x0) / d).astype(np.int64)
        r0 = np.floor((lo - y0) / d).astype(np.int64)
        r1 = np.floor((hi - y0) / d).astype(np.int64)
        ncol, nrow = int(col.max()) + 1, int(r1.max()) + 2
        # per-column difference array marks each covered row range
        diff = np.zeros((ncol, nrow), dtype=np.int64)
        np.add.at(diff, (col, r0), 1)
        np.add.at(diff, (col, r1 + 1), -1)
        counts.append(int(np.count_nonzero(np.cumsum(diff, axis=1))))
    return np.array(counts)


def box_count_estimate(cloud, scales: Sequence[float] = DEFAULT_SCALES) -> float:
    """Least-squares slope of ``log N(d)`` against ``log(1/d)``."""
    scales = [float(s) for s in scales]
    if len(scales) < 3:
        raise TooFewScales(f"need at least 3 scales, got {len(scales)}")
    if any(s <= 0 for s in scales):
        raise ValueError("scales must be positive")
    n = box_counts(cloud.t, cloud.lo, cloud.hi, scales)
    x = np.log(1.0 / np.array(scales))
    y = np.log(n)
    slope = np.polyfit(x, y, 1)[0]
    return float(slope)
