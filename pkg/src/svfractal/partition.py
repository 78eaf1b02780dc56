"""Countable partitions of ``I = [t1, t_inf]`` accumulating at ``t_inf``.

Nodes ``t_1 < t_2 < ...`` converge to ``t_inf``; ``I_n = [t_n, t_{n+1}]`` and
the affine contraction ``zeta_n`` maps ``I`` onto ``I_n``, either preserving
orientation (``zeta_n(t1) = t_n``) or reversing it (``zeta_n(t1) = t_{n+1}``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AtInfinityNode, IndexZero, OutOfDomain

INF = math.inf  # sentinel index for the accumulation node
INCREASING = "increasing"
DECREASING = "decreasing"
FAMILIES = ("dyadic", "geometric", "explicit")

_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class AffineMap:
    n: int
    slope: float
    intercept: float
    orientation: str

    def __call__(self, t):
        return self.intercept + (self.slope if self.orientation == INCREASING else -self.slope) * np.asarray(t)


@dataclass(frozen=True)
class Partition:
    """Node sequence of one of three families plus the maps ``zeta_n``.

    ``N`` is the truncation used wherever only finitely many maps can be
    retained (grid nodes, CIFS maps, measures, dimension sums).  The maps
    themselves are available for every ``n``.
    """

    t1: float = 0.0
    t_inf: float = 1.0
    family: str = "dyadic"
    ratio: float = 0.5
    prefix: tuple[float, ...] = ()
    N: int = 24
    orientation: str = INCREASING
    overrides: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.t1 < self.t_inf:
            raise ValueError(f"need t1 < t_inf, got {self.t1}, {self.t_inf}")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown partition family {self.family!r}")
        if self.N < 1:
            raise ValueError("truncation N must be a positive integer")
        for o in (self.orientation, *self.overrides):
            if o not in (INCREASING, DECREASING):
                raise ValueError(f"unknown orientation {o!r}")
        if self.family == "geometric" and not 0 < self.ratio < 1:
            raise ValueError("geometric ratio must lie in (0, 1)")
        if self.family == "explicit":
            pre = np.asarray(self.prefix, dtype=float)
            if len(pre) < 2 or pre[0] != self.t1 or np.any(np.diff(pre) <= 0) or pre[-1] >= self.t_inf:
                raise ValueError("explicit prefix must start at t1, increase strictly, and stay below t_inf")
            object.__setattr__(self, "prefix", tuple(float(x) for x in pre))

    @classmethod
    def dyadic(cls, t1: float = 0.0, t_inf: float = 1.0, N: int = 24, **kw) -> Partition:
        return cls(t1=t1, t_inf=t_inf, family="dyadic", ratio=0.5, N=N, **kw)

    @classmethod
    def geometric(cls, ratio: float, t1: float = 0.0, t_inf: float = 1.0, N: int = 24, **kw) -> Partition:
        return cls(t1=t1, t_inf=t_inf, family="geometric", ratio=ratio, N=N, **kw)

    @classmethod
    def explicit(cls, prefix: Sequence[float], t_inf: float, N: int = 24, **kw) -> Partition:
        return cls(t1=float(prefix[0]), t_inf=t_inf, family="explicit", prefix=tuple(prefix), N=N, **kw)

    @property
    def length(self) -> float:
        return self.t_inf - self.t1

    @property
    def _tail_ratio(self) -> float:
        if self.family == "dyadic":
            return 0.5
        if self.family == "geometric":
            return self.ratio
        tm, tm1 = self.prefix[-1], self.prefix[-2]
        return (self.t_inf - tm) / (self.t_inf - tm1)

    # -- nodes ---------------------------------------------------------------

    def nodes(self, n) -> np.ndarray:
        """Vectorised ``t_n`` for integer ``n >= 1``."""
        n = np.asarray(n)
        if np.any(n < 1):
            raise IndexZero("node indices start at 1")
        nf = n.astype(float)
        if self.family in ("dyadic", "geometric"):
            r = self._tail_ratio
            return self.t_inf - self.length * r ** (nf - 1)
        pre = np.asarray(self.prefix)
        m = len(pre)
        tail = self.t_inf - (self.t_inf - pre[-1]) * self._tail_ratio ** (nf - m)
        inner = np.minimum(n, m) - 1
        return np.where(n <= m, pre[inner], tail)

    def node(self, n) -> float:
        if n == INF:
            return self.t_inf
        if n < 1:
            raise IndexZero("node indices start at 1")
        return float(self.nodes(int(n)))

    def retained_nodes(self) -> np.ndarray:
        """``t_1, ..., t_{N+1}`` followed by ``t_inf``."""
        return np.append(self.nodes(np.arange(1, self.N + 2)), self.t_inf)

    def slopes(self, n) -> np.ndarray:
        """``a_n = (t_{n+1} - t_n) / (t_inf - t1)``, in closed form on the geometric tail
        (node differences cancel catastrophically once ``t_n`` rounds to ``t_inf``)."""
        n = np.asarray(n)
        if np.any(n < 1):
            raise IndexZero("map indices start at 1")
        r = self._tail_ratio
        nf = n.astype(float)
        if self.family in ("dyadic", "geometric"):
            return (1 - r) * r ** (nf - 1)
        pre = np.asarray(self.prefix)
        m = len(pre)
        tail = (self.t_inf - pre[-1]) / self.length * (1 - r) * r ** (nf - m)
        head = np.diff(pre) / self.length
        return np.where(n < m, head[np.clip(n, 1, m - 1) - 1], tail)

    def slope(self, n: int) -> float:
        return float(self.slopes(int(n)))

    def orientation_of(self, n: int) -> str:
        if 1 <= n <= len(self.overrides):
            return self.overrides[n - 1]
        return self.orientation

    def _signs(self, n: np.ndarray) -> np.ndarray:
        signs = np.ones(n.shape)
        for k, o in enumerate(self.overrides, start=1):
            if o == DECREASING:
                signs[n == k] = -1.0
        if self.orientation == DECREASING:
            signs[n > len(self.overrides)] = -1.0
        return signs

    def affine_map(self, n: int) -> AffineMap:
        if n < 1:
            raise IndexZero("map indices start at 1")
        o = self.orientation_of(n)
        a = self.slope(n)
        start = self.node(n) if o == INCREASING else self.node(n + 1)
        return AffineMap(n=n, slope=a, intercept=start - (a if o == INCREASING else -a) * self.t1, orientation=o)

    # -- maps ----------------------------------------------------------------

    def _check_domain(self, t: np.ndarray):
        slack = _DOMAIN_SLACK * self.length
        if np.any(t < self.t1 - slack) or np.any(t > self.t_inf + slack):
            raise OutOfDomain(f"points outside [{self.t1}, {self.t_inf}]")

    def zeta(self, n, t):
        """``zeta_n(t)``; ``n`` and ``t`` broadcast against each other."""
        scalar = np.ndim(n) == 0 and np.ndim(t) == 0
        n, t = np.broadcast_arrays(np.asarray(n), np.asarray(t, dtype=float))
        if np.any(n < 1):
            raise IndexZero("map indices start at 1")
        self._check_domain(t)
        a = self.slopes(n)
        sign = self._signs(n)
        start = np.where(sign > 0, self.nodes(n), self.nodes(n + 1))
        out = start + sign * a * (t - self.t1)
        return float(out) if scalar else out

    def zeta_inv(self, n, x):
        scalar = np.ndim(n) == 0 and np.ndim(x) == 0
        n, x = np.broadcast_arrays(np.asarray(n), np.asarray(x, dtype=float))
        if np.any(n < 1):
            raise IndexZero("map indices start at 1")
        lo, hi = self.nodes(n), self.nodes(n + 1)
        slack = _DOMAIN_SLACK * self.length
        if np.any(x < lo - slack) or np.any(x > hi + slack):
            raise OutOfDomain("point lies outside I_n")
        out = self._inverse(n, x, lo, hi)
        return float(out) if scalar else out

    def _inverse(self, n, x, lo, hi):
        a = (hi - lo) / self.length
        sign = self._signs(n)
        s = np.where(sign > 0, self.t1 + (x - lo) / a, self.t1 + (hi - x) / a)
        return np.clip(s, self.t1, self.t_inf)

    def locate(self, t):
        """Index ``n`` with ``t`` in ``I_n``; interior nodes belong to the lower interval."""
        scalar = np.ndim(t) == 0
        t = np.asarray(t, dtype=float)
        self._check_domain(t)
        if np.any(t >= self.t_inf):
            raise AtInfinityNode("t_inf lies in no I_n; use the limit equation")
        n = self._locate(t)
        return int(n) if scalar else n

    def _locate(self, t: np.ndarray) -> np.ndarray:
        t = np.maximum(t, self.t1)
        if self.family == "explicit":
            pre = np.asarray(self.prefix)
            m = len(pre)
            n = np.searchsorted(pre, t, side="left").astype(np.int64)
            beyond = t > pre[-1]
            with np.errstate(divide="ignore"):
                k = np.ceil(np.log((self.t_inf - t) / (self.t_inf - pre[-1])) / np.log(self._tail_ratio))
            n = np.where(beyond, m - 1 + np.maximum(k, 1), n)
        else:
            with np.errstate(divide="ignore"):
                k = np.ceil(np.log((self.t_inf - t) / self.length) / np.log(self._tail_ratio))
            n = k
        n = np.clip(np.nan_to_num(n, nan=1.0, posinf=1e6), 1, 1e6).astype(np.int64)
        # closed-form guess can be off by one near node values
        for _ in range(2):
            n = np.where(t > self.nodes(n + 1), n + 1, n)
            n = np.where((n > 1) & (t <= self.nodes(n)), n - 1, n)
        return n

    def preimage(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Backward map of the self-referential equation.

        Returns ``(n, s)`` with ``s = zeta_n^{-1}(t)`` for ``t < t_inf``.  At
        ``t_inf`` the limit of ``zeta_n^{-1}(t_n)`` is used: ``t1`` for an
        increasing tail and ``t_inf`` for a decreasing one; ``n`` is reported
        as 0 there.
        """
        t = np.asarray(t, dtype=float)
        at_inf = t >= self.t_inf
        inner = np.where(at_inf, self.t1, t)
        n = self._locate(inner)
        s = self._inverse(n, inner, self.nodes(n), self.nodes(n + 1))
        tail = self.t1 if self.orientation == INCREASING else self.t_inf
        s = np.where(at_inf, tail, s)
        n = np.where(at_inf, 0, n)
        return n, s

    def dense_points(self, depth: int, index_cap: int) -> np.ndarray:
        """Images of the nodes ``t_1..t_{m+1}, t_inf`` under compositions of
        ``zeta_1..zeta_m`` of length at most ``depth`` (``m = index_cap``)."""
        m = index_cap
        level = np.append(self.nodes(np.arange(1, m + 2)), self.t_inf)
        out = [level]
        idx = np.arange(1, m + 1)
        for _ in range(depth):
            level = self.zeta(idx[:, None], level[None, :]).ravel()
            level = np.unique(level)
            out.append(level)
        return np.unique(np.concatenate(out))
