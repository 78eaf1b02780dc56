"""Grid-sampled set-valued maps ``I -> K(R)``.

Values are stored as padded endpoint arrays of shape ``(G, P)``: row ``g``
holds the ``counts[g]`` canonical parts of the value at ``grid[g]``, and the
remaining columns repeat the last part (a repeated interval does not change a
union).  Convex-valued functions have ``P == 1`` and every operation on them
is vectorised; general compact values go through :class:`CompactSet`.
"""

from __future__ import annotations

import csv
import io
from typing import Callable, Sequence, Union

import numpy as np

from . import expr as _expr
from .errors import (
    DomainMismatch,
    EndpointHypothesisViolated,
    EnvelopeCrossing,
    OutOfDomain,
)
from .intervals import (
    CONTAINMENT_EPS,
    CompactSet,
    hausdorff_distance,
    interval_hausdorff,
    subset_leq,
)
from .partition import Partition

DEFAULT_GRID_SIZE = 4097
ENDPOINT_TOL = 1e-9

Envelope = Union[str, _expr.Expr, Callable, float]


def system_grid(partition: Partition, grid_size: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    """Uniform grid on ``I`` merged with the retained partition nodes."""
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    nodes = partition.retained_nodes()
    uniform = np.linspace(partition.t1, partition.t_inf, grid_size)
    tol = 1e-14 * partition.length
    # drop uniform points that duplicate a node up to rounding
    idx = np.searchsorted(nodes, uniform)
    near = np.zeros(uniform.shape, dtype=bool)
    for j in (idx - 1, idx):
        ok = (j >= 0) & (j < len(nodes))
        near[ok] |= np.abs(uniform[ok] - nodes[j[ok]]) <= tol
    return np.union1d(nodes, uniform[~near])


def _as_callable(env: Envelope) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(env, str):
        env = _expr.parse(env)
    if isinstance(env, _expr.Expr):
        e = env
        return lambda t: _expr.evaluate(e, t)
    if callable(env):
        return lambda t: np.broadcast_to(np.asarray(env(t), dtype=float), np.shape(t)).astype(float)
    value = float(env)
    return lambda t: np.full(np.shape(t), value)


def _pad(sets: Sequence[CompactSet]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    counts = np.array([len(s) for s in sets], dtype=np.int64)
    width = int(counts.max())
    lower = np.empty((len(sets), width))
    upper = np.empty((len(sets), width))
    for g, s in enumerate(sets):
        lo, hi = s.arrays()
        lower[g, : len(lo)] = lo
        upper[g, : len(hi)] = hi
        lower[g, len(lo):] = lo[-1]
        upper[g, len(hi):] = hi[-1]
    return lower, upper, counts


def scale_arrays(k, lo, hi) -> tuple[np.ndarray, np.ndarray]:
    """Scale intervals ``[lo, hi]`` by per-row scalars ``k`` (any sign)."""
    k = np.asarray(k, dtype=float)
    a, b = k * lo, k * hi
    return np.minimum(a, b), np.maximum(a, b)


class SetFunction:
    """Set-valued map sampled on a strictly increasing grid.

    Between grid points values are interpolated part by part when the two
    neighbouring values have the same number of parts, and through their
    convex hulls otherwise.
    """

    def __init__(self, grid, lower, upper, counts=None):
        grid = np.asarray(grid, dtype=float)
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if lower.ndim == 1:
            lower = lower[:, None]
            upper = upper[:, None]
        if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing with at least two points")
        if lower.shape != upper.shape or lower.shape[0] != len(grid):
            raise ValueError("value arrays do not match the grid")
        if np.any(lower > upper):
            g = int(np.argwhere(lower > upper)[0, 0])
            raise EnvelopeCrossing(float(grid[g]))
        if counts is None:
            counts = np.full(len(grid), lower.shape[1], dtype=np.int64)
        self.grid = grid
        self.lower = lower
        self.upper = upper
        self.counts = np.asarray(counts, dtype=np.int64)
        for arr in (self.grid, self.lower, self.upper, self.counts):
            arr.flags.writeable = False

    # -- constructors --------------------------------------------------------

    @classmethod
    def from_arrays(cls, grid, lo, hi) -> SetFunction:
        return cls(grid, np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))

    @classmethod
    def from_sets(cls, grid, sets: Sequence[CompactSet]) -> SetFunction:
        lower, upper, counts = _pad(sets)
        return cls(grid, lower, upper, counts)

    @classmethod
    def from_envelopes(
        cls,
        lower: Envelope,
        upper: Envelope,
        partition: Partition,
        grid_size: int = DEFAULT_GRID_SIZE,
    ) -> SetFunction:
        """Convex-valued map ``t -> [lower(t), upper(t)]`` on the system grid."""
        grid = system_grid(partition, grid_size)
        lo = _as_callable(lower)(grid)
        hi = _as_callable(upper)(grid)
        bad = np.flatnonzero(lo > hi)
        if len(bad):
            raise EnvelopeCrossing(float(grid[bad[0]]))
        return cls.from_arrays(grid, lo, hi)

    @classmethod
    def constant(cls, value: CompactSet | float, grid) -> SetFunction:
        value = value if isinstance(value, CompactSet) else CompactSet.point(float(value))
        return cls.from_sets(grid, [value] * len(grid))

    # -- structure -----------------------------------------------------------

    @property
    def t1(self) -> float:
        return float(self.grid[0])

    @property
    def t_inf(self) -> float:
        return float(self.grid[-1])

    @property
    def is_convex(self) -> bool:
        return self.lower.shape[1] == 1

    @property
    def lo(self) -> np.ndarray:
        """Lower endpoint of each value (of its hull for non-convex values)."""
        return self.lower.min(axis=1)

    @property
    def hi(self) -> np.ndarray:
        return self.upper.max(axis=1)

    def value_at(self, g: int) -> CompactSet:
        c = int(self.counts[g])
        return CompactSet(zip(self.lower[g, :c], self.upper[g, :c]))

    def values(self) -> list[CompactSet]:
        return [self.value_at(g) for g in range(len(self.grid))]

    def same_grid(self, other: SetFunction) -> bool:
        return self.grid.shape == other.grid.shape and np.array_equal(self.grid, other.grid)

    def modulus(self) -> float:
        """Largest Hausdorff jump between adjacent grid values."""
        if self.is_convex:
            return float(np.max(interval_hausdorff(self.lo[:-1], self.hi[:-1], self.lo[1:], self.hi[1:])))
        vals = self.values()
        return max(hausdorff_distance(a, b) for a, b in zip(vals[:-1], vals[1:]))

    # -- evaluation ----------------------------------------------------------

    def _check(self, t: np.ndarray):
        slack = 1e-12 * (self.t_inf - self.t1)
        if np.any(t < self.t1 - slack) or np.any(t > self.t_inf + slack):
            raise OutOfDomain(f"evaluation outside [{self.t1}, {self.t_inf}]")

    def hull_at(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Vectorised interpolated hull endpoints; exact values for convex maps."""
        t = np.asarray(t, dtype=float)
        self._check(t)
        return np.interp(t, self.grid, self.lo), np.interp(t, self.grid, self.hi)

    def evaluate(self, t: float) -> CompactSet:
        t = float(t)
        self._check(np.asarray(t))
        if self.is_convex:
            lo, hi = self.hull_at(t)
            return CompactSet.interval(float(lo), float(hi))
        g = int(np.clip(np.searchsorted(self.grid, t, side="right") - 1, 0, len(self.grid) - 2))
        w = (t - self.grid[g]) / (self.grid[g + 1] - self.grid[g])
        if w <= 0.0:
            return self.value_at(g)
        if w >= 1.0:
            return self.value_at(g + 1)
        if self.counts[g] == self.counts[g + 1]:
            c = int(self.counts[g])
            lo = (1 - w) * self.lower[g, :c] + w * self.lower[g + 1, :c]
            hi = (1 - w) * self.upper[g, :c] + w * self.upper[g + 1, :c]
            return CompactSet(zip(lo, hi))
        lo = (1 - w) * self.lower[g].min() + w * self.lower[g + 1].min()
        hi = (1 - w) * self.upper[g].max() + w * self.upper[g + 1].max()
        return CompactSet.interval(lo, hi)

    def __call__(self, t: float) -> CompactSet:
        return self.evaluate(t)

    # -- pointwise arithmetic -------------------------------------------------

    def shift(self, c: float) -> SetFunction:
        """Minkowski sum with the singleton ``{c}`` at every point."""
        return SetFunction(self.grid, self.lower + c, self.upper + c, self.counts)

    def widen(self, delta) -> SetFunction:
        """Convex map ``[lo - delta, hi + delta]``; ``delta`` may vary along the grid."""
        delta = np.broadcast_to(np.asarray(delta, dtype=float), self.grid.shape)
        return SetFunction.from_arrays(self.grid, self.lo - delta, self.hi + delta)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if self.is_convex:
            w.writerow(["t", "lower", "upper"])
            for t, lo, hi in zip(self.grid, self.lower[:, 0], self.upper[:, 0]):
                w.writerow([repr(float(t)), repr(float(lo)), repr(float(hi))])
        else:
            w.writerow(["t", "part_index", "lower", "upper"])
            for g, t in enumerate(self.grid):
                for p in range(int(self.counts[g])):
                    w.writerow([repr(float(t)), p, repr(float(self.lower[g, p])), repr(float(self.upper[g, p]))])
        return buf.getvalue()

    def __repr__(self) -> str:
        kind = "convex" if self.is_convex else f"{self.lower.shape[1]}-part"
        return f"SetFunction({kind}, {len(self.grid)} points on [{self.t1}, {self.t_inf}])"


def sup_metric(f: SetFunction, g: SetFunction) -> float:
    """``sup_t H_d(f(t), g(t))`` over the union of both grids."""
    if not (np.isclose(f.t1, g.t1, rtol=0, atol=1e-12) and np.isclose(f.t_inf, g.t_inf, rtol=0, atol=1e-12)):
        raise DomainMismatch(f"domains differ: [{f.t1},{f.t_inf}] vs [{g.t1},{g.t_inf}]")
    if f.same_grid(g) and f.is_convex and g.is_convex:
        return float(np.max(interval_hausdorff(f.lower[:, 0], f.upper[:, 0], g.lower[:, 0], g.upper[:, 0])))
    pts = np.union1d(f.grid, g.grid)
    pts = np.clip(pts, max(f.t1, g.t1), min(f.t_inf, g.t_inf))
    if f.is_convex and g.is_convex:
        flo, fhi = f.hull_at(pts)
        glo, ghi = g.hull_at(pts)
        return float(np.max(interval_hausdorff(flo, fhi, glo, ghi)))
    return max(hausdorff_distance(f.evaluate(t), g.evaluate(t)) for t in pts)


def leq(f, g, points, eps: float = CONTAINMENT_EPS) -> bool:
    """``f(t)`` contained in ``g(t)`` at every supplied point.

    ``f`` and ``g`` only need an ``evaluate(t) -> CompactSet`` method, so
    fractal functions can be compared directly.
    """
    return all(subset_leq(f.evaluate(t), g.evaluate(t), eps) for t in np.asarray(points, dtype=float))


def norm_inf(f: SetFunction) -> float:
    """``sup_t H_d(f(t), {0})``."""
    return float(max(np.max(np.abs(f.lower)), np.max(np.abs(f.upper))))


def endpoint_defect(phi: SetFunction, base: SetFunction) -> float:
    """Hausdorff distance between ``B(t1) - Phi(t1)`` and ``B(t_inf) - Phi(t_inf)``."""
    first = base.value_at(0) - phi.value_at(0)
    last = base.value_at(-1) - phi.value_at(-1)
    return hausdorff_distance(first, last)


def base_function(phi: SetFunction, h: Envelope, partition: Partition | None = None) -> SetFunction:
    """``B(t) = h(t)Phi(t) + (t-t1)(Phi(t_inf)-Phi(t1)) + (t_inf-t)(Phi(t1)-Phi(t))``.

    Requires ``h(t1) = h(t_inf) = 1``.  The result is checked against the
    endpoint condition ``B(t1)-Phi(t1) = B(t_inf)-Phi(t_inf)``; with
    element-wise set differences this holds only for special ``Phi`` (for
    example single-valued and equal at both ends), so violations raise
    :class:`EndpointHypothesisViolated`.
    """
    t = phi.grid
    t1, tinf = phi.t1, phi.t_inf
    if partition is not None and not (np.isclose(partition.t1, t1) and np.isclose(partition.t_inf, tinf)):
        raise DomainMismatch("partition interval differs from the function domain")
    hv = _as_callable(h)(t)
    if abs(hv[0] - 1.0) > 1e-12 or abs(hv[-1] - 1.0) > 1e-12:
        raise EndpointHypothesisViolated(f"h must equal 1 at both endpoints, got {hv[0]!r}, {hv[-1]!r}")

    if phi.is_convex:
        lo, hi = phi.lower[:, 0], phi.upper[:, 0]
        a_lo, a_hi = scale_arrays(hv, lo, hi)
        # Phi(t_inf) - Phi(t1), a fixed interval, times (t - t1) >= 0
        d_lo, d_hi = lo[-1] - hi[0], hi[-1] - lo[0]
        b_lo, b_hi = (t - t1) * d_lo, (t - t1) * d_hi
        # Phi(t1) - Phi(t), times (t_inf - t) >= 0
        c_lo, c_hi = (tinf - t) * (lo[0] - hi), (tinf - t) * (hi[0] - lo)
        base = SetFunction.from_arrays(t, a_lo + b_lo + c_lo, a_hi + b_hi + c_hi)
    else:
        vals = phi.values()
        first, last = vals[0], vals[-1]
        drift = last - first
        out = []
        for tk, hk, v in zip(t, hv, vals):
            out.append(float(hk) * v + float(tk - t1) * drift + float(tinf - tk) * (first - v))
        base = SetFunction.from_sets(t, out)

    defect = endpoint_defect(phi, base)
    if defect > ENDPOINT_TOL:
        raise EndpointHypothesisViolated(
            f"B(t1)-Phi(t1) and B(t_inf)-Phi(t_inf) differ by {defect:.3g} in Hausdorff distance"
        )
    return base


def random_convex(grid, rng: np.random.Generator, scale: float = 1.0, modes: int = 6) -> SetFunction:
    """Random smooth convex-valued map on ``grid`` (a few random Fourier modes)."""
    grid = np.asarray(grid, dtype=float)
    x = (grid - grid[0]) / (grid[-1] - grid[0])
    k = np.arange(1, modes + 1)
    phase = rng.uniform(0, 2 * np.pi, (2, modes))
    amp = scale * rng.normal(size=(2, modes)) / k
    centre = scale * rng.normal() + np.sin(np.pi * np.outer(x, k) + phase[0]) @ amp[0]
    width = np.abs(np.sin(np.pi * np.outer(x, k) + phase[1]) @ amp[1]) + scale * rng.uniform(0, 0.5)
    return SetFunction.from_arrays(grid, centre - width, centre + width)
