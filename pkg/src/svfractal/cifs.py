"""The countable IFS ``G_j(t, S) = (zeta_j(t), alpha*S + Phi(zeta_j t) - alpha*B(t))``.

Points of ``I x K_c(R)`` are stored column-wise in a :class:`GraphCloud`.  A
cloud may carry *anchors*: the value of the fractal function at each
abscissa.  Applying ``G_j`` moves an anchor with the self-referential
equation, so the value at ``zeta_j(t)`` is known without inverting
``zeta_j`` in floating point (near ``t_inf`` that inversion loses about
``1/a_j`` relative digits).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError, IndexBeyondTruncation, IndexZero
from .intervals import Interval, interval_hausdorff
from .rb import FractalFunction, FractalSystem, _scaled
from .setfunc import system_grid

THREADS_ENV = "SVFRACTAL_THREADS"


def thread_count() -> int:
    """Worker threads for neighbour searches, capped by ``SVFRACTAL_THREADS`` (default 1)."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


@dataclass(frozen=True)
class GraphPoint:
    t: float
    s: Interval
    anchor: Optional[Interval] = None


class GraphCloud:
    """Finite set of points ``(t, [lo, hi])``."""

    def __init__(self, t, lo, hi, anchor_lo=None, anchor_hi=None):
        self.t = np.atleast_1d(np.asarray(t, dtype=float))
        self.lo = np.atleast_1d(np.asarray(lo, dtype=float))
        self.hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if len(self.t) == 0:
            raise ValueError("a graph cloud needs at least one point")
        if not (self.t.shape == self.lo.shape == self.hi.shape):
            raise ValueError("coordinate arrays differ in shape")
        if np.any(self.lo > self.hi):
            raise ValueError("interval with lo > hi in cloud")
        if (anchor_lo is None) != (anchor_hi is None):
            raise ValueError("anchors need both endpoints")
        self.anchor_lo = None if anchor_lo is None else np.atleast_1d(np.asarray(anchor_lo, dtype=float))
        self.anchor_hi = None if anchor_hi is None else np.atleast_1d(np.asarray(anchor_hi, dtype=float))

    @classmethod
    def from_points(cls, points: Sequence[GraphPoint]) -> GraphCloud:
        t = [p.t for p in points]
        lo = [p.s.lo for p in points]
        hi = [p.s.hi for p in points]
        if all(p.anchor is not None for p in points):
            return cls(t, lo, hi, [p.anchor.lo for p in points], [p.anchor.hi for p in points])
        return cls(t, lo, hi)

    @classmethod
    def on_graph(cls, ff: FractalFunction, t) -> GraphCloud:
        """Points ``(t, Phi^a(t))``, anchored at themselves."""
        lo, hi = ff.hull_at(np.asarray(t, dtype=float))
        return cls(t, lo, hi, lo, hi)

    @property
    def anchored(self) -> bool:
        return self.anchor_lo is not None

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i: int) -> GraphPoint:
        anchor = Interval(float(self.anchor_lo[i]), float(self.anchor_hi[i])) if self.anchored else None
        return GraphPoint(float(self.t[i]), Interval(float(self.lo[i]), float(self.hi[i])), anchor)

    def take(self, idx) -> GraphCloud:
        if self.anchored:
            return GraphCloud(self.t[idx], self.lo[idx], self.hi[idx], self.anchor_lo[idx], self.anchor_hi[idx])
        return GraphCloud(self.t[idx], self.lo[idx], self.hi[idx])

    def mask(self, keep: np.ndarray) -> GraphCloud:
        return self.take(np.flatnonzero(keep))

    def to_csv(self) -> str:
        rows = ["t,lower,upper"]
        rows += [f"{t!r},{lo!r},{hi!r}" for t, lo, hi in zip(self.t.tolist(), self.lo.tolist(), self.hi.tolist())]
        return "\n".join(rows) + "\n"


def concat(clouds: Iterable[GraphCloud]) -> GraphCloud:
    clouds = list(clouds)
    t = np.concatenate([c.t for c in clouds])
    lo = np.concatenate([c.lo for c in clouds])
    hi = np.concatenate([c.hi for c in clouds])
    if all(c.anchored for c in clouds):
        return GraphCloud(t, lo, hi, np.concatenate([c.anchor_lo for c in clouds]), np.concatenate([c.anchor_hi for c in clouds]))
    return GraphCloud(t, lo, hi)


def graph_metric(x: GraphPoint, y: GraphPoint) -> float:
    return abs(x.t - y.t) + max(abs(x.s.lo - y.s.lo), abs(x.s.hi - y.s.hi))


def _values_at(cloud: GraphCloud, ff: FractalFunction):
    if cloud.anchored:
        return cloud.anchor_lo, cloud.anchor_hi
    return ff.hull_at(cloud.t)


def d_metric_arrays(x: GraphCloud, y: GraphCloud, ff: FractalFunction) -> np.ndarray:
    """Element-wise ``|t-w| + H(S1 + F(w), S2 + F(t))`` for paired clouds."""
    fx_lo, fx_hi = _values_at(x, ff)
    fy_lo, fy_hi = _values_at(y, ff)
    h = interval_hausdorff(x.lo + fy_lo, x.hi + fy_hi, y.lo + fx_lo, y.hi + fx_hi)
    return np.abs(x.t - y.t) + h


def d_metric(x: GraphPoint, y: GraphPoint, ff: FractalFunction) -> float:
    return float(d_metric_arrays(GraphCloud.from_points([x]), GraphCloud.from_points([y]), ff)[0])


def _check_index(sys: FractalSystem, j: int):
    if j < 1:
        raise IndexZero("map indices start at 1")
    if j > sys.partition.N:
        raise IndexBeyondTruncation(f"map {j} is beyond the truncation N={sys.partition.N}")


def apply_G_cloud(sys: FractalSystem, j, cloud: GraphCloud) -> GraphCloud:
    """``G_j`` applied to every point; ``j`` may be an array of per-point indices."""
    j = np.asarray(j)
    for jj in np.unique(j):
        _check_index(sys, int(jj))
    a = sys.alpha
    t_new = np.asarray(sys.partition.zeta(j, cloud.t), dtype=float).reshape(cloud.t.shape)
    p_lo, p_hi = sys.phi.hull_at(t_new)
    b_lo, b_hi = sys.base.hull_at(cloud.t)
    s_lo, s_hi = _scaled(a, cloud.lo, cloud.hi)
    nb_lo, nb_hi = _scaled(-a, b_lo, b_hi)
    lo = s_lo + p_lo + nb_lo
    hi = s_hi + p_hi + nb_hi
    if not cloud.anchored:
        return GraphCloud(t_new, lo, hi)
    f_lo, f_hi = _scaled(a, cloud.anchor_lo, cloud.anchor_hi)
    return GraphCloud(t_new, lo, hi, f_lo + p_lo + nb_lo, f_hi + p_hi + nb_hi)


def apply_G(sys: FractalSystem, j: int, x: GraphPoint) -> GraphPoint:
    return apply_G_cloud(sys, j, GraphCloud.from_points([x]))[0]


@dataclass(frozen=True)
class ContractionReport:
    ratios: np.ndarray  # worst observed ratio for each map index
    bounds: np.ndarray  # max(|alpha|, a_j)
    pairs: int

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.ratios))

    @property
    def holds(self) -> bool:
        return bool(np.all(self.ratios <= self.bounds + 1e-9))


def random_cloud(ff: FractalFunction, n: int, rng: np.random.Generator, spread: float = 1.0) -> GraphCloud:
    """Random points of ``I x K_c(R)`` anchored to the fractal function."""
    p = ff.system.partition
    t = rng.uniform(p.t1, p.t_inf, n)
    f_lo, f_hi = ff.hull_at(t)
    lo = f_lo + spread * rng.normal(size=n)
    hi = np.maximum(lo, f_hi + spread * rng.normal(size=n))
    return GraphCloud(t, lo, hi, f_lo, f_hi)


def verify_contraction(
    sys: FractalSystem, ff: FractalFunction, n: int = 10_000, seed: int = 0, maps: Optional[Sequence[int]] = None
) -> ContractionReport:
    """Worst ratio ``D(G_j x, G_j y) / D(x, y)`` over ``n`` random pairs, per map."""
    rng = np.random.default_rng(seed)
    x = random_cloud(ff, n, rng)
    y = random_cloud(ff, n, rng)
    base = d_metric_arrays(x, y, ff)
    keep = base > 0
    x, y, base = x.mask(keep), y.mask(keep), base[keep]
    maps = list(range(1, sys.partition.N + 1)) if maps is None else list(maps)
    ratios, bounds = [], []
    for j in maps:
        gx, gy = apply_G_cloud(sys, j, x), apply_G_cloud(sys, j, y)
        ratios.append(float(np.max(d_metric_arrays(gx, gy, ff) / base)))
        bounds.append(max(abs(sys.alpha), sys.partition.slope(j)))
    return ContractionReport(np.array(ratios), np.array(bounds), int(keep.sum()))


def _features(c: GraphCloud) -> np.ndarray:
    return np.column_stack([c.t, c.lo, c.hi])


def nearest_distance(query: GraphCloud, ref: GraphCloud) -> np.ndarray:
    """Graph-metric distance from each query point to the nearest reference point.

    The graph metric lies between the Chebyshev distance of ``(t, lo, hi)``
    and twice it, so a k-d tree search in the max-norm gives a candidate ball
    that is guaranteed to contain the true nearest point.
    """
    qf, rf = _features(query), _features(ref)
    tree = cKDTree(rf)
    k = min(16, len(rf))
    workers = thread_count()
    cheb, idx = tree.query(qf, k=k, p=np.inf, workers=workers)
    cheb, idx = cheb.reshape(len(qf), k), idx.reshape(len(qf), k)
    c = rf[idx]
    d = np.abs(qf[:, None, 0] - c[..., 0]) + np.maximum(
        np.abs(qf[:, None, 1] - c[..., 1]), np.abs(qf[:, None, 2] - c[..., 2])
    )
    out = d.min(axis=1)
    # every unseen point has Chebyshev distance >= the k-th one, hence graph
    # distance >= it as well; only rows where that does not settle it remain
    todo = np.flatnonzero((out > cheb[:, -1]) & (k < len(rf)))
    for i, cand in zip(todo, tree.query_ball_point(qf[todo], out[todo], p=np.inf, workers=workers)):
        c = rf[cand]
        d = np.abs(qf[i, 0] - c[:, 0]) + np.maximum(np.abs(qf[i, 1] - c[:, 1]), np.abs(qf[i, 2] - c[:, 2]))
        out[i] = min(out[i], d.min())
    return out


def cloud_hausdorff(a: GraphCloud, b: GraphCloud) -> float:
    """Hausdorff distance between two finite clouds under the graph metric."""
    return float(max(nearest_distance(a, b).max(), nearest_distance(b, a).max()))


def graph_cloud(ff: FractalFunction, size: int) -> GraphCloud:
    """Graph sampled at ``size`` uniform abscissae plus the retained nodes."""
    return GraphCloud.on_graph(ff, system_grid(ff.system.partition, size))


def attractor_defect(
    sys: FractalSystem,
    ff: FractalFunction,
    cloud_size: int = 4096,
    maps: Optional[Sequence[int]] = None,
    cloud: Optional[GraphCloud] = None,
) -> float:
    """Graph-metric Hausdorff distance between the sampled graph over
    ``[t_1, t_{M+1}]`` and the union of its images under ``G_1..G_M``."""
    if cloud is None:
        cloud = graph_cloud(ff, cloud_size)
    maps = list(range(1, sys.partition.N + 1)) if maps is None else sorted(maps)
    p = sys.partition
    images = concat(apply_G_cloud(sys, j, cloud) for j in maps)
    covered = np.zeros(len(cloud), dtype=bool)
    for j in maps:
        covered |= (cloud.t >= p.node(j)) & (cloud.t <= p.node(j + 1))
    target = cloud.mask(covered)
    if len(target) == 0:
        return float(nearest_distance(images, cloud).max())
    return cloud_hausdorff(target, images)
