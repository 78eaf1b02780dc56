"""Chaos-game sampling of the invariant measure of the truncated CIFS."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .cifs import GraphCloud, apply_G_cloud, concat, graph_cloud, nearest_distance
from .errors import SizeMismatch, TooLarge
from .partition import Partition
from .rb import FractalFunction, FractalSystem

GENERATOR = "numpy.random.PCG64"
MAX_ASSIGNMENT = 1024


@dataclass(frozen=True)
class ProbabilityVector:
    """Weights ``p_1..p_N`` of the truncated CIFS maps.

    Zero weights are refused unless ``allow_degenerate`` is set, which is how
    the Dirac-collapse regime (all mass on one map) is reached in tests.
    """

    weights: np.ndarray
    spec: str = "explicit"
    allow_degenerate: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or len(w) == 0:
            raise ValueError("probability vector must be a non-empty 1-d sequence")
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and non-negative")
        if not self.allow_degenerate and np.any(w == 0):
            raise ValueError("every weight must be positive (pass allow_degenerate for Dirac tests)")
        total = math.fsum(w.tolist())
        if total <= 0:
            raise ValueError("weights sum to zero")
        w = w / total
        # push the compensated rounding residue into the largest weight
        k = int(np.argmax(w))
        for _ in range(8):
            r = 1.0 - math.fsum(w.tolist())
            if r == 0.0:
                break
            # a residue below half an ulp of w[k] needs an explicit ulp step
            w[k] = w[k] + r if w[k] + r != w[k] else np.nextafter(w[k], math.copysign(math.inf, r))
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @classmethod
    def proportional(cls, partition: Partition) -> ProbabilityVector:
        """``p_i`` proportional to ``a_i`` for ``i <= N``."""
        return cls(partition.slopes(np.arange(1, partition.N + 1)), spec="proportional")

    @classmethod
    def explicit(cls, weights: Sequence[float], allow_degenerate: bool = False) -> ProbabilityVector:
        return cls(np.asarray(weights, dtype=float), spec="explicit", allow_degenerate=allow_degenerate)

    @classmethod
    def dirac(cls, N: int, index: int = 1) -> ProbabilityVector:
        w = np.zeros(N)
        w[index - 1] = 1.0
        return cls(w, spec=f"dirac:{index}", allow_degenerate=True)

    def __len__(self) -> int:
        return len(self.weights)

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Map indices (1-based) by inverse CDF over the cumulative table."""
        cdf = np.cumsum(self.weights)
        u = rng.random(n)
        idx = np.searchsorted(cdf, u, side="right")
        # u can exceed cdf[-1] by rounding; the last positive weight takes it
        return np.minimum(idx, np.flatnonzero(self.weights)[-1]) + 1


@dataclass(frozen=True)
class EmpiricalMeasure:
    atoms: GraphCloud
    seed: int
    burn_in: int
    indices: np.ndarray = field(repr=False)
    p_spec: str = "proportional"

    @property
    def n(self) -> int:
        return len(self.atoms)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.n, 1.0 / self.n)

    def metadata(self) -> dict:
        return {
            "seed": self.seed,
            "n": self.n,
            "burn_in": self.burn_in,
            "p_spec": self.p_spec,
            "generator": GENERATOR,
        }


def chaos_game(
    sys: FractalSystem,
    ff: FractalFunction,
    p: ProbabilityVector,
    n: int,
    burn_in: int = 100,
    seed: int = 0,
) -> EmpiricalMeasure:
    """Random orbit ``x_{k+1} = G_{i_k}(x_k)`` started at ``(t_1, Phi^a(t_1))``.

    ``n`` orbit points are generated (the start point included) and the first
    ``burn_in`` are dropped.  The abscissae are iterated first; the interval
    recurrence is then a scalar affine loop.
    """
    if not n > burn_in >= 0:
        raise ValueError("need n > burn_in >= 0")
    if len(p) > sys.partition.N:
        raise ValueError("probability vector is longer than the truncation N")
    rng = np.random.default_rng(seed)
    idx = p.draw(rng, n - 1)
    part = sys.partition
    slopes = part.slopes(np.arange(1, len(p) + 1))
    signs = part._signs(np.arange(1, len(p) + 1))
    starts = np.where(signs > 0, part.nodes(np.arange(1, len(p) + 1)), part.nodes(np.arange(2, len(p) + 2)))
    t1 = part.t1
    ts = np.empty(n)
    ts[0] = t1
    cur = t1
    for k, j in enumerate(idx.tolist(), start=1):
        cur = starts[j - 1] + signs[j - 1] * slopes[j - 1] * (cur - t1)
        ts[k] = cur
    p_lo, p_hi = sys.phi.hull_at(ts[1:])
    b_lo, b_hi = sys.base.hull_at(ts[:-1])
    a = sys.alpha
    # S_{k+1} = a S_k + Phi(t_{k+1}) - a B(t_k)
    if a >= 0:
        add_lo, add_hi = p_lo - a * b_hi, p_hi - a * b_lo
    else:
        add_lo, add_hi = p_lo - a * b_lo, p_hi - a * b_hi
    start = ff.hull_at(np.array([t1]))
    lo = np.empty(n)
    hi = np.empty(n)
    lo[0], hi[0] = float(start[0][0]), float(start[1][0])
    cl, ch = lo[0], hi[0]
    for k in range(n - 1):
        if a >= 0:
            cl, ch = a * cl + add_lo[k], a * ch + add_hi[k]
        else:
            cl, ch = a * ch + add_lo[k], a * cl + add_hi[k]
        lo[k + 1], hi[k + 1] = cl, ch
    keep = slice(burn_in, n)
    # atoms lie on the graph, so each is its own anchor
    atoms = GraphCloud(ts[keep], lo[keep], hi[keep], lo[keep], hi[keep])
    return EmpiricalMeasure(atoms=atoms, seed=seed, burn_in=burn_in, indices=idx, p_spec=p.spec)


def support_check(m: EmpiricalMeasure, ff: FractalFunction, eps: float, cloud_size: int = 4096) -> float:
    """Fraction of atoms within ``eps`` (graph metric) of the sampled graph.

    The graph is sampled as in :func:`graph_cloud` and, in addition, at
    the atoms' own abscissae, where the fractal function is evaluated
    independently of the orbit.
    """
    ref = concat([graph_cloud(ff, cloud_size), GraphCloud.on_graph(ff, m.atoms.t)])
    d = nearest_distance(m.atoms, ref)
    return float(np.mean(d <= eps))


def _cost_matrix(a: GraphCloud, b: GraphCloud, metric: str, ff: Optional[FractalFunction]) -> np.ndarray:
    dt = np.abs(a.t[:, None] - b.t[None, :])
    if metric == "graph":
        h = np.maximum(np.abs(a.lo[:, None] - b.lo[None, :]), np.abs(a.hi[:, None] - b.hi[None, :]))
        return dt + h
    if metric == "D":
        if ff is None and not (a.anchored and b.anchored):
            raise ValueError("the D metric needs the fractal function or anchored clouds")
        fa = (a.anchor_lo, a.anchor_hi) if a.anchored else ff.hull_at(a.t)
        fb = (b.anchor_lo, b.anchor_hi) if b.anchored else ff.hull_at(b.t)
        x_lo = a.lo[:, None] + fb[0][None, :]
        x_hi = a.hi[:, None] + fb[1][None, :]
        y_lo = b.lo[None, :] + fa[0][:, None]
        y_hi = b.hi[None, :] + fa[1][:, None]
        return dt + np.maximum(np.abs(x_lo - y_lo), np.abs(x_hi - y_hi))
    raise ValueError(f"unknown ground metric {metric!r}")


def mk_distance(
    m1: EmpiricalMeasure | GraphCloud,
    m2: EmpiricalMeasure | GraphCloud,
    metric: str = "graph",
    ff: Optional[FractalFunction] = None,
) -> float:
    """Optimal transport cost between two uniform measures with equal atom counts."""
    a = m1.atoms if isinstance(m1, EmpiricalMeasure) else m1
    b = m2.atoms if isinstance(m2, EmpiricalMeasure) else m2
    if len(a) != len(b):
        raise SizeMismatch(f"atom counts differ: {len(a)} vs {len(b)}")
    if len(a) > MAX_ASSIGNMENT:
        raise TooLarge(f"exact assignment limited to {MAX_ASSIGNMENT} atoms, got {len(a)}")
    cost = _cost_matrix(a, b, metric, ff)
    rows, cols = linear_sum_assignment(cost)
    return float(math.fsum(cost[rows, cols].tolist()) / len(a))


def pushforward_sample(
    sys: FractalSystem, m: EmpiricalMeasure, p: ProbabilityVector, seed: int
) -> GraphCloud:
    """Resample atoms of ``m`` and push each through a map drawn from ``p``."""
    rng = np.random.default_rng([seed, 1])
    pick = rng.integers(0, m.n, m.n)
    maps = p.draw(rng, m.n)
    return apply_G_cloud(sys, maps, m.atoms.take(pick))


def self_similarity_defect(
    sys: FractalSystem,
    ff: FractalFunction,
    p: ProbabilityVector,
    n: int = 512,
    seed: int = 0,
    burn_in: int = 100,
    metric: str = "graph",
) -> float:
    m = chaos_game(sys, ff, p, n, burn_in, seed)
    pushed = pushforward_sample(sys, m, p, seed)
    return mk_distance(m.atoms, pushed, metric, ff)


def two_seed_baseline(
    sys: FractalSystem,
    ff: FractalFunction,
    p: ProbabilityVector,
    n: int = 512,
    seeds: tuple[int, int] = (0, 1),
    burn_in: int = 100,
    metric: str = "graph",
) -> float:
    m1 = chaos_game(sys, ff, p, n, burn_in, seeds[0])
    m2 = chaos_game(sys, ff, p, n, burn_in, seeds[1])
    return mk_distance(m1, m2, metric, ff)
