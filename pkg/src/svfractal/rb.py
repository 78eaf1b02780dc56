"""Read-Bajraktarevic operator, its fixed point, and the fractal operator.

For ``t`` in ``I_n`` the operator is

    (phi U)(t) = Phi(t) + alpha * (U(s) - B(s)),   s = zeta_n^{-1}(t),

with Minkowski sums and element-wise set differences.  At ``t_inf`` the
limit ``n -> oo`` is taken through ``zeta_n^{-1}(t_n)``, which is ``t1`` for
an increasing tail, giving ``Phi(t_inf) + alpha * (U(t1) - B(t1))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import EndpointHypothesisViolated, GridMisaligned, NoConvergence
from .intervals import CompactSet, hausdorff_distance, interval_hausdorff
from .partition import Partition
from .setfunc import (
    ENDPOINT_TOL,
    Envelope,
    SetFunction,
    base_function,
    endpoint_defect,
    sup_metric,
)

DEFAULT_TOL = 1e-10
MAX_UNROLL = 4000


def _scaled(alpha: float, lo, hi):
    if alpha >= 0:
        return alpha * lo, alpha * hi
    return alpha * hi, alpha * lo


@dataclass(frozen=True, eq=False)
class FractalSystem:
    """The data ``(Phi, B, alpha, partition)`` of one fractal function."""

    phi: SetFunction
    base: SetFunction
    alpha: float
    partition: Partition
    interpolating: bool = False
    check: bool = True

    def __post_init__(self):
        if not abs(self.alpha) < 1:
            raise ValueError(f"scaling factor must satisfy |alpha| < 1, got {self.alpha}")
        if not self.phi.same_grid(self.base):
            raise GridMisaligned("Phi and B must share a grid")
        p = self.partition
        if not (math.isclose(self.phi.t1, p.t1) and math.isclose(self.phi.t_inf, p.t_inf)):
            raise GridMisaligned("grid does not span the partition interval")
        if self.check:
            defect = endpoint_defect(self.phi, self.base)
            if defect > ENDPOINT_TOL:
                raise EndpointHypothesisViolated(
                    f"B(t1)-Phi(t1) and B(t_inf)-Phi(t_inf) differ by {defect:.3g}"
                )
        if self.interpolating:
            ends = [self.phi.value_at(0), self.phi.value_at(-1), self.base.value_at(0), self.base.value_at(-1)]
            if not all(v.is_point for v in ends):
                raise EndpointHypothesisViolated("interpolation needs single-valued Phi and B at t1 and t_inf")
            if ends[0] != ends[2] or ends[1] != ends[3]:
                raise EndpointHypothesisViolated("interpolation needs B = Phi at t1 and t_inf")

    @property
    def grid(self) -> np.ndarray:
        return self.phi.grid

    @property
    def is_convex(self) -> bool:
        return self.phi.is_convex and self.base.is_convex

    @cached_property
    def _grid_preimage(self) -> np.ndarray:
        return self.partition.preimage(self.grid)[1]


def _check_grid(sys: FractalSystem, u: SetFunction):
    if not u.same_grid(sys.phi):
        raise GridMisaligned("function is not sampled on the system grid")


def apply_rb(sys: FractalSystem, u: SetFunction) -> SetFunction:
    """One application of the Read-Bajraktarevic operator."""
    _check_grid(sys, u)
    s = sys._grid_preimage
    if sys.is_convex and u.is_convex:
        u_lo, u_hi = u.hull_at(s)
        b_lo, b_hi = sys.base.hull_at(s)
        d_lo, d_hi = _scaled(sys.alpha, u_lo - b_hi, u_hi - b_lo)
        return SetFunction.from_arrays(sys.grid, sys.phi.lower[:, 0] + d_lo, sys.phi.upper[:, 0] + d_hi)
    out = []
    for g, sg in enumerate(s):
        out.append(sys.phi.value_at(g) + sys.alpha * (u.evaluate(sg) - sys.base.evaluate(sg)))
    return SetFunction.from_sets(sys.grid, out)


def residual_of(sys: FractalSystem, u: SetFunction) -> float:
    """Sup over grid points ``t < t_inf`` of ``H_d(u(t), (phi u)(t))``."""
    v = apply_rb(sys, u)
    if u.is_convex and v.is_convex:
        d = interval_hausdorff(u.lower[:-1, 0], u.upper[:-1, 0], v.lower[:-1, 0], v.upper[:-1, 0])
        return float(np.max(d))
    return max(hausdorff_distance(u.value_at(g), v.value_at(g)) for g in range(len(u.grid) - 1))


@dataclass(frozen=True, eq=False)
class FractalFunction:
    """Fixed point ``Phi^alpha`` of the RB operator.

    ``result`` holds the grid iterate.  :meth:`evaluate` and :meth:`hull_at`
    evaluate the fixed point at arbitrary points by unrolling the
    self-referential equation (convex systems), so off-grid values do not
    depend on interpolating a function that need not be smooth.
    """

    result: SetFunction
    system: FractalSystem
    residual: float
    iterations: int

    @property
    def alpha(self) -> float:
        return self.system.alpha

    @cached_property
    def unroll_depth(self) -> int:
        a = abs(self.alpha)
        if a == 0:
            return 0
        return min(MAX_UNROLL, max(1, math.ceil(math.log(1e-17) / math.log(a))))

    def hull_at(self, t) -> tuple[np.ndarray, np.ndarray]:
        t = np.asarray(t, dtype=float)
        sys = self.system
        if not sys.is_convex:
            return self.result.hull_at(t)
        phi, base, p = sys.phi, sys.base, sys.partition
        lo, hi = phi.hull_at(t)
        lo, hi = lo.copy(), hi.copy()
        depth = self.unroll_depth
        s = t
        c = 1.0
        for k in range(1, depth + 1):
            s = p.preimage(s)[1]
            c *= self.alpha
            b_lo, b_hi = base.hull_at(s)
            # the innermost level falls back to the grid iterate
            top = self.result if k == depth else phi
            u_lo, u_hi = top.hull_at(s)
            d_lo, d_hi = _scaled(c, u_lo - b_hi, u_hi - b_lo)
            lo += d_lo
            hi += d_hi
        return lo, hi

    def evaluate(self, t: float) -> CompactSet:
        if not self.system.is_convex:
            return self.result.evaluate(t)
        lo, hi = self.hull_at(np.array([float(t)]))
        return CompactSet.interval(float(lo[0]), float(hi[0]))

    def __call__(self, t: float) -> CompactSet:
        return self.evaluate(t)


def fixed_point(
    sys: FractalSystem,
    tol: float = DEFAULT_TOL,
    u0: Optional[SetFunction] = None,
) -> FractalFunction:
    """Banach iteration ``U_{k+1} = phi U_k`` from ``U_0 = Phi`` (or ``u0``).

    Stops once successive iterates are within ``tol * (1 - |alpha|)``, which
    keeps the distance to the fixed point below ``tol``.  The a-priori
    iteration cap follows from the geometric decay of successive distances.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = abs(sys.alpha)
    threshold = tol * (1 - a)
    u = sys.phi if u0 is None else u0
    _check_grid(sys, u)
    first = apply_rb(sys, u)
    d0 = sup_metric(first, u)
    if d0 <= threshold:
        k_max = 1
    elif a == 0:
        k_max = 2
    else:
        k_max = max(1, math.ceil(math.log(threshold / d0) / math.log(a))) + 1
    prev, cur, k, diff = u, first, 1, d0
    while diff > threshold:
        if k >= k_max:
            raise NoConvergence(
                f"no convergence after {k} iterations (last step {diff:.3g}, target {threshold:.3g})"
            )
        prev, cur = cur, apply_rb(sys, cur)
        k += 1
        diff = sup_metric(cur, prev)
    return FractalFunction(result=cur, system=sys, residual=residual_of(sys, cur), iterations=k)


def self_residual(ff: FractalFunction) -> float:
    return residual_of(ff.system, ff.result)


@dataclass(frozen=True)
class FractalTemplate:
    """Everything but ``Phi``: the fractal operator maps ``Phi`` to ``Phi^alpha``.

    With ``base=None`` the base function is rebuilt from each ``Phi`` using
    ``h``; otherwise the given base is held fixed.
    """

    alpha: float
    partition: Partition
    base: Optional[SetFunction] = None
    h: Envelope = "1"
    tol: float = DEFAULT_TOL
    interpolating: bool = False


def fractal_operator(template: FractalTemplate, phi: SetFunction) -> FractalFunction:
    base = template.base if template.base is not None else base_function(phi, template.h, template.partition)
    sys = FractalSystem(phi, base, template.alpha, template.partition, interpolating=template.interpolating)
    return fixed_point(sys, template.tol)


def continuity_bound(input_distance: float, alpha: float) -> float:
    """Upper bound on the output distance of the fractal operator."""
    return input_distance / (1 - abs(alpha))
