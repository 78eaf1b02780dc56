"""How far the fractal perturbation moves from its seed, and whether it keeps order."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import HypothesisViolated
from .intervals import subset_leq
from .partition import Partition
from .rb import DEFAULT_TOL, FractalFunction, FractalSystem, fixed_point
from .setfunc import Envelope, SetFunction, base_function, leq, norm_inf, sup_metric

BOUND_SLACK = 1e-9
ORDER_SLACK = 1e-6


@dataclass(frozen=True)
class ErrorReport:
    measured: float
    bound: float
    alpha: float
    phi_minus_b: float
    phi_norm: float

    @property
    def passed(self) -> bool:
        return self.measured <= self.bound + BOUND_SLACK

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = self.passed
        return d


def error_bound(sys: FractalSystem) -> float:
    """``|a|/(1-|a|) * d(Phi, B) + 2|a|/(1-|a|) * ||Phi||``."""
    a = abs(sys.alpha)
    k = a / (1 - a)
    return k * sup_metric(sys.phi, sys.base) + 2 * k * norm_inf(sys.phi)


def check_error(sys: FractalSystem, ff: Optional[FractalFunction] = None, tol: float = DEFAULT_TOL) -> ErrorReport:
    if ff is None:
        ff = fixed_point(sys, tol)
    return ErrorReport(
        measured=sup_metric(ff.result, sys.phi),
        bound=error_bound(sys),
        alpha=sys.alpha,
        phi_minus_b=sup_metric(sys.phi, sys.base),
        phi_norm=norm_inf(sys.phi),
    )


@dataclass(frozen=True)
class OrderReport:
    holds: bool
    points_checked: int
    worst_excess: float


def _excess(f_lo, f_hi, g_lo, g_hi) -> np.ndarray:
    # how far [f_lo, f_hi] sticks out of [g_lo, g_hi]
    return np.maximum(g_lo - f_lo, f_hi - g_hi)


def _single_valued_ends(f: SetFunction) -> bool:
    return f.value_at(0).is_point and f.value_at(-1).is_point


def check_order_preservation(
    phi: SetFunction,
    u: SetFunction,
    alpha: float,
    partition: Partition,
    depth: int = 3,
    index_cap: int = 8,
    h: Envelope = "1",
    base_phi: Optional[SetFunction] = None,
    base_u: Optional[SetFunction] = None,
    slack: float = ORDER_SLACK,
    tol: float = DEFAULT_TOL,
) -> OrderReport:
    """Build both fractal functions and test ``Phi^a(t) <= U^a(t)`` on the orbit set.

    The hypotheses (``Phi <= U``, single-valued endpoints, bases that agree
    with their seeds at both ends and are themselves ordered) are checked
    first; a failure raises :class:`HypothesisViolated` instead of returning
    a verdict.
    """
    pts = partition.dense_points(depth, index_cap)
    if not (_single_valued_ends(phi) and _single_valued_ends(u)):
        raise HypothesisViolated("single-valued endpoint values")
    if not leq(phi, u, pts, slack):
        raise HypothesisViolated("Phi <= U")
    if base_phi is None:
        base_phi = base_function(phi, h, partition)
    if base_u is None:
        base_u = base_function(u, h, partition)
    for name, f, b in (("B_Phi", phi, base_phi), ("B_U", u, base_u)):
        for g in (0, -1):
            if not (subset_leq(b.value_at(g), f.value_at(g), slack) and subset_leq(f.value_at(g), b.value_at(g), slack)):
                raise HypothesisViolated(f"{name} matches its seed at the endpoints")
    if not leq(base_phi, base_u, pts, slack):
        raise HypothesisViolated("B_Phi <= B_U")

    ff_phi = fixed_point(FractalSystem(phi, base_phi, alpha, partition), tol)
    ff_u = fixed_point(FractalSystem(u, base_u, alpha, partition), tol)
    if ff_phi.system.is_convex and ff_u.system.is_convex:
        excess = _excess(*ff_phi.hull_at(pts), *ff_u.hull_at(pts))
        worst = float(np.max(excess))
        return OrderReport(holds=worst <= slack, points_checked=len(pts), worst_excess=worst)
    ok = leq(ff_phi, ff_u, pts, slack)
    return OrderReport(holds=ok, points_checked=len(pts), worst_excess=float("nan"))
