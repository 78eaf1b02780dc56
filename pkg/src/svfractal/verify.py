"""Named invariant checks run by ``svfractal verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .approximation import check_error, check_order_preservation
from .cifs import attractor_defect, verify_contraction
from .config import Config
from .dimension import RatioSequence, s_star
from .errors import EndpointHypothesisViolated, HypothesisViolated
from .intervals import hausdorff_distance
from .measure import chaos_game, self_similarity_defect, support_check, two_seed_baseline
from .rb import FractalFunction, FractalSystem, apply_rb, fixed_point
from .setfunc import random_convex, sup_metric


@dataclass
class Check:
    name: str
    passed: Optional[bool]  # None means skipped
    value: float | None = None
    threshold: float | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        status = "skip" if self.passed is None else ("pass" if self.passed else "fail")
        out = {"status": status, "pass": self.passed}
        if self.value is not None:
            out["value"] = self.value
        if self.threshold is not None:
            out["threshold"] = self.threshold
        if self.detail:
            out["detail"] = self.detail
        return out


def _rb_contraction(sys: FractalSystem, pairs: int, seed: int) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(pairs):
        u, v = random_convex(sys.grid, rng), random_convex(sys.grid, rng)
        d = sup_metric(u, v)
        worst = max(worst, sup_metric(apply_rb(sys, u), apply_rb(sys, v)) - abs(sys.alpha) * d)
    return Check("rb_contraction", worst <= 1e-9, worst, 1e-9, "max of d(phiU,phiV) - |alpha| d(U,V)")


def _endpoint_class(sys: FractalSystem, ff: FractalFunction) -> Check:
    f1, finf = ff.evaluate(sys.partition.t1), ff.evaluate(sys.partition.t_inf)
    gap = hausdorff_distance(f1 - sys.base.value_at(0), finf - sys.base.value_at(-1))
    return Check("endpoint_class", gap <= 1e-7, gap, 1e-7)


def _interpolation(sys: FractalSystem, ff: FractalFunction) -> Check:
    if not sys.interpolating:
        return Check("interpolation", None, detail="system is not in interpolating mode")
    nodes = sys.partition.retained_nodes()
    lo, hi = ff.hull_at(nodes)
    plo, phi = sys.phi.hull_at(nodes)
    worst = float(np.max(np.maximum(np.abs(lo - plo), np.abs(hi - phi))))
    return Check("interpolation", worst <= 1e-7, worst, 1e-7)


def _continuity(sys: FractalSystem, ff: FractalFunction, tol: float) -> Check:
    eps = 1e-3
    moved = fixed_point(FractalSystem(sys.phi.shift(eps), sys.base, sys.alpha, sys.partition, check=False), tol)
    d = sup_metric(moved.result, ff.result)
    bound = eps / (1 - abs(sys.alpha))
    return Check("operator_continuity", d <= bound + 1e-9, d, bound, "Phi shifted by {1e-3}, base held fixed")


def _order(cfg: Config, sys: FractalSystem) -> Check:
    phi = sys.phi
    p = sys.partition
    v = cfg["verify"]
    x = (phi.grid - p.t1) / p.length
    bump = 0.2 * x * (1 - x)
    u = phi.widen(bump)
    try:
        rep = check_order_preservation(
            phi, u, sys.alpha, p, v["order_depth"], v["order_index_cap"], h=cfg["h"], tol=cfg["tolerance"]
        )
    except (HypothesisViolated, EndpointHypothesisViolated) as e:
        return Check("order_preservation", None, detail=f"hypotheses not met: {e}")
    return Check("order_preservation", rep.holds, rep.worst_excess, 1e-6, f"{rep.points_checked} points")


def _dimension(cfg: Config, sys: FractalSystem) -> Check:
    d = cfg["dimension"]
    if sys.alpha == 0:
        return Check("moran_monotone", None, detail="alpha = 0 has no lower ratio sequence")
    res = s_star(RatioSequence.from_system(sys.alpha, sys.partition, "lower"), d["k_max"], d["stall_tol"])
    ok = all(b >= a for a, b in zip(res.s_k, res.s_k[1:]))
    return Check("moran_monotone", ok, res.s_star, None, f"{len(res.s_k)} roots")


def run_verification(cfg: Config, progress: Callable[[str], None] = lambda s: None) -> dict:
    sys = cfg.system()
    tol = cfg["tolerance"]
    v, m = cfg["verify"], cfg["measure"]
    seed = int(m["seed"])
    ff = fixed_point(sys, tol)
    checks: list[Check] = []

    def add(c: Check):
        progress(c.name)
        checks.append(c)

    add(_rb_contraction(sys, v["rb_pairs"], seed))
    add(Check("fixed_point_residual", ff.residual <= 1e-8, ff.residual, 1e-8, f"{ff.iterations} iterations"))
    add(_endpoint_class(sys, ff))
    add(_interpolation(sys, ff))
    rep = check_error(sys, ff)
    add(Check("error_bound", rep.passed, rep.measured, rep.bound))
    add(_continuity(sys, ff, tol))
    add(_order(cfg, sys))
    con = verify_contraction(sys, ff, v["contraction_pairs"], seed)
    add(Check("cifs_contraction", con.holds, con.max_ratio, float(np.max(con.bounds))))
    defect = attractor_defect(sys, ff, v["cloud_size"])
    add(Check("attractor_defect", defect <= v["attractor_tol"], defect, v["attractor_tol"]))
    p = cfg.probability(sys.partition)
    meas = chaos_game(sys, ff, p, m["n"], m["burn_in"], seed)
    frac = support_check(meas, ff, m["eps"])
    add(Check("support", frac >= 0.999, frac, 0.999, f"eps={m['eps']!r}"))
    n = m["mk_n"]
    if n > m["burn_in"]:
        ssd = self_similarity_defect(sys, ff, p, n, seed, m["burn_in"])
        base = two_seed_baseline(sys, ff, p, n, (seed, seed + 1), m["burn_in"])
        add(Check("self_similarity", ssd <= 2 * base, ssd, 2 * base, "twice the two-seed baseline"))
    else:
        add(Check("self_similarity", None, detail="measure.mk_n must exceed measure.burn_in"))
    add(_dimension(cfg, sys))

    verdicts = [c.passed for c in checks if c.passed is not None]
    return {
        "checks": {c.name: c.to_dict() for c in checks},
        "all_pass": all(verdicts),
        "alpha": sys.alpha,
        "N": sys.partition.N,
        "grid_size": int(cfg["grid_size"]),
        "iterations": ff.iterations,
        "error_report": rep.to_dict(),
        "points_checked": int(len(sys.partition.dense_points(v["order_depth"], v["order_index_cap"]))),
        "attractor_defect": defect if math.isfinite(defect) else None,
    }
