"""``svfractal build|verify|chaos|dims|render --config <path> --out <dir>``.

Exit codes: 0 success, 1 a verification check failed, 2 configuration or
input-hypothesis error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .cifs import GraphCloud, graph_cloud, thread_count
from .config import Config, load_config
from .dimension import box_count_estimate, dimension_report
from .errors import (
    ConfigError,
    DomainMismatch,
    EndpointHypothesisViolated,
    EnvelopeCrossing,
    ExprError,
    GridMisaligned,
    HypothesisViolated,
    SVFractalError,
)
from .measure import chaos_game, self_similarity_defect, support_check, two_seed_baseline
from .rb import FractalFunction, fixed_point
from .verify import run_verification

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_CONFIG_ERRORS = (
    ConfigError,
    ExprError,
    EnvelopeCrossing,
    EndpointHypothesisViolated,
    HypothesisViolated,
    DomainMismatch,
    GridMisaligned,
)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n")


def _json_float(x: float):
    return "inf" if math.isinf(x) else x


def _build(cfg: Config) -> FractalFunction:
    return fixed_point(cfg.system(), cfg["tolerance"])


def cmd_build(cfg: Config, out: Path) -> int:
    ff = _build(cfg)
    sys_ = ff.system
    (out / "phi_alpha.csv").write_text(ff.result.to_csv())
    (out / "phi.csv").write_text(sys_.phi.to_csv())
    (out / "base.csv").write_text(sys_.base.to_csv())
    meta = {
        "alpha": sys_.alpha,
        "N": sys_.partition.N,
        "family": sys_.partition.family,
        "grid_size": int(cfg["grid_size"]),
        "grid_points": int(len(sys_.grid)),
        "iterations": ff.iterations,
        "residual": ff.residual,
        "tolerance": cfg["tolerance"],
        "interpolating": sys_.interpolating,
    }
    _write_json(out / "metadata.json", meta)
    return EXIT_OK if ff.residual <= cfg["tolerance"] else EXIT_NUMERICAL


def cmd_verify(cfg: Config, out: Path) -> int:
    try:
        report = run_verification(cfg)
    except (EndpointHypothesisViolated, HypothesisViolated) as e:
        _write_json(out / "verification.json", {"all_pass": False, "error": type(e).__name__, "message": str(e)})
        raise
    _write_json(out / "verification.json", report)
    for name, c in report["checks"].items():
        print(f"{c['status'].upper():4s} {name}")
    return EXIT_OK if report["all_pass"] else EXIT_CHECK_FAILED


def cmd_chaos(cfg: Config, out: Path) -> int:
    ff = _build(cfg)
    sys_ = ff.system
    m_cfg = cfg["measure"]
    p = cfg.probability(sys_.partition)
    m = chaos_game(sys_, ff, p, m_cfg["n"], m_cfg["burn_in"], m_cfg["seed"])
    (out / "atoms.csv").write_text(m.atoms.to_csv())
    meta = m.metadata()
    meta["p_spec"] = m_cfg["p"] if m_cfg["p"] == "proportional" else list(m_cfg["p"])
    _write_json(out / "measure.json", meta)
    frac = support_check(m, ff, m_cfg["eps"])
    defect = {"support_fraction": frac, "eps": m_cfg["eps"], "support_pass": frac >= 0.999}
    n = m_cfg["mk_n"]
    if n > m_cfg["burn_in"]:
        ssd = self_similarity_defect(sys_, ff, p, n, m_cfg["seed"], m_cfg["burn_in"])
        base = two_seed_baseline(sys_, ff, p, n, (m_cfg["seed"], m_cfg["seed"] + 1), m_cfg["burn_in"])
        defect.update(self_similarity_defect=ssd, baseline=base, self_similarity_pass=ssd <= 2 * base)
    _write_json(out / "defect.json", defect)
    return EXIT_OK


def cmd_dims(cfg: Config, out: Path) -> int:
    d = cfg["dimension"]
    p = cfg.partition()
    if cfg.alpha == 0:
        raise ConfigError("dimension bounds need alpha != 0 (the lower ratios min(|alpha|, a_i) vanish)")
    report = dimension_report(cfg.alpha, p, d["k_max"], d["stall_tol"])
    ff = _build(cfg)
    report.box_estimate = box_count_estimate(graph_cloud(ff, d["cloud_size"]), d["scales"])
    _write_json(out / "dimension.json", report.to_dict())
    return EXIT_OK


def _svg(ff: FractalFunction, atoms: GraphCloud | None, width: int = 800, height: int = 600) -> str:
    g = ff.result
    t = g.grid
    lo, hi = g.lo, g.hi
    ys = [lo.min(), hi.max()]
    if atoms is not None:
        ys += [atoms.lo.min(), atoms.hi.max()]
    y0, y1 = min(ys), max(ys)
    if y1 == y0:
        y1 = y0 + 1.0
    m = 40

    def X(v):
        return m + (np.asarray(v) - t[0]) / (t[-1] - t[0]) * (width - 2 * m)

    def Y(v):
        return height - m - (np.asarray(v) - y0) / (y1 - y0) * (height - 2 * m)

    def path(xs, ys_):
        return " ".join(f"{x:.3f},{y:.3f}" for x, y in zip(xs, ys_))

    band = path(np.concatenate([X(t), X(t[::-1])]), np.concatenate([Y(hi), Y(lo[::-1])]))
    plo, phi = ff.system.phi.lo, ff.system.phi.hi
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        '<rect x="0" y="0" width="100%" height="100%" fill="white"/>',
        f'<polygon id="band" points="{band}" fill="#9ecae1" fill-opacity="0.6" stroke="#3182bd" stroke-width="0.5"/>',
        f'<polyline id="phi-lower" points="{path(X(t), Y(plo))}" fill="none" stroke="#636363" stroke-width="1"/>',
        f'<polyline id="phi-upper" points="{path(X(t), Y(phi))}" fill="none" stroke="#636363" stroke-width="1"/>',
    ]
    if atoms is not None:
        parts.append('<g id="atoms" stroke="#e6550d" stroke-opacity="0.5" stroke-width="0.6">')
        for x, a, b in zip(X(atoms.t), Y(atoms.lo), Y(atoms.hi)):
            parts.append(f'<line x1="{x:.3f}" y1="{a:.3f}" x2="{x:.3f}" y2="{b:.3f}"/>')
        parts.append("</g>")
    parts.append(
        f'<text x="{m}" y="{m - 12}" font-family="sans-serif" font-size="14">'
        f"alpha = {ff.alpha!r}, N = {ff.system.partition.N}</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_render(cfg: Config, out: Path, max_atoms: int = 2000) -> int:
    ff = _build(cfg)
    m_cfg = cfg["measure"]
    n = min(m_cfg["n"], m_cfg["burn_in"] + max_atoms)
    m = chaos_game(ff.system, ff, cfg.probability(ff.system.partition), n, m_cfg["burn_in"], m_cfg["seed"])
    (out / "graph.svg").write_text(_svg(ff, m.atoms))
    return EXIT_OK


COMMANDS = {
    "build": cmd_build,
    "verify": cmd_verify,
    "chaos": cmd_chaos,
    "dims": cmd_dims,
    "render": cmd_render,
}


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="svfractal", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON configuration file (defaults apply to omitted keys)")
    ap.add_argument("--out", default=".", help="output directory (created if missing)")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        thread_count()
        cfg = load_config(args.config) if args.config else load_config({})
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out)
    except _CONFIG_ERRORS as e:
        print(f"svfractal: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (SVFractalError, ArithmeticError, ValueError) as e:
        print(f"svfractal: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as e:
        print(f"svfractal: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
