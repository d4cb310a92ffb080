"""Command-line front end.

    inscribed info --curve ellipse.json
    inscribed rects --curve ellipse.json --theta 1.5707963 --format json
    inscribed verify --curve ellipse.json --out report.json

Exit codes: 0 success, 1 a verification check failed, 2 bad input,
3 embedding check failed, 4 solver consistency violation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import binormal as bn
from . import spectral as sp
from . import trace as tr
from .curve import ClosedCurve, load_curve, perturb, sample, stats
from .errors import CurveParseError, EmbeddingError, InscribedError, InvalidInputError
from .export import dumps, fmt
from .render import render_svg
from .verify import run_checks

COMMANDS = ("info", "binormals", "rects", "trace", "spectrum", "verify", "render")
DEFAULT_FORMAT = {"info": "json", "binormals": "csv", "rects": "csv", "trace": "csv",
                  "spectrum": "json", "verify": "json", "render": "svg"}
FORMATS = {"info": ("json",), "binormals": ("csv", "json"), "rects": ("csv", "json"),
           "trace": ("csv", "json"), "spectrum": ("csv", "json"), "verify": ("json",),
           "render": ("svg",)}

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_EMBED, EXIT_CONSISTENCY = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    command: str
    curve: str | None = None
    theta: float | None = None
    grid: int = 32
    theta_seeds: int = 17
    epsilon: float = 0.0
    k: int = 2
    tol_newton: float = tr.NEWTON_TOL
    tol_merge: float = tr.MERGE_RADIUS
    epsilon0: float = tr.EPS0
    seed: int = 7
    perturb: float = 0.0
    out: str | None = None
    format: str | None = None
    report: str | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise InvalidInputError(f"unknown command {self.command!r}")
        if not self.curve:
            raise InvalidInputError("--curve is required")
        for name in ("tol_newton", "tol_merge", "epsilon0"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"{name} must be positive")
        if self.grid < 16:
            raise InvalidInputError("--grid must be at least 16")
        if self.theta_seeds < 1:
            raise InvalidInputError("--theta-seeds must be at least 1")
        if self.k < 1:
            raise InvalidInputError("--k must be at least 1")
        if self.epsilon < 0 or self.perturb < 0:
            raise InvalidInputError("--epsilon and --perturb must be non-negative")
        if self.theta is not None and not 0 < self.theta < math.pi:
            raise InvalidInputError(f"theta={self.theta} outside (0, pi)")
        if self.command == "rects" and self.theta is None:
            raise InvalidInputError("rects needs --theta")
        fmt_ = self.format or DEFAULT_FORMAT[self.command]
        if fmt_ not in FORMATS[self.command]:
            raise InvalidInputError(f"format {fmt_!r} not available for {self.command}")
        self.format = fmt_


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="inscribed",
                                description="Inscribed rectangles and angle spectra of "
                                            "smooth Jordan curves.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file with default settings; flags override it")
    p.add_argument("--curve", help="curve description (JSON)")
    p.add_argument("--theta", type=float, help="rectangle angle in (0, pi)")
    p.add_argument("--grid", type=int, help="seed grid size for rectangle search (>= 16)")
    p.add_argument("--theta-seeds", type=int, help="number of equispaced seed angles")
    p.add_argument("--epsilon", type=float, help="H threshold for the epsilon-spectrum")
    p.add_argument("--k", type=int, help="k for the scholium bound on (0, pi/k]")
    p.add_argument("--tol-newton", type=float, help="Newton residual tolerance")
    p.add_argument("--tol-merge", type=float, help="merge radius for dedup and loop closure")
    p.add_argument("--epsilon0", type=float, help="continuation cutoff near theta = 0, pi")
    p.add_argument("--seed", type=int, help="seed for --perturb and random checks")
    p.add_argument("--perturb", type=float, help="perturb the curve by this magnitude first")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--report", help="where to write the consistency report on exit 4")
    p.add_argument("--format", choices=("csv", "json", "svg"))
    return p


def config_from_args(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        try:
            values = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise CurveParseError(f"cannot read config {args.config}: {exc}") from exc
        known = {f.name for f in fields(RunConfig)}
        values = {k.replace("-", "_"): v for k, v in values.items()}
        unknown = set(values) - known
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
    for key, val in vars(args).items():
        if key != "config" and val is not None:
            values[key] = val
    values["command"] = args.command
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# -- commands ----------------------------------------------------------------

def _info(curve: ClosedCurve, cfg: RunConfig):
    st = stats(curve)
    speed = np.abs(sample(curve, 2048, 1))
    return {"kind": curve.kind, "degree": curve.degree, "orientation": curve.orientation,
            "area": st.area, "radius": st.radius, "ratio": st.ratio,
            "orientation_sign": st.orientation_sign,
            "diameter_params": list(st.diameter_params),
            "min_speed": float(speed.min()), "max_speed": float(speed.max())}


def _binormals(curve, cfg):
    found = bn.find_binormals(curve, max(64, 2 * cfg.grid))
    if cfg.format == "csv":
        return bn.binormals_csv(found)
    return {"binormals": [asdict(b) for b in found],
            "ordered": len(found), "unordered": bn.unordered_count(found),
            "degenerate": sum(not b.nondegenerate for b in found)}


RECT_COLUMNS = ("index,theta,s1,s2,s3,s4,z_re,z_im,zp_re,zp_im,w_re,w_im,wp_re,wp_im,"
                "hamiltonian,residual")


def _rects(curve, cfg):
    found = tr.find_rectangles(curve, cfg.theta, cfg.grid, tol=cfg.tol_newton,
                               merge_radius=cfg.tol_merge)
    rows = []
    for i, p in enumerate(found):
        z, zp, w, wp = p.vertices
        rows.append([i, p.theta, *p.params, z.real, z.imag, zp.real, zp.imag,
                     w.real, w.imag, wp.real, wp.imag, p.hamiltonian, p.residual_norm])
    if cfg.format == "csv":
        return "\n".join([RECT_COLUMNS] + [",".join(fmt(v) for v in r) for r in rows]) + "\n"
    keys = RECT_COLUMNS.split(",")
    return {"theta": cfg.theta, "rectangles": [dict(zip(keys, r)) for r in rows]}


def _assemble(curve, cfg):
    seeds = tr.default_theta_seeds(cfg.theta_seeds)
    return tr.assemble(curve, seeds, cfg.grid, binormal_grid=max(64, 2 * cfg.grid),
                       eps0=cfg.epsilon0, merge_radius=cfg.tol_merge, tol=cfg.tol_newton)


def _trace(curve, cfg):
    cx = _assemble(curve, cfg)
    out = tr.branches_csv(cx.branches) if cfg.format == "csv" else tr.complex_summary(cx)
    return out, cx.consistency


def _spectrum(curve, cfg):
    cx = _assemble(curve, cfg)
    st = stats(curve)
    spectrum_set = sp.angle_spectrum(cx, cfg.epsilon)
    if cfg.format == "csv":
        body = "lo,hi\n" + "".join(f"{fmt(a)},{fmt(b)}\n" for a, b in spectrum_set)
        return body, cx.consistency
    profiles = [sp.integrate_action(b) for b in cx.branches if len(b.X) >= 2]
    return {"epsilon": cfg.epsilon, "spectrum": spectrum_set.to_list(),
            "measure": spectrum_set.measure,
            "resolution": sp.spectrum_resolution(cx),
            "iota_symmetry_defect": sp.iota_symmetry_defect(spectrum_set),
            "theorems": sp.check_theorems(spectrum_set, st, cfg.epsilon, cfg.k),
            "actions": [{"branch": p.branch_id, "anchored": p.anchored,
                         "anchor_kind": p.anchor_kind, "truncation": p.truncation,
                         "theta_range": [float(p.theta.min()), float(p.theta.max())],
                         "action_range": [float(p.action.min()), float(p.action.max())]}
                        for p in profiles],
            "note": sp.HEURISTIC_NOTE}, cx.consistency


def _render(curve, cfg):
    theta = cfg.theta if cfg.theta is not None else math.pi / 2
    rects = tr.find_rectangles(curve, theta, cfg.grid, tol=cfg.tol_newton, warn=False,
                               merge_radius=cfg.tol_merge)
    found = bn.find_binormals(curve, max(64, 2 * cfg.grid), warn=False)
    return render_svg(curve, rects, found, stats(curve).radius ** 2, title=f"theta = {theta:.6g}")


def _write(cfg: RunConfig, payload) -> None:
    text = payload if isinstance(payload, str) else dumps(payload)
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _consistency_exit(cfg, report) -> int:
    if report.get("ok", True):
        return EXIT_OK
    path = cfg.report or (f"{cfg.out}.consistency.json" if cfg.out else
                          "consistency_report.json")
    Path(path).write_text(dumps(report), encoding="utf-8")
    print(f"inscribed: solver consistency violation, report written to {path}",
          file=sys.stderr)
    return EXIT_CONSISTENCY


def run(cfg: RunConfig) -> int:
    curve = load_curve(cfg.curve)
    if cfg.perturb > 0:
        curve = perturb(curve, cfg.perturb, cfg.seed)
    if cfg.command == "info":
        _write(cfg, _info(curve, cfg))
    elif cfg.command == "binormals":
        _write(cfg, _binormals(curve, cfg))
    elif cfg.command == "rects":
        _write(cfg, _rects(curve, cfg))
    elif cfg.command in ("trace", "spectrum"):
        out, report = (_trace if cfg.command == "trace" else _spectrum)(curve, cfg)
        _write(cfg, out)
        return _consistency_exit(cfg, report)
    elif cfg.command == "render":
        _write(cfg, _render(curve, cfg))
    elif cfg.command == "verify":
        report = run_checks(curve, grid_n=cfg.grid, theta_seeds=cfg.theta_seeds,
                            epsilon=cfg.epsilon, k=cfg.k, seed=cfg.seed,
                            eps0=cfg.epsilon0, merge_radius=cfg.tol_merge,
                            tol_newton=cfg.tol_newton)
        _write(cfg, report)
        if not report["consistency"]["ok"]:
            return _consistency_exit(cfg, report["consistency"])
        return EXIT_OK if report["all_pass"] else EXIT_CHECK
    return EXIT_OK


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except (CurveParseError, InvalidInputError) as exc:
        print(f"inscribed: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        return run(cfg)
    except (CurveParseError, InvalidInputError) as exc:
        print(f"inscribed: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EmbeddingError as exc:
        print(f"inscribed: embedding check failed: {exc}", file=sys.stderr)
        return EXIT_EMBED
    except InscribedError as exc:
        print(f"inscribed: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
