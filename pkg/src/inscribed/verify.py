"""The invariant and theorem suite behind ``inscribed verify``."""

from __future__ import annotations

import math

import numpy as np

from . import binormal as bn
from . import spectral as sp
from . import trace as tr
from .curve import TWO_PI, ClosedCurve, evaluate, stats
from .errors import NotCheckableError
from .rectgeom import iota, residual, residual_jacobian, sigma

FD_STEP = 1e-6


def fd_eval_error(curve: ClosedCurve, rng, count: int = 50, h: float = 1e-5) -> float:
    """Relative error of analytic ``f'`` and ``f''`` against central differences."""
    s = rng.uniform(0, TWO_PI, count)
    errs = []
    for order in (1, 2):
        lo = evaluate(curve, s + h, order - 1)
        hi = evaluate(curve, s - h, order - 1)
        fd = (lo - hi) / (2 * h)
        exact = evaluate(curve, s, order)
        errs.append(np.abs(fd - exact).max() / max(np.abs(exact).max(), 1e-300))
    return float(max(errs))


def fd_jacobian_error(curve: ClosedCurve, rng, count: int = 100, h: float = FD_STEP) -> float:
    """Worst relative max-norm error of :func:`residual_jacobian` over random points."""
    worst = 0.0
    for _ in range(count):
        x = np.append(rng.uniform(0, TWO_PI, 4), rng.uniform(0.05, math.pi - 0.05))
        J = residual_jacobian(curve, x[:4], x[4])
        fd = np.empty_like(J)
        for j in range(5):
            e = np.zeros(5)
            e[j] = h
            fd[:, j] = (residual(curve, (x + e)[:4], (x + e)[4])
                        - residual(curve, (x - e)[:4], (x - e)[4])) / (2 * h)
        worst = max(worst, float(np.abs(fd - J).max() / np.abs(J).max()))
    return worst


def fd_hessian_error(curve: ClosedCurve, rng, count: int = 100, h: float = FD_STEP) -> float:
    """Worst relative error of the binormal Hessian against differenced gradients."""
    worst = 0.0
    for _ in range(count):
        s1, s2 = rng.uniform(0, TWO_PI, 2)
        M = bn.hessian(curve, s1, s2)
        fd = np.column_stack([
            (bn.gradient(curve, s1 + h, s2) - bn.gradient(curve, s1 - h, s2)) / (2 * h),
            (bn.gradient(curve, s1, s2 + h) - bn.gradient(curve, s1, s2 - h)) / (2 * h),
        ])
        worst = max(worst, float(np.abs(fd - M).max() / max(np.abs(M).max(), 1e-12)))
    return worst


def symmetry_closure(cx: tr.RectangleComplex) -> dict:
    """Map each stored branch by sigma and iota and look the image up again."""
    worst_res, missing = 0.0, []
    for b in cx.branches:
        x = b.X[len(b.X) // 2]
        for name, op in (("sigma", sigma), ("iota", iota)):
            y = op(x)
            worst_res = max(worst_res, float(np.linalg.norm(residual(cx.curve, y[:4], y[4]))))
            if not any(tr.branch_contains(cx.curve, c, y) for c in cx.branches):
                missing.append({"branch": b.id, "map": name})
    return {"max_mapped_residual": worst_res, "missing": missing,
            "pass": worst_res <= 1e-9 and not missing}


def fold_consistency(cx: tr.RectangleComplex) -> dict:
    """Between recorded folds theta must be monotone along each branch."""
    bad = []
    for b in cx.branches:
        d = np.diff(b.X[:, 4])
        changes = int(np.sum(np.sign(d[1:]) * np.sign(d[:-1]) < 0))
        if changes != len(b.folds):
            bad.append({"branch": b.id, "sign_changes": changes, "folds": len(b.folds)})
    return {"pass": not bad, "mismatches": bad}


def action_checks(cx: tr.RectangleComplex, samples: int = 512, tol: float = 1e-3) -> dict:
    rows = []
    for b in cx.branches:
        if len(b.X) < 3:
            continue
        prof = sp.integrate_action(b)
        try:
            lo, hi = float(prof.theta.min()), float(prof.theta.max())
            grid = np.linspace(lo, hi, samples + 2)[1:-1]
            rep = sp.verify_derivative(sp.resample(prof, grid))
            rep["mode"] = "resampled"
        except NotCheckableError:
            try:
                rep = sp.verify_derivative(prof)
                rep["mode"] = "nodes"
            except NotCheckableError as exc:
                rows.append({"branch": b.id, "checkable": False, "reason": str(exc)})
                continue
        rep.update(branch=b.id, anchored=prof.anchored, truncation=prof.truncation)
        rows.append(rep)
    checked = [r for r in rows if "max_relative_deviation" in r]
    worst = max((r["max_relative_deviation"] for r in checked), default=0.0)
    return {"pass": worst <= tol, "tol": tol, "max_relative_deviation": worst, "branches": rows}


def run_checks(curve: ClosedCurve, grid_n: int = 32, theta_seeds: int = 17,
               epsilon: float = 0.0, k: int = 2, seed: int = 7, eps0: float = tr.EPS0,
               merge_radius: float = tr.MERGE_RADIUS, tol_newton: float = tr.NEWTON_TOL) -> dict:
    rng = np.random.default_rng(seed)
    st = stats(curve)
    checks = {}
    checks["bieberbach"] = {"ratio": st.ratio, "pass": 0 < st.ratio <= math.pi + 1e-9
                            and st.radius**2 >= st.area / math.pi - 1e-9}
    e = fd_eval_error(curve, rng)
    checks["derivatives"] = {"relative_error": e, "pass": e <= 1e-6}
    e = fd_jacobian_error(curve, rng)
    checks["jacobian"] = {"relative_error": e, "pass": e <= 1e-5}
    e = fd_hessian_error(curve, rng)
    checks["hessian"] = {"relative_error": e, "pass": e <= 1e-5}

    binormals = bn.find_binormals(curve, max(64, 2 * grid_n), warn=False)
    gmax = max((b.gradient_norm for b in binormals), default=math.inf)
    top = max((b.hvalue for b in binormals), default=0.0)
    checks["binormals"] = {"ordered": len(binormals), "unordered": bn.unordered_count(binormals),
                           "degenerate": sum(not b.nondegenerate for b in binormals),
                           "max_gradient_norm": gmax, "max_hvalue": top,
                           "radius_squared": st.radius**2,
                           "pass": gmax <= 1e-10 and abs(top - st.radius**2) <= 1e-8}

    cx = tr.assemble(curve, tr.default_theta_seeds(theta_seeds), grid_n, binormals=binormals,
                     eps0=eps0, merge_radius=merge_radius, tol=tol_newton)
    worst = max((p.residual_norm for b in cx.branches for p in b.points), default=0.0)
    checks["residuals"] = {"max": worst, "pass": worst <= 1e-9}
    checks["symmetry"] = symmetry_closure(cx)
    checks["folds"] = fold_consistency(cx)
    checks["action_derivative"] = action_checks(cx)

    spectrum_set = sp.angle_spectrum(cx, 0.0)
    res = sp.spectrum_resolution(cx)
    defect = sp.iota_symmetry_defect(spectrum_set)
    checks["spectrum_iota_symmetry"] = {"defect": defect, "resolution": res,
                                        "pass": defect <= max(2 * res, 1e-9)}
    ell = sp.empirical_spectral(cx, st)
    axioms = sp.verify_axioms(ell, st)
    axioms["pass"] = axioms["all_pass"]
    axioms["heuristic"] = ell.heuristic
    checks["axioms"] = axioms
    theorems = {"epsilon_0": sp.check_theorems(spectrum_set, st, 0.0, k)}
    if epsilon > 0:
        theorems[f"epsilon_{epsilon}"] = sp.check_theorems(sp.angle_spectrum(cx, epsilon), st,
                                                           epsilon, k)
    checks["theorems"] = {"pass": all(r["all_pass"] for r in theorems.values()), **theorems}

    return {"stats": {"area": st.area, "radius": st.radius, "ratio": st.ratio},
            "spectrum": spectrum_set.to_list(), "measure": spectrum_set.measure,
            "branches": len(cx.branches), "geometric_branches": cx.geometric_count,
            "consistency": cx.consistency, "checks": checks,
            "all_pass": bool(cx.consistency["ok"] and all(c["pass"] for c in checks.values())),
            "note": sp.HEURISTIC_NOTE}
