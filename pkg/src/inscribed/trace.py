"""Tracing the 1-manifold of inscribed rectangles.

Points live in ``R^5`` as ``x = (s1, s2, s3, s4, theta)`` with the curve
parameters unwrapped along a branch.  Branches are followed by
pseudo-arclength continuation and terminate near ``theta in {0, pi}`` where
the rectangle collapses onto a binormal chord.
"""

from __future__ import annotations

import io
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import binormal as bn
from .curve import TWO_PI, ClosedCurve, evaluate, jet
from .errors import InvalidInputError, SingularPointError
from .export import fmt
from .rectgeom import (
    Inscription,
    canonical,
    iota,
    make_inscription,
    residual,
    residual_and_jacobian,
    residual_jacobian,
    rho,
    sigma,
    wrapped_distance,
)

log = logging.getLogger(__name__)

NEWTON_TOL = 1e-11
MERGE_RADIUS = 1e-5
EPS0 = 1e-3
STEP_INIT = 1e-2
STEP_MIN = 1e-7
STEP_MAX = 0.05
GROW, SHRINK = 1.5, 0.5
RANK_TOL = 1e-10
MAX_STEPS = 20000
MAX_FOLDS = 200


def default_theta_seeds(count: int = 17) -> np.ndarray:
    return np.arange(1, count + 1) * math.pi / (count + 1)


# -- fixed-theta solving -----------------------------------------------------

def newton_fixed_theta(curve: ClosedCurve, params, theta, iterations: int = 40,
                       tol: float = NEWTON_TOL, max_step: float = 0.5):
    """Batched Newton in ``(s1..s4)`` at fixed ``theta``.

    Uses a pseudo-inverse so rank-deficient (Morse-Bott) systems still converge
    onto their solution families.  Returns ``(params, converged, residual_norm)``.
    """
    p = np.array(params, dtype=float).reshape(-1, 4)
    th = np.broadcast_to(np.asarray(theta, dtype=float), (len(p),)).copy()
    active = np.ones(len(p), dtype=bool)
    for _ in range(iterations):
        r, J = residual_and_jacobian(curve, p[active], th[active])
        still = np.linalg.norm(r, axis=1) > tol
        active[np.nonzero(active)[0][~still]] = False
        if not active.any():
            break
        r, J = r[still], J[still, :, :4]
        step = np.einsum("kij,kj->ki", np.linalg.pinv(J, rcond=1e-13), r)
        norm = np.abs(step).max(axis=1)
        scale = np.minimum(1.0, max_step / np.maximum(norm, 1e-300))
        p[active] -= step * scale[:, None]
    rn = np.linalg.norm(residual(curve, p, th), axis=1)
    return p, rn <= tol * 10, rn


def _project(curve: ClosedCurve, pts, dense_s, dense_f):
    """Curve parameter of the nearest point for each of ``pts``."""
    pts = np.asarray(pts)
    idx = np.empty(pts.shape, dtype=int)
    flat = pts.ravel()
    out = idx.ravel()
    for lo in range(0, len(flat), 512):
        chunk = flat[lo:lo + 512]
        out[lo:lo + 512] = np.argmin(np.abs(chunk[:, None] - dense_f[None, :]), axis=1)
    s = dense_s[idx]
    for _ in range(3):
        f, d, dd = jet(curve, s)
        diff = f - pts
        g = np.real(np.conj(diff) * d)
        gp = np.abs(d) ** 2 + np.real(np.conj(diff) * dd)
        s = s - np.where(gp > 0, g / np.where(gp > 0, gp, 1.0), 0.0)
    return s


def degeneracy_size(curve: ClosedCurve) -> float:
    return 1e-3 * curve.scale


def find_rectangles(curve: ClosedCurve, theta: float, grid_n: int = 32,
                    tol: float = NEWTON_TOL, warn: bool = True,
                    merge_radius: float = MERGE_RADIUS) -> list[Inscription]:
    """Inscribed ``theta``-rectangles found from a ``grid_n^2`` seed grid.

    Seeds ``(s1, s3)`` are completed by projecting the rotated diagonal back
    onto the curve, then polished by Newton.  Solutions are returned once per
    ``{x, sigma(x)}`` pair, in canonical form.
    """
    if not 0 < theta < math.pi:
        raise InvalidInputError(f"theta={theta} outside (0, pi)")
    if grid_n < 4:
        raise InvalidInputError("grid_n must be at least 4")
    h = TWO_PI / grid_n
    u = (np.arange(grid_n) + 0.5) * h
    S1, S3 = np.meshgrid(u, u, indexing="ij")
    s1, s3 = S1.ravel(), S3.ravel()
    keep = np.abs(np.mod(s1 - s3 + math.pi, TWO_PI) - math.pi) >= 2 * h
    s1, s3 = s1[keep], s3[keep]
    dense_s = np.arange(2048) * (TWO_PI / 2048)
    dense_f = evaluate(curve, dense_s)
    zp, wp = rho(evaluate(curve, s1), evaluate(curve, s3), theta)
    s2 = _project(curve, zp, dense_s, dense_f)
    s4 = _project(curve, wp, dense_s, dense_f)
    seeds = np.column_stack([s1, s2, s3, s4])
    p, ok, _ = newton_fixed_theta(curve, seeds, theta, tol=tol)
    p = p[ok]
    eps_deg = degeneracy_size(curve)
    found = []
    for q in p:
        x = canonical(np.append(q, theta))
        ins = make_inscription(curve, x)
        if ins.size < eps_deg:
            continue
        found.append(x)
    found.sort(key=lambda x: tuple(np.round(x[:4], 7)))
    kept: list[np.ndarray] = []
    for x in found:
        if kept and np.min(wrapped_distance(np.array(kept), x)) <= merge_radius:
            continue
        kept.append(x)
    if not kept and warn:
        warnings.warn(f"no inscribed rectangle found at theta={theta}", RuntimeWarning,
                      stacklevel=2)
    return [make_inscription(curve, x) for x in kept]


# -- continuation ------------------------------------------------------------

@dataclass
class Endpoint:
    kind: str
    binormal: int | None = None
    params: tuple | None = None
    hvalue: float | None = None
    reason: str = ""

    def as_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind.startswith("binormal"):
            d.update(binormal=self.binormal, params=list(self.params or ()), hvalue=self.hvalue)
        if self.reason:
            d["reason"] = self.reason
        return d


@dataclass
class Branch:
    """A continuation-ordered arc of inscriptions."""

    X: np.ndarray
    endpoints: tuple
    folds: list = field(default_factory=list)
    id: int = -1
    geometric_id: int = -1
    orbit: str = "id"
    points: list = field(default_factory=list, repr=False)

    @property
    def theta(self) -> np.ndarray:
        return self.X[:, 4]

    @property
    def closed(self) -> bool:
        return self.endpoints[0].kind == "closed-loop"

    def hamiltonian(self) -> np.ndarray:
        return np.array([p.hamiltonian for p in self.points])

    def theta_range(self) -> tuple[float, float]:
        return float(self.theta.min()), float(self.theta.max())


def _null_vector(J):
    _, S, Vt = np.linalg.svd(J)
    return Vt[-1], S


def _corrector(curve, xp, t, tol, max_iter=10):
    y = xp.copy()
    for it in range(1, max_iter + 1):
        F, J = residual_and_jacobian(curve, y[:4], y[4])
        g = np.append(F, t @ (y - xp))
        A = np.vstack([J, t])
        try:
            dy = np.linalg.solve(A, g)
        except np.linalg.LinAlgError:
            return y, it, False
        y = y - dy
        if np.linalg.norm(residual(curve, y[:4], y[4])) <= tol and np.abs(dy).max() < 1e-9:
            return y, it, True
        if not np.all(np.isfinite(y)) or np.abs(dy).max() > 1.0:
            return y, it, False
    ok = np.linalg.norm(residual(curve, y[:4], y[4])) <= tol
    return y, max_iter, bool(ok)


def _solve_at_theta(curve, guess, theta, tol=NEWTON_TOL):
    p, ok, _ = newton_fixed_theta(curve, guess[:4], theta, tol=tol, iterations=30,
                                  max_step=0.05)
    return np.append(p[0], theta), bool(ok[0])


def _unwrap_like(y, ref):
    """Shift the angle entries of ``y`` by multiples of 2*pi to sit near ``ref``."""
    y = np.array(y, dtype=float)
    y[:4] = ref[:4] + np.mod(y[:4] - ref[:4] + math.pi, TWO_PI) - math.pi
    return y


def identify_endpoint(curve, X, side: str, binormals=None, radius: float = 5e-3) -> Endpoint:
    """Limit binormal of a branch end near ``theta = 0`` (side '0') or ``pi``."""
    a, b = X[-2], X[-1]
    target = 0.0 if side == "0" else math.pi
    dt = b[4] - a[4]
    lam = (target - b[4]) / dt if abs(dt) > 1e-14 else 0.0
    lam = float(np.clip(lam, -5.0, 5.0))
    guess = np.array([b[0] + lam * (b[0] - a[0]), b[2] + lam * (b[2] - a[2])])
    pts, ok = bn.newton_critical(curve, guess[None, :], iterations=30, max_step=0.05)
    dist = float(np.abs(np.mod(pts[0] - guess + math.pi, TWO_PI) - math.pi).max())
    b1, b2 = (pts[0] if ok[0] and dist < radius else np.mod(guess, TWO_PI))
    b1, b2 = bn.wrap_angle(b1), bn.wrap_angle(b2)
    H = 0.25 * abs(evaluate(curve, b1) - evaluate(curve, b2)) ** 2
    idx = None
    if binormals:
        idx = bn.match_binormal(binormals, b1, b2, 1e-5)
        if idx is None:
            idx = bn.match_binormal(binormals, guess[0], guess[1], radius)
    return Endpoint(kind=f"binormal-at-{'0' if side == '0' else 'pi'}", binormal=idx,
                    params=(b1, b2), hvalue=float(H))


def _orient(t, direction, ref=None):
    if ref is not None:
        return t if t @ ref >= 0 else -t
    key = t[4] if abs(t[4]) > 1e-12 else t[0]
    return t if key * direction > 0 else -t


def continue_branch(curve: ClosedCurve, start, direction: int = 1, binormals=None,
                    eps0: float = EPS0, tol: float = NEWTON_TOL, step_init: float = STEP_INIT,
                    step_min: float = STEP_MIN, step_max: float = STEP_MAX,
                    max_steps: int = MAX_STEPS, max_folds: int = MAX_FOLDS,
                    merge_radius: float = MERGE_RADIUS) -> Branch:
    """Follow the solution curve from ``start`` in one direction.

    ``direction=+1`` leaves ``start`` with theta increasing (or s1 increasing
    at a fold).  Stops at ``theta = eps0`` / ``pi - eps0``, on loop closure,
    or at the step floor (truncated).
    """
    x0 = start.x if isinstance(start, Inscription) else np.asarray(start, dtype=float)
    x0 = x0.astype(float).copy()
    J = residual_jacobian(curve, x0[:4], x0[4])
    t, S = _null_vector(J)
    if S[3] < RANK_TOL * S[0]:
        raise SingularPointError(
            f"residual Jacobian has rank < 4 at theta={x0[4]:.6g}; curve likely non-generic, "
            "try perturb()")
    t = _orient(t, direction)
    t0 = t.copy()
    X, folds = [x0], []
    x, h = x0, step_init
    travelled = 0.0
    end = None
    for _ in range(max_steps):
        if h < step_min:
            end = Endpoint("truncated", reason="step floor reached")
            break
        xp = x + h * t
        y, iters, ok = _corrector(curve, xp, t, tol)
        if not ok or np.abs(y - x).max() > 2 * h:
            h *= SHRINK
            continue
        J = residual_jacobian(curve, y[:4], y[4])
        tn, S = _null_vector(J)
        tn = _orient(tn, direction, ref=t)
        if tn @ t < 0.95:
            h *= SHRINK
            continue
        if S[3] < RANK_TOL * S[0]:
            end = Endpoint("truncated", reason=f"singular point near theta={y[4]:.6g}")
            break
        if y[4] <= eps0 or y[4] >= math.pi - eps0:
            target = eps0 if y[4] <= eps0 else math.pi - eps0
            lam = (target - x[4]) / (y[4] - x[4])
            z, zok = _solve_at_theta(curve, x + lam * (y - x), target, tol)
            if zok and np.abs(z - x).max() <= 2 * h:
                X.append(z)
            else:
                X.append(y)
            end = identify_endpoint(curve, np.array(X), "0" if target < 1 else "pi", binormals)
            break
        travelled += float(np.linalg.norm(y - x))
        if travelled > 4 * step_init:
            closed = _closes(curve, x, y, x0, t0, h, tol, merge_radius)
            if closed is not None:
                X.append(closed)
                end = Endpoint("closed-loop")
                break
        if np.sign(tn[4]) != np.sign(t[4]) and t[4] != 0:
            folds.append(float(x[4] - t[4] * (y[4] - x[4]) / (tn[4] - t[4])))
            if len(folds) > max_folds:
                X.append(y)
                end = Endpoint("truncated", reason="fold cascade; curve likely non-generic")
                break
        X.append(y)
        x, t = y, tn
        if iters <= 3:
            h = min(h * GROW, step_max)
        elif iters >= 8:
            h *= SHRINK
    else:
        end = Endpoint("truncated", reason="step budget exhausted")
    X = np.array(X)
    return Branch(X=X, endpoints=(Endpoint("start"), end), folds=folds,
                  points=[make_inscription(curve, r) for r in X])


def _closes(curve, x, y, x0, t0, h, tol, merge_radius=MERGE_RADIUS):
    """If segment ``x -> y`` passes through ``x0`` (mod 2*pi), return ``x0`` shifted."""
    ref = _unwrap_like(x0, y)
    a, b = t0 @ (x - ref), t0 @ (y - ref)
    if a > 0 or b < 0 or np.abs(y - ref).max() > 3 * h:
        return None
    lam = a / (a - b) if a != b else 0.0
    guess = x + lam * (y - x)
    z, _, ok = _corrector_plane(curve, guess, t0, ref, tol)
    if ok and wrapped_distance(z, x0) <= merge_radius:
        return ref
    return None


def _corrector_plane(curve, guess, normal, point, tol, max_iter=12):
    y = guess.copy()
    for it in range(1, max_iter + 1):
        F = residual(curve, y[:4], y[4])
        g = np.append(F, normal @ (y - point))
        A = np.vstack([residual_jacobian(curve, y[:4], y[4]), normal])
        try:
            dy = np.linalg.solve(A, g)
        except np.linalg.LinAlgError:
            return y, it, False
        y = y - dy
        if np.abs(dy).max() < 1e-12:
            break
    ok = np.linalg.norm(residual(curve, y[:4], y[4])) <= tol
    return y, it, bool(ok)


def trace_branch(curve: ClosedCurve, start, binormals=None, **kw) -> Branch:
    """Continue from ``start`` in both directions and join the halves."""
    fwd = continue_branch(curve, start, +1, binormals, **kw)
    if fwd.endpoints[1].kind == "closed-loop":
        fwd.endpoints = (Endpoint("closed-loop"), Endpoint("closed-loop"))
        return fwd
    back = continue_branch(curve, start, -1, binormals, **kw)
    X = np.vstack([back.X[::-1], fwd.X[1:]])
    pts = back.points[::-1] + fwd.points[1:]
    return Branch(X=X, endpoints=(back.endpoints[1], fwd.endpoints[1]),
                  folds=sorted(back.folds + fwd.folds), points=pts)


def branch_from_family(curve: ClosedCurve, family, thetas, binormals=None) -> Branch:
    """Branch built from an explicit family ``theta -> (s1, s2, s3, s4)``.

    Each point is polished by Newton; used for closed-form oracles and for
    non-generic curves where continuation is singular.
    """
    rows = []
    for th in thetas:
        guess = np.append(np.asarray(family(th), dtype=float), th)
        x, _ = _solve_at_theta(curve, guess, th)
        rows.append(x)
    X = np.array(rows)
    ends = []
    for side_X in (X[::-1], X):
        th = side_X[-1, 4]
        if th < 0.1:
            ends.append(identify_endpoint(curve, side_X, "0", binormals))
        elif th > math.pi - 0.1:
            ends.append(identify_endpoint(curve, side_X, "pi", binormals))
        else:
            ends.append(Endpoint("truncated", reason="family range"))
    return Branch(X=X, endpoints=tuple(ends), points=[make_inscription(curve, r) for r in X])


def _fold_thetas(X):
    d = np.diff(X[:, 4])
    idx = np.nonzero(np.sign(d[1:]) * np.sign(d[:-1]) < 0)[0]
    return [float(X[i + 1, 4]) for i in idx]


def map_branch(curve: ClosedCurve, branch: Branch, op: str, binormals=None) -> Branch:
    """Image of a branch under ``sigma``, ``iota`` or ``sigma_iota``."""
    f = {"sigma": sigma, "iota": iota, "sigma_iota": lambda x: sigma(iota(x))}[op]
    X = f(branch.X)
    ends = []
    for e, side_X in zip(branch.endpoints, (X[::-1], X)):
        if e.kind.startswith("binormal"):
            side = "0" if side_X[-1, 4] < 1 else "pi"
            ends.append(identify_endpoint(curve, side_X, side, binormals))
        else:
            ends.append(Endpoint(e.kind, reason=e.reason))
    return Branch(X=X, endpoints=tuple(ends), folds=_fold_thetas(X), orbit=op,
                  points=[make_inscription(curve, r) for r in X])


def points_at_theta(curve: ClosedCurve, branch: Branch, theta: float) -> list[np.ndarray]:
    """Refined branch points at ``theta`` from every crossing segment."""
    th = branch.X[:, 4]
    sgn = th - theta
    idx = np.nonzero(sgn[:-1] * sgn[1:] <= 0)[0]
    out = []
    for i in idx:
        a, b = branch.X[i], branch.X[i + 1]
        lam = (theta - a[4]) / (b[4] - a[4]) if b[4] != a[4] else 0.0
        guess = a + lam * (b - a)
        z, ok = _solve_at_theta(curve, guess, theta)
        out.append(z if ok else guess)
    return out


def branch_contains(curve: ClosedCurve, branch: Branch, x, radius: float = MERGE_RADIUS) -> bool:
    for y in points_at_theta(curve, branch, float(x[4])):
        if wrapped_distance(y, x) <= radius:
            return True
    return False


# -- assembly ----------------------------------------------------------------

@dataclass
class RectangleComplex:
    curve: ClosedCurve
    branches: list
    binormals: list
    singular: list = field(default_factory=list)
    consistency: dict = field(default_factory=dict)
    eps0: float = EPS0

    @property
    def geometric_count(self) -> int:
        return len({b.geometric_id for b in self.branches})

    @property
    def loops(self) -> list:
        return [b for b in self.branches if b.closed]

    def orbit(self, geometric_id: int) -> list:
        return [b for b in self.branches if b.geometric_id == geometric_id]


ORBIT_OPS = ("sigma", "iota", "sigma_iota")


def _orbit(curve, branch, binormals, radius=MERGE_RADIUS):
    members = [branch]
    for op in ORBIT_OPS:
        img = map_branch(curve, branch, op, binormals)
        mid = img.X[len(img.X) // 2]
        if any(branch_contains(curve, m, mid, radius) for m in members):
            continue
        members.append(img)
    return members


def consistency_report(branches, binormals) -> dict:
    at0 = {i: [] for i in range(len(binormals))}
    atpi = {i: [] for i in range(len(binormals))}
    violations = []
    for b in branches:
        for e in b.endpoints:
            if not e.kind.startswith("binormal"):
                if e.kind == "truncated":
                    violations.append({"branch": b.id, "issue": "truncated", "reason": e.reason})
                continue
            if e.binormal is None:
                violations.append({"branch": b.id, "issue": f"unmatched {e.kind}",
                                   "params": list(e.params)})
                continue
            (at0 if e.kind == "binormal-at-0" else atpi)[e.binormal].append(b.id)
    for side, table in (("0", at0), ("pi", atpi)):
        for i, ids in table.items():
            if len(ids) > 1:
                violations.append({"binormal": i, "issue": f"claimed {len(ids)} times at {side}",
                                   "branches": ids})
            if ids and not binormals[i].nondegenerate:
                violations.append({"binormal": i, "issue": f"degenerate binormal claimed at {side}"})
    unmatched = [i for i, b in enumerate(binormals)
                 if b.nondegenerate and not at0[i] and not atpi[i]]
    table = [{"binormal": i, "params": list(b.params), "hvalue": b.hvalue,
              "nondegenerate": b.nondegenerate, "at_0": at0[i], "at_pi": atpi[i]}
             for i, b in enumerate(binormals)]
    ends0 = sum(e.kind == "binormal-at-0" and e.binormal is not None
                for b in branches for e in b.endpoints)
    claimed0 = sum(1 for i in at0 if at0[i] and binormals[i].nondegenerate)
    return {"table": table, "violations": violations, "unmatched_binormals": unmatched,
            "ends_at_0": ends0, "claimed_at_0": claimed0,
            "degenerate_binormals": sum(not b.nondegenerate for b in binormals),
            "ok": not violations}


def assemble(curve: ClosedCurve, theta_seeds=None, grid_n: int = 32, binormals=None,
             binormal_grid: int = 64, eps0: float = EPS0, merge_radius: float = MERGE_RADIUS,
             **kw) -> RectangleComplex:
    """Trace every branch met at the seed angles and close it under the symmetries."""
    if theta_seeds is None:
        theta_seeds = default_theta_seeds()
    theta_seeds = [float(t) for t in theta_seeds]
    if any(not 0 < t < math.pi for t in theta_seeds):
        raise InvalidInputError("theta seeds must lie in (0, pi)")
    if binormals is None:
        binormals = bn.find_binormals(curve, binormal_grid)
    branches: list[Branch] = []
    singular = []
    geo = 0
    for th in theta_seeds:
        for ins in find_rectangles(curve, th, grid_n, tol=kw.get("tol", NEWTON_TOL), warn=False,
                                   merge_radius=merge_radius):
            x = ins.x
            if any(branch_contains(curve, b, x, merge_radius) for b in branches):
                continue
            if any(wrapped_distance(s.x, x) <= merge_radius for s in singular):
                continue
            try:
                br = trace_branch(curve, ins, binormals, eps0=eps0, merge_radius=merge_radius,
                                  **kw)
            except SingularPointError as exc:
                log.info("singular start at theta=%.6g: %s", th, exc)
                singular.append(ins)
                continue
            for m in _orbit(curve, br, binormals, merge_radius):
                m.geometric_id = geo
                m.id = len(branches)
                branches.append(m)
            geo += 1
    report = consistency_report(branches, binormals)
    report["singular_starts"] = len(singular)
    if singular:
        report["ok"] = False
        report["violations"].append({"issue": "singular starts (non-generic curve)",
                                     "count": len(singular)})
    return RectangleComplex(curve=curve, branches=branches, binormals=binormals,
                            singular=singular, consistency=report, eps0=eps0)


# -- exports -----------------------------------------------------------------

BRANCH_COLUMNS = ("branch_id,point_idx,theta,s1,s2,s3,s4,z_re,z_im,zp_re,zp_im,"
                  "w_re,w_im,wp_re,wp_im,hamiltonian,residual")


def branches_csv(branches) -> str:
    buf = io.StringIO()
    buf.write(BRANCH_COLUMNS + "\n")
    for b in branches:
        for k, p in enumerate(b.points):
            z, zp, w, wp = p.vertices
            row = [b.id, k, p.theta, *p.params, z.real, z.imag, zp.real, zp.imag,
                   w.real, w.imag, wp.real, wp.imag, p.hamiltonian, p.residual_norm]
            buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def complex_summary(cx: RectangleComplex) -> dict:
    return {
        "branches": [{"id": b.id, "geometric_id": b.geometric_id, "orbit": b.orbit,
                      "points": len(b.points), "theta_range": list(b.theta_range()),
                      "endpoints": [e.as_dict() for e in b.endpoints],
                      "folds": b.folds} for b in cx.branches],
        "geometric_branches": cx.geometric_count,
        "binormals": len(cx.binormals),
        "consistency": cx.consistency,
        "eps0": cx.eps0,
    }
