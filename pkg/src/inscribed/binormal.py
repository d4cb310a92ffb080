"""Binormals: critical points of the chord Hamiltonian on the torus of pairs."""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .curve import TWO_PI, ClosedCurve, evaluate, jet, sample
from .errors import InvalidInputError

DEDUP_RADIUS = 1e-6
GRADIENT_TOL = 1e-10


def _inner(a, b):
    return np.real(a * np.conj(b))


def gradient(curve: ClosedCurve, s1, s2) -> np.ndarray:
    """Gradient of ``(s1, s2) -> |f(s1) - f(s2)|^2 / 4``; broadcasts."""
    f1, d1 = jet(curve, s1, (0, 1))
    f2, d2 = jet(curve, s2, (0, 1))
    D = f1 - f2
    return np.stack([0.5 * _inner(d1, D), -0.5 * _inner(d2, D)], axis=-1)


def hessian(curve: ClosedCurve, s1, s2) -> np.ndarray:
    """Symmetric 2x2 Hessian of the chord Hamiltonian; broadcasts."""
    f1, d1, a1 = jet(curve, s1)
    f2, d2, a2 = jet(curve, s2)
    D = f1 - f2
    m11 = 0.5 * _inner(a1, D) + 0.5 * np.abs(d1) ** 2
    m22 = -0.5 * _inner(a2, D) + 0.5 * np.abs(d2) ** 2
    m12 = -0.5 * _inner(d1, d2)
    row1 = np.stack([m11, m12], axis=-1)
    row2 = np.stack([m12, m22], axis=-1)
    return np.stack([row1, row2], axis=-2)


@dataclass(frozen=True)
class Binormal:
    params: tuple
    chord: float
    hvalue: float
    hessian: tuple
    hessian_det: float
    morse_index: int | None
    nondegenerate: bool
    gradient_norm: float = 0.0

    @property
    def s(self) -> np.ndarray:
        return np.array(self.params)


def degeneracy_threshold(curve: ClosedCurve) -> float:
    scale = float(np.max(np.abs(sample(curve, 512, 1))) ** 2)
    return 1e-8 * scale**2


def classify(curve: ClosedCurve, s1: float, s2: float, threshold: float | None = None) -> Binormal:
    if threshold is None:
        threshold = degeneracy_threshold(curve)
    M = hessian(curve, s1, s2)
    det = float(np.linalg.det(M))
    chord = abs(evaluate(curve, s1) - evaluate(curve, s2))
    nondeg = abs(det) > threshold
    index = int(np.sum(np.linalg.eigvalsh(M) < 0)) if nondeg else None
    g = gradient(curve, s1, s2)
    return Binormal(params=(wrap_angle(s1), wrap_angle(s2)), chord=float(chord),
                    hvalue=0.25 * chord**2, hessian=tuple(map(tuple, M.tolist())),
                    hessian_det=det, morse_index=index, nondegenerate=bool(nondeg),
                    gradient_norm=float(np.linalg.norm(g)))


def newton_critical(curve: ClosedCurve, seeds, iterations: int = 60, tol: float = 1e-12,
                    max_step: float = 0.5):
    """Batched Newton on ``gradient = 0``; returns ``(points, converged)``."""
    x = np.array(seeds, dtype=float).reshape(-1, 2)
    done = np.zeros(len(x), dtype=bool)
    for _ in range(iterations):
        active = ~done
        if not active.any():
            break
        xa = x[active]
        g = gradient(curve, xa[:, 0], xa[:, 1])
        small = np.linalg.norm(g, axis=1) <= tol
        H = hessian(curve, xa[:, 0], xa[:, 1])
        step = np.einsum("kij,kj->ki", np.linalg.pinv(H, rcond=1e-12), g)
        norm = np.linalg.norm(step, axis=1)
        scale = np.minimum(1.0, max_step / np.maximum(norm, 1e-300))
        xa = xa - step * scale[:, None]
        xa[small] = x[active][small]
        x[active] = xa
        idx = np.nonzero(active)[0]
        done[idx[small]] = True
    g = gradient(curve, x[:, 0], x[:, 1])
    return np.mod(x, TWO_PI), np.linalg.norm(g, axis=1) <= max(tol, GRADIENT_TOL)


def wrap_angle(s: float) -> float:
    """``s mod 2*pi`` with values within 1e-12 of 2*pi folded to 0."""
    s = float(s) % TWO_PI
    return 0.0 if TWO_PI - s < 1e-12 else s


def _torus_dist(a, b):
    d = np.abs(np.mod(a - b + math.pi, TWO_PI) - math.pi)
    return d.max(axis=-1)


def dedup(points, radius: float = DEDUP_RADIUS) -> np.ndarray:
    kept = []
    for p in points:
        if kept and _torus_dist(np.array(kept), p).min() <= radius:
            continue
        kept.append(p)
    return np.array(kept).reshape(-1, points.shape[-1] if len(points) else 2)


def find_binormals(curve: ClosedCurve, grid_n: int = 64, warn: bool = True) -> list[Binormal]:
    """All binormals reachable by Newton from a ``grid_n x grid_n`` seed grid.

    Seeds within one grid cell of the diagonal are skipped.  Results are
    ordered pairs, sorted by ``hvalue`` descending.
    """
    if grid_n < 16:
        raise InvalidInputError("grid_n must be at least 16")
    h = TWO_PI / grid_n
    u = (np.arange(grid_n) + 0.5) * h
    S1, S2 = np.meshgrid(u, u, indexing="ij")
    seeds = np.column_stack([S1.ravel(), S2.ravel()])
    off = np.abs(np.mod(seeds[:, 0] - seeds[:, 1] + math.pi, TWO_PI) - math.pi) >= h
    pts, ok = newton_critical(curve, seeds[off])
    pts = pts[ok]
    size = curve.scale
    chord = np.abs(evaluate(curve, pts[:, 0]) - evaluate(curve, pts[:, 1]))
    pts = pts[chord > 1e-6 * size]
    chord = chord[chord > 1e-6 * size]
    order = np.lexsort((pts[:, 1], pts[:, 0], -np.round(chord, 10)))
    pts = dedup(pts[order])
    thr = degeneracy_threshold(curve)
    found = [classify(curve, a, b, thr) for a, b in pts]
    found.sort(key=lambda b: (-round(b.hvalue, 10), b.params))
    if not found and warn:
        warnings.warn("no binormals found; seed grid too coarse?", RuntimeWarning, stacklevel=2)
    return found


def unordered_count(binormals: list[Binormal]) -> int:
    seen = []
    for b in binormals:
        key = np.array(b.params)
        if not any(min(_torus_dist(key, k), _torus_dist(key[::-1], k)) <= DEDUP_RADIUS
                   for k in seen):
            seen.append(key)
    return len(seen)


def match_binormal(binormals: list[Binormal], s1: float, s2: float, radius: float) -> int | None:
    """Index of the binormal with ``(s1, s2)`` closest in the torus max-norm."""
    if not binormals:
        return None
    P = np.array([b.params for b in binormals])
    d = _torus_dist(P, np.array([s1, s2]))
    i = int(np.argmin(d))
    return i if d[i] <= radius else None


def binormals_csv(binormals: list[Binormal]) -> str:
    from .export import fmt

    buf = io.StringIO()
    buf.write("s1,s2,chord,hvalue,det,morse_index,nondegenerate\n")
    for b in binormals:
        idx = "" if b.morse_index is None else str(b.morse_index)
        buf.write(",".join([fmt(b.params[0]), fmt(b.params[1]), fmt(b.chord), fmt(b.hvalue),
                            fmt(b.hessian_det), idx, str(b.nondegenerate).lower()]) + "\n")
    return buf.getvalue()
