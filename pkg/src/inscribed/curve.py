"""Closed plane curves as finite Fourier series.

A curve is stored as dense coefficients ``c_n`` for ``n = -N..N`` with
``f(s) = sum_n c_n exp(i n s)``.  Derivatives are exact.  Smoothed polygons
are converted to this form once, at construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy.optimize import minimize_scalar
from shapely.geometry import LinearRing, Polygon

from .errors import (
    AccuracyError,
    CurveParseError,
    EmbeddingError,
    InvalidInputError,
    RetryExhaustedError,
    SmoothingTooLargeError,
    UnsupportedOrderError,
)

TWO_PI = 2.0 * math.pi
EMBED_GRID = 2048
MAX_FILE_MODE = 128


@dataclass(frozen=True, eq=False)
class ClosedCurve:
    """Smooth Jordan curve ``f(s) = sum c_n e^{ins}``, period 2*pi, counterclockwise.

    ``orientation`` records the orientation of the input before it was
    normalized; evaluation always follows the counterclockwise parametrization.
    """

    coeffs: np.ndarray
    kind: str = "fourier"
    orientation: str = "ccw"
    vertices: tuple | None = None
    smoothing: float | None = None
    area_scale: float = 1.0
    _n: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 1 or len(c) % 2 != 1:
            raise InvalidInputError("coefficient array must have odd length 2N+1")
        c.setflags(write=False)
        N = len(c) // 2
        n = np.arange(-N, N + 1)
        n.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "_n", n)

    @property
    def degree(self) -> int:
        return len(self.coeffs) // 2

    @property
    def modes(self) -> np.ndarray:
        return self._n

    def coefficient(self, n: int) -> complex:
        N = self.degree
        return complex(self.coeffs[n + N]) if -N <= n <= N else 0j

    def eval(self, s, order: int = 0):
        return evaluate(self, s, order)

    def __call__(self, s):
        return evaluate(self, s, 0)

    @property
    def scale(self) -> float:
        """Rough size of the curve: max distance from the mean point."""
        pts = sample(self, 256)
        return float(np.max(np.abs(pts - self.coeffs[self.degree])))


@dataclass(frozen=True)
class CurveStats:
    area: float
    radius: float
    ratio: float
    orientation_sign: int
    diameter_params: tuple = (0.0, 0.0)


_BLOCK = 32


def _powers(s: np.ndarray, N: int) -> np.ndarray:
    """``exp(i k s)`` for ``k = 0..N`` along a new last axis.

    Exact exponentials at every ``_BLOCK``-th mode, cumulative products in
    between; the rounding error stays at a few ulps.
    """
    k0 = np.arange(0, N + 1, _BLOCK)
    base = np.exp(1j * s[..., None] * k0)
    z = np.exp(1j * s)[..., None]
    step = np.cumprod(np.broadcast_to(z, s.shape + (_BLOCK,)), axis=-1) / z
    P = (base[..., :, None] * step[..., None, :]).reshape(s.shape + (-1,))
    return P[..., :N + 1]


def _order_coeffs(curve: ClosedCurve, order: int) -> np.ndarray:
    if order not in (0, 1, 2):
        raise UnsupportedOrderError(f"derivative order {order} not supported (0, 1 or 2)")
    n, c = curve.modes, curve.coeffs
    if order == 1:
        return 1j * n * c
    if order == 2:
        return -(n * n) * c
    return c


def jet(curve: ClosedCurve, s, orders=(0, 1, 2)) -> list:
    """``[f^(k)(s) for k in orders]`` sharing one Fourier basis."""
    s = np.asarray(s, dtype=float)
    N = curve.degree
    P = _powers(s, N)
    out = []
    for order in orders:
        c = _order_coeffs(curve, order)
        pos, neg = c[N:], c[N::-1]
        v = P @ pos + np.conj(P[..., 1:] @ np.conj(neg[1:]))
        out.append(complex(v) if v.ndim == 0 else v)
    return out


def evaluate(curve: ClosedCurve, s, order: int = 0):
    """Evaluate ``f``, ``f'`` or ``f''`` at parameter(s) ``s``."""
    return jet(curve, s, (order,))[0]


def sample(curve: ClosedCurve, M: int, order: int = 0) -> np.ndarray:
    s = np.arange(M) * (TWO_PI / M)
    return evaluate(curve, s, order)


def fourier_area(curve: ClosedCurve) -> float:
    """Signed enclosed area in closed form, ``pi * sum n |c_n|^2``."""
    return float(math.pi * np.sum(curve.modes * np.abs(curve.coeffs) ** 2))


def check_embedding(curve: ClosedCurve, M: int = EMBED_GRID) -> None:
    """Sampled immersion and simplicity check; raises EmbeddingError."""
    d = sample(curve, M, 1)
    speed = np.abs(d)
    if not np.all(np.isfinite(speed)) or speed.min() <= 1e-9 * max(speed.max(), 1e-300):
        raise EmbeddingError("curve is not immersed: |f'| vanishes on the sample grid")
    pts = sample(curve, M)
    ring = LinearRing(np.column_stack([pts.real, pts.imag]))
    if not ring.is_simple:
        raise EmbeddingError("curve self-intersects on the sample grid")


def fourier_curve(coefficients, check: bool = True, kind: str = "fourier", **meta) -> ClosedCurve:
    """Build a curve from ``{n: c_n}`` or an iterable of ``(n, c_n)`` pairs.

    Clockwise inputs are reparametrized by ``s -> -s``.
    """
    if isinstance(coefficients, Mapping):
        items = list(coefficients.items())
    else:
        items = list(coefficients)
    if not items:
        raise InvalidInputError("no coefficients given")
    N = max(abs(int(n)) for n, _ in items)
    c = np.zeros(2 * N + 1, dtype=complex)
    for n, v in items:
        c[int(n) + N] += complex(v)
    return _from_dense(c, check=check, kind=kind, **meta)


def _from_dense(c, check=True, kind="fourier", **meta) -> ClosedCurve:
    c = np.asarray(c, dtype=complex)
    N = len(c) // 2
    n = np.arange(-N, N + 1)
    signed = float(np.sum(n * np.abs(c) ** 2))
    orientation = "ccw"
    if signed < 0:
        c = c[::-1].copy()
        orientation = "cw"
    elif signed == 0:
        raise EmbeddingError("curve encloses zero area")
    curve = ClosedCurve(c, kind=kind, orientation=orientation, **meta)
    if check:
        check_embedding(curve)
    return curve


def circle(radius: float = 1.0, center: complex = 0j) -> ClosedCurve:
    return fourier_curve({0: center, 1: radius})


def ellipse(a: float, b: float, center: complex = 0j) -> ClosedCurve:
    """``f(s) = a cos s + i b sin s``."""
    return fourier_curve({0: center, 1: (a + b) / 2, -1: (a - b) / 2})


def _periodic_mean(fun, tol: float, start: int = 64, max_points: int = 1 << 20) -> float:
    """Mean over one period by the trapezoid rule, doubling until converged."""
    M = start
    prev = float(np.mean(fun(np.arange(M) * (TWO_PI / M))))
    while M < max_points:
        M *= 2
        cur = float(np.mean(fun(np.arange(M) * (TWO_PI / M))))
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise AccuracyError("periodic quadrature did not converge", achieved=abs(cur - prev))


def enclosed_area(curve: ClosedCurve, tol: float = 1e-13) -> float:
    """Area from the line integral 1/2 * (x dy - y dx), reported positive."""

    def integrand(s):
        f = evaluate(curve, s)
        df = evaluate(curve, s, 1)
        return 0.5 * (f.real * df.imag - f.imag * df.real)

    return abs(TWO_PI * _periodic_mean(integrand, tol))


def diameter(curve: ClosedCurve, grid: int = 1024) -> tuple[float, float, float]:
    """Return ``(s, t, |f(s) - f(t)|)`` for the longest chord.

    Coarse all-pairs search on ``grid`` samples, then alternating 1-D ascent.
    """
    s_grid = np.arange(grid) * (TWO_PI / grid)
    pts = evaluate(curve, s_grid)
    dist = np.abs(pts[:, None] - pts[None, :])
    i, j = np.unravel_index(np.argmax(dist), dist.shape)
    s, t = float(s_grid[i]), float(s_grid[j])
    best = float(dist[i, j])
    h = 2 * TWO_PI / grid
    for _ in range(60):
        p = evaluate(curve, t)
        r = minimize_scalar(lambda u: -abs(evaluate(curve, u) - p), bounds=(s - h, s + h),
                            method="bounded", options={"xatol": 1e-13})
        s = float(r.x)
        q = evaluate(curve, s)
        r = minimize_scalar(lambda u: -abs(evaluate(curve, u) - q), bounds=(t - h, t + h),
                            method="bounded", options={"xatol": 1e-13})
        t = float(r.x)
        new = abs(evaluate(curve, s) - evaluate(curve, t))
        if new - best <= 1e-15 * max(best, 1.0):
            best = max(best, new)
            break
        best = new
    return s % TWO_PI, t % TWO_PI, best


def stats(curve: ClosedCurve) -> CurveStats:
    area = enclosed_area(curve)
    s, t, chord = diameter(curve)
    radius = chord / 2
    return CurveStats(area=area, radius=radius, ratio=area / radius**2,
                      orientation_sign=1 if curve.orientation == "ccw" else -1,
                      diameter_params=(s, t))


# -- smoothed polygons -------------------------------------------------------

def _polygon_fourier(vertices: np.ndarray, nmax: int):
    """Fourier coefficients of the arclength-parametrized closed polygon."""
    v = vertices
    edges = np.roll(v, -1) - v
    lengths = np.abs(edges)
    perimeter = lengths.sum()
    knots = TWO_PI * np.concatenate([[0.0], np.cumsum(lengths)[:-1]]) / perimeter
    dt = TWO_PI * lengths / perimeter
    vel = edges / dt
    jumps = vel - np.roll(vel, 1)
    n = np.arange(1, nmax + 1)
    phase = np.exp(-1j * np.outer(n, knots))
    pos = -(phase @ jumps) / (TWO_PI * n**2)
    neg = -(np.conj(phase) @ jumps) / (TWO_PI * n**2)
    c0 = np.sum(dt * (v + np.roll(v, -1)) / 2) / TWO_PI
    return c0, pos, neg


def _as_complex_vertices(vertices) -> np.ndarray:
    out = []
    for v in vertices:
        if isinstance(v, (complex, float, int)):
            out.append(complex(v))
        else:
            x, y = v
            out.append(complex(float(x), float(y)))
    return np.array(out, dtype=complex)


def smooth_polygon(vertices, sigma: float, truncation_tol: float = 1e-8,
                   max_degree: int = 4096, check: bool = True) -> ClosedCurve:
    """Gaussian-mollified polygon with the polygon's exact enclosed area.

    The polygon is parametrized by arclength over ``[0, 2*pi)``, convolved with
    a periodic Gaussian of width ``sigma`` (radians of parameter), truncated
    where the remaining coefficients sum below ``truncation_tol`` relative to
    the polygon size, and scaled about the polygon centroid to restore area.
    """
    v = _as_complex_vertices(vertices)
    if len(v) < 3:
        raise InvalidInputError("a polygon needs at least 3 vertices")
    if not sigma > 0:
        raise InvalidInputError("smoothing width must be positive")
    poly = Polygon(np.column_stack([v.real, v.imag]))
    if not poly.is_valid or not LinearRing(poly.exterior.coords).is_simple or poly.area <= 0:
        raise InvalidInputError("vertices do not form a simple polygon")
    if np.any(np.abs(np.roll(v, -1) - v) == 0):
        raise InvalidInputError("repeated consecutive vertex")

    c0, pos, neg = _polygon_fourier(v, max_degree)
    n = np.arange(1, max_degree + 1)
    damp = np.exp(-0.5 * (n * sigma) ** 2)
    pos, neg = pos * damp, neg * damp
    size = np.max(np.abs(v - v.mean()))
    tail = np.cumsum((np.abs(pos) + np.abs(neg))[::-1])[::-1]
    ok = np.nonzero(tail < truncation_tol * size)[0]
    if len(ok) == 0:
        raise InvalidInputError("smoothing too small to truncate within max_degree")
    N = max(int(ok[0]), 1)
    c = np.concatenate([neg[:N][::-1], [c0], pos[:N]])

    raw = ClosedCurve(c)
    signed = fourier_area(raw)
    if signed == 0:
        raise SmoothingTooLargeError("smoothing collapsed the polygon")
    if signed < 0:
        c = c[::-1].copy()
    k = math.sqrt(poly.area / abs(signed))
    cx = complex(poly.centroid.x, poly.centroid.y)
    c = c * k
    c[N] = cx + k * (c0 - cx)
    try:
        return _from_dense(c, check=check, kind="smoothed-polygon",
                           vertices=tuple(complex(z) for z in v), smoothing=float(sigma),
                           area_scale=k)
    except EmbeddingError as exc:
        raise SmoothingTooLargeError(f"embeddedness lost after smoothing: {exc}") from exc


def hausdorff_to_polygon(curve: ClosedCurve, vertices, M: int = 8192) -> float:
    """Hausdorff distance between densely sampled curve and polygon boundary."""
    v = _as_complex_vertices(vertices)
    pts = sample(curve, M)
    t = np.linspace(0, 1, 200, endpoint=False)
    seg = (v[:, None] + np.outer(np.roll(v, -1) - v, t)).ravel()

    def one_sided(a, b):
        worst = 0.0
        for chunk in np.array_split(a, max(1, len(a) // 512)):
            worst = max(worst, float(np.abs(chunk[:, None] - b[None, :]).min(axis=1).max()))
        return worst

    return max(one_sided(pts, seg), one_sided(seg, pts))


# -- perturbation ------------------------------------------------------------

def perturb(curve: ClosedCurve, magnitude: float, seed: int, max_mode: int = 6,
            retries: int = 10) -> ClosedCurve:
    """Add seeded random coefficients of modulus at most ``magnitude``.

    Modes ``1 <= |n| <= max_mode`` are perturbed.  If the result fails the
    embedding check the draw is repeated with the next sub-seed.
    """
    if magnitude < 0:
        raise InvalidInputError("magnitude must be non-negative")
    N = max(curve.degree, max_mode)
    base = np.zeros(2 * N + 1, dtype=complex)
    base[N - curve.degree:N + curve.degree + 1] = curve.coeffs
    modes = np.array([n for n in range(-max_mode, max_mode + 1) if n != 0])
    last = None
    for attempt in range(retries):
        rng = np.random.default_rng([seed, attempt])
        radius = magnitude * rng.random(len(modes))
        phase = rng.uniform(0, TWO_PI, len(modes))
        c = base.copy()
        c[modes + N] += radius * np.exp(1j * phase)
        try:
            return _from_dense(c, check=True, kind="fourier")
        except EmbeddingError as exc:
            last = exc
    raise RetryExhaustedError(f"no embedded perturbation after {retries} draws: {last}")


# -- file format -------------------------------------------------------------

def curve_from_dict(data: dict, max_mode: int = MAX_FILE_MODE) -> ClosedCurve:
    """Parse the JSON curve description (``fourier`` or ``polygon`` kind)."""
    if not isinstance(data, dict) or "kind" not in data:
        raise CurveParseError("curve description must be an object with a 'kind'")
    kind = data["kind"]
    try:
        if kind == "fourier":
            items = []
            for row in data["coefficients"]:
                n, re, im = row
                if int(n) != n:
                    raise CurveParseError(f"mode {n} is not an integer")
                if abs(int(n)) > max_mode:
                    raise CurveParseError(f"mode {n} exceeds |n| <= {max_mode}")
                items.append((int(n), complex(float(re), float(im))))
            return fourier_curve(items)
        if kind == "polygon":
            verts = [(float(x), float(y)) for x, y in data["vertices"]]
            return smooth_polygon(verts, float(data["smoothing"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (CurveParseError, InvalidInputError)):
            raise
        raise CurveParseError(f"malformed curve description: {exc}") from exc
    raise CurveParseError(f"unknown curve kind {kind!r}")


def load_curve(path, max_mode: int = MAX_FILE_MODE) -> ClosedCurve:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CurveParseError(f"cannot read curve file {path}: {exc}") from exc
    return curve_from_dict(data, max_mode=max_mode)


def curve_to_dict(curve: ClosedCurve) -> dict:
    if curve.kind == "smoothed-polygon" and curve.vertices is not None:
        return {"kind": "polygon",
                "vertices": [[z.real, z.imag] for z in curve.vertices],
                "smoothing": curve.smoothing}
    rows = [[int(n), float(c.real), float(c.imag)]
            for n, c in zip(curve.modes, curve.coeffs) if c != 0]
    return {"kind": "fourier", "coefficients": rows}


def unit_square() -> list[tuple[float, float]]:
    return [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]

