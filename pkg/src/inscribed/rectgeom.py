"""Midpoint rotation, the chord Hamiltonian, and the inscription residual.

Conventions: a clockwise rotation through ``theta`` is multiplication by
``exp(-1j * theta)``.  An inscription is ``x = (s1, s2, s3, s4, theta)`` with
``(f(s2), f(s4)) = rho_theta(f(s1), f(s3))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curve import TWO_PI, ClosedCurve, evaluate, jet


@dataclass(frozen=True)
class DiagonalPair:
    z: complex
    w: complex


def rotate_about_midpoint(pair: DiagonalPair, theta: float) -> DiagonalPair:
    """Turn segment zw clockwise by ``theta`` about its midpoint."""
    z, w = complex(pair.z), complex(pair.w)
    m = (z + w) / 2
    d = (z - w) / 2 * complex(math.cos(theta), -math.sin(theta))
    return DiagonalPair(m + d, m - d)


def rho(z, w, theta):
    """Array version of :func:`rotate_about_midpoint`; returns ``(z', w')``."""
    m = (z + w) / 2
    d = (z - w) / 2 * np.exp(-1j * np.asarray(theta))
    return m + d, m - d


def hamiltonian(pair: DiagonalPair) -> float:
    return 0.25 * abs(complex(pair.z) - complex(pair.w)) ** 2


def residual(curve: ClosedCurve, params, theta) -> np.ndarray:
    """Real 4-vector ``(f(s2), f(s4)) - rho_theta(f(s1), f(s3))``.

    Broadcasts: ``params`` has shape ``(..., 4)`` and ``theta`` shape ``(...)``.
    """
    p = np.asarray(params, dtype=float)
    f = evaluate(curve, p)
    zp, wp = rho(f[..., 0], f[..., 2], theta)
    r1 = f[..., 1] - zp
    r2 = f[..., 3] - wp
    return np.stack([r1.real, r1.imag, r2.real, r2.imag], axis=-1)


def residual_jacobian(curve: ClosedCurve, params, theta) -> np.ndarray:
    """Analytic Jacobian of :func:`residual` in ``(s1, s2, s3, s4, theta)``.

    Shape ``(..., 4, 5)``.
    """
    return residual_and_jacobian(curve, params, theta)[1]


def residual_and_jacobian(curve: ClosedCurve, params, theta):
    """``(residual, jacobian)`` from a single curve evaluation."""
    p = np.asarray(params, dtype=float)
    theta = np.asarray(theta, dtype=float)
    f, df = jet(curve, p, (0, 1))
    e = np.exp(-1j * theta)
    d = (f[..., 0] - f[..., 2]) / 2
    m = (f[..., 0] + f[..., 2]) / 2
    r1 = f[..., 1] - (m + d * e)
    r2 = f[..., 3] - (m - d * e)
    F = np.stack([r1.real, r1.imag, r2.real, r2.imag], axis=-1)
    cols = [
        [-(0.5 + 0.5 * e) * df[..., 0], -(0.5 - 0.5 * e) * df[..., 0]],
        [df[..., 1], np.zeros_like(e)],
        [-(0.5 - 0.5 * e) * df[..., 2], -(0.5 + 0.5 * e) * df[..., 2]],
        [np.zeros_like(e), df[..., 3]],
        [1j * e * d, -1j * e * d],
    ]
    J = np.empty(p.shape[:-1] + (4, 5))
    for j, (a, b) in enumerate(cols):
        J[..., 0, j] = np.real(a)
        J[..., 1, j] = np.imag(a)
        J[..., 2, j] = np.real(b)
        J[..., 3, j] = np.imag(b)
    return F, J


# -- the two label symmetries of the solution set ----------------------------

def sigma(x) -> np.ndarray:
    """Swap the endpoints of the first diagonal: ``(s3, s4, s1, s2, theta)``."""
    x = np.asarray(x, dtype=float)
    return x[..., [2, 3, 0, 1, 4]]


def iota(x) -> np.ndarray:
    """Relabel starting at z': ``(s2, s3, s4, s1, pi - theta)``."""
    x = np.asarray(x, dtype=float)
    y = x[..., [1, 2, 3, 0, 4]].copy()
    y[..., 4] = math.pi - y[..., 4]
    return y


def wrap(s):
    return np.mod(s, TWO_PI)


def wrapped_distance(a, b) -> float:
    """Max-norm distance on ``(s1..s4 mod 2*pi, theta)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ds = np.abs(np.mod(a[..., :4] - b[..., :4] + math.pi, TWO_PI) - math.pi)
    dt = np.abs(a[..., 4] - b[..., 4])
    return np.maximum(ds.max(axis=-1), dt)


def canonical(x) -> np.ndarray:
    """Lexicographically smallest wrapped representative of ``{x, sigma(x)}``."""
    x = np.asarray(x, dtype=float)
    a = x.copy()
    a[:4] = wrap(a[:4])
    b = sigma(a)
    return a if tuple(np.round(a[:4], 9)) <= tuple(np.round(b[:4], 9)) else b


@dataclass(frozen=True)
class Inscription:
    """A solution ``(s1, s2, s3, s4, theta)`` with derived geometry."""

    params: tuple
    theta: float
    vertices: tuple
    residual_norm: float

    @property
    def x(self) -> np.ndarray:
        return np.array(list(self.params) + [self.theta])

    @property
    def hamiltonian(self) -> float:
        z, _, w, _ = self.vertices
        return 0.25 * abs(z - w) ** 2

    @property
    def size(self) -> float:
        v = np.array(self.vertices)
        return float(np.abs(v[:, None] - v[None, :]).max())


def make_inscription(curve: ClosedCurve, x) -> Inscription:
    x = np.asarray(x, dtype=float)
    verts = evaluate(curve, x[:4])
    r = residual(curve, x[:4], x[4])
    return Inscription(params=tuple(float(v) for v in x[:4]), theta=float(x[4]),
                       vertices=tuple(complex(v) for v in verts),
                       residual_norm=float(np.linalg.norm(r)))
