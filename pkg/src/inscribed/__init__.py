"""Inscribed rectangles, binormals and angle spectra of smooth Jordan curves."""

from .binormal import Binormal, find_binormals
from .curve import (
    ClosedCurve,
    CurveStats,
    circle,
    ellipse,
    evaluate,
    fourier_curve,
    load_curve,
    perturb,
    smooth_polygon,
    stats,
    unit_square,
)
from .errors import InscribedError
from .intervals import IntervalSet
from .rectgeom import Inscription, residual, residual_jacobian
from .spectral import (
    angle_spectrum,
    check_theorems,
    empirical_spectral,
    integrate_action,
    verify_axioms,
)
from .trace import RectangleComplex, assemble, find_rectangles, trace_branch

__version__ = "0.1.0"

__all__ = [
    "Binormal", "ClosedCurve", "CurveStats", "Inscription", "InscribedError", "IntervalSet",
    "RectangleComplex", "angle_spectrum", "assemble", "check_theorems", "circle", "ellipse",
    "empirical_spectral", "evaluate", "find_binormals", "find_rectangles", "fourier_curve",
    "integrate_action", "load_curve", "perturb", "residual", "residual_jacobian",
    "smooth_polygon", "stats", "trace_branch", "unit_square", "verify_axioms",
]
