import math
from pathlib import Path

import numpy as np
import pytest

from inscribed import binormal as bn
from inscribed import trace as tr
from inscribed.curve import circle, ellipse, perturb, smooth_polygon, unit_square

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def ellipse_family(t, a=2.0, b=1.0):
    """Closed form of the axis-aligned rectangles of the ellipse ``a cos s + i b sin s``.

    Returns ``(params, theta, H)`` for the rectangle with a vertex at
    parameter ``t`` in ``(0, pi/2)``.
    """
    params = np.array([t, -t, math.pi + t, math.pi - t])
    theta = 2 * math.atan((b / a) * math.tan(t))
    H = a**2 * math.cos(t) ** 2 + b**2 * math.sin(t) ** 2
    return params, theta, H


def circle_family(theta):
    return (0.0, -theta, math.pi, math.pi - theta)


def circle_complex(n=400):
    """The analytic diameter family of the unit circle, Newton-polished."""
    c = circle()
    binormals = bn.find_binormals(c, 64, warn=False)
    thetas = np.linspace(tr.EPS0, math.pi - tr.EPS0, n)
    br = tr.branch_from_family(c, circle_family, thetas, binormals)
    br.id = br.geometric_id = 0
    return tr.RectangleComplex(curve=c, branches=[br], binormals=binormals,
                               consistency=tr.consistency_report([br], binormals))


@pytest.fixture(scope="session")
def ell():
    return ellipse(2.0, 1.0)


@pytest.fixture(scope="session")
def circ():
    return circle()


@pytest.fixture(scope="session")
def pcircle():
    return perturb(circle(), 1e-3, 7)


@pytest.fixture(scope="session")
def square():
    return smooth_polygon(unit_square(), 0.05)


@pytest.fixture(scope="session")
def ell_complex(ell):
    return tr.assemble(ell)


@pytest.fixture(scope="session")
def pcircle_complex(pcircle):
    return tr.assemble(pcircle)


@pytest.fixture(scope="session")
def circ_complex():
    return circle_complex()
