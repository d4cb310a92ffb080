import json
import math

import numpy as np
import pytest

from inscribed.curve import (
    check_embedding,
    circle,
    curve_from_dict,
    curve_to_dict,
    ellipse,
    enclosed_area,
    evaluate,
    fourier_area,
    fourier_curve,
    hausdorff_to_polygon,
    load_curve,
    perturb,
    smooth_polygon,
    stats,
    unit_square,
)
from inscribed.binormal import find_binormals
from inscribed.errors import (
    CurveParseError,
    EmbeddingError,
    InvalidInputError,
    SmoothingTooLargeError,
    UnsupportedOrderError,
)

from conftest import FIXTURES


def test_eval_circle_value_and_derivative(circ):
    assert evaluate(circ, 0.0) == pytest.approx(1 + 0j, abs=1e-15)
    assert evaluate(circ, math.pi / 2, 1) == pytest.approx(-1 + 0j, abs=1e-15)


def test_eval_ellipse_second_derivative(ell):
    # f = 2 cos s + i sin s, so f'' = -f
    want = -math.sqrt(2) - 1j * math.sqrt(2) / 2
    assert evaluate(ell, math.pi / 4, 2) == pytest.approx(want, abs=1e-14)
    assert ell.eval(math.pi / 4, 2) == pytest.approx(want, abs=1e-14)


def test_eval_rejects_third_order(ell):
    with pytest.raises(UnsupportedOrderError):
        evaluate(ell, 0.1, 3)


def test_eval_matches_direct_sum():
    rng = np.random.default_rng(3)
    coeffs = {n: complex(*rng.normal(size=2)) * 0.02 / (1 + abs(n)) for n in range(-40, 41)}
    coeffs[1] = 1.0
    c = fourier_curve(coeffs)
    s = rng.uniform(-10, 10, 200)
    for order in range(3):
        direct = sum(v * (1j * n) ** order * np.exp(1j * n * s) for n, v in coeffs.items())
        assert np.abs(evaluate(c, s, order) - direct).max() < 1e-12


@pytest.mark.parametrize("make", [lambda: ellipse(2, 1), lambda: perturb(circle(), 1e-3, 7),
                                  lambda: smooth_polygon(unit_square(), 0.05)])
def test_derivatives_match_finite_differences(make):
    c = make()
    s = np.linspace(0.05, 6.2, 37)
    h = 1e-5
    for order in (1, 2):
        fd = (evaluate(c, s + h, order - 1) - evaluate(c, s - h, order - 1)) / (2 * h)
        exact = evaluate(c, s, order)
        assert np.abs(fd - exact).max() / np.abs(exact).max() < 1e-6
    assert np.abs(evaluate(c, s, 1)).min() > 0


def test_periodicity(ell):
    s = np.linspace(0, 1, 7)
    assert np.abs(evaluate(ell, s + 2 * math.pi) - evaluate(ell, s)).max() < 1e-14


def test_stats_circle(circ):
    st = stats(circ)
    assert st.area == pytest.approx(math.pi, abs=1e-12)
    assert st.radius == pytest.approx(1.0, abs=1e-12)
    assert st.ratio == pytest.approx(math.pi, abs=1e-11)


@pytest.mark.parametrize("r,center", [(0.3, 0j), (2.5, 1 - 2j), (7.0, 3j)])
def test_stats_scaled_circles(r, center):
    st = stats(circle(r, center))
    assert abs(st.area - math.pi * r**2) <= 1e-9
    assert abs(st.radius - r) <= 1e-9


def test_stats_ellipse(ell):
    st = stats(ell)
    assert st.area == pytest.approx(2 * math.pi, abs=1e-12)
    assert st.radius == pytest.approx(2.0, abs=1e-12)
    assert st.ratio == pytest.approx(math.pi / 2, abs=1e-12)


def test_area_quadrature_matches_closed_form(pcircle, square):
    for c in (pcircle, square):
        assert enclosed_area(c) == pytest.approx(fourier_area(c), abs=1e-12)


def test_clockwise_input_is_flipped():
    cw = fourier_curve({-1: 2.0})
    assert cw.orientation == "cw"
    st = stats(cw)
    assert st.area == pytest.approx(4 * math.pi, abs=1e-12)
    assert st.orientation_sign == -1
    pts = evaluate(cw, np.linspace(0, 2 * math.pi, 64))
    signed = 0.5 * np.sum(pts.real * np.roll(pts.imag, -1) - pts.imag * np.roll(pts.real, -1))
    assert signed > 0


def test_smoothed_square_area_and_distance(square):
    assert stats(square).area == pytest.approx(1.0, abs=1e-9)
    assert hausdorff_to_polygon(square, unit_square()) <= 0.15


@pytest.mark.parametrize("verts", [
    [(0, 0), (2, 0), (2, 1), (1, 0.4), (0, 1)],
    [(0, 0), (3, 0), (1.5, 2)],
    [(1, 0), (0.3, 0.95), (-0.8, 0.6), (-0.8, -0.6), (0.3, -0.95)],
])
def test_smooth_polygon_equal_area(verts):
    c = smooth_polygon(verts, 0.04)
    x, y = np.array(verts, dtype=float).T
    shoelace = 0.5 * abs(np.sum(x * np.roll(y, -1) - y * np.roll(x, -1)))
    assert abs(stats(c).area - shoelace) <= 1e-9


def test_smoothing_approaches_polygon():
    d = [hausdorff_to_polygon(smooth_polygon(unit_square(), s), unit_square())
         for s in (0.08, 0.04, 0.02)]
    assert d[0] > d[1] > d[2]


def test_smooth_polygon_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        smooth_polygon([(0, 0), (1, 0)], 0.05)
    with pytest.raises(InvalidInputError):
        smooth_polygon([(0, 0), (1, 1), (1, 0), (0, 1)], 0.05)   # bow tie
    with pytest.raises(InvalidInputError):
        smooth_polygon(unit_square(), 0.0)


def test_lost_embedding_reported_as_smoothing_error(monkeypatch):
    # No natural polygon in our search loses embeddedness under arclength
    # smoothing, so force the sampled check to fail and test the error mapping.
    import inscribed.curve as cm

    def failing(curve, M=cm.EMBED_GRID):
        raise EmbeddingError("forced")

    monkeypatch.setattr(cm, "check_embedding", failing)
    with pytest.raises(SmoothingTooLargeError):
        smooth_polygon(unit_square(), 0.05)


def test_embedding_check_catches_self_intersection():
    # limacon with an inner loop
    with pytest.raises(EmbeddingError):
        fourier_curve({1: 1.0, 2: 1.2})
    check_embedding(circle())


def test_bieberbach_on_corpus(ell, circ, pcircle, square):
    for c in (ell, circ, pcircle, square, perturb(ellipse(3, 1), 1e-2, 1)):
        st = stats(c)
        assert 0 < st.ratio <= math.pi + 1e-9
        assert st.radius**2 >= st.area / math.pi - 1e-9


def test_perturb_zero_and_determinism(ell):
    same = perturb(ell, 0.0, 11)
    assert np.array_equal(same.coefficient(1), ell.coefficient(1))
    assert np.abs(evaluate(same, np.linspace(0, 6, 50)) - evaluate(ell, np.linspace(0, 6, 50))).max() == 0
    a, b = perturb(ell, 1e-3, 5), perturb(ell, 1e-3, 5)
    assert np.array_equal(a.coeffs, b.coeffs)
    assert not np.array_equal(a.coeffs, perturb(ell, 1e-3, 6).coeffs)


def test_perturb_size_bound(ell):
    p = perturb(ell, 1e-3, 9)
    diff = p.coeffs - np.pad(ell.coeffs, (p.degree - ell.degree,))
    assert np.abs(diff).max() <= 1e-3


def test_perturbed_circle_is_morse(pcircle):
    found = find_binormals(pcircle, 64)
    assert found
    assert all(b.nondegenerate for b in found)
    assert all(abs(b.hessian_det) > 1e-9 for b in found)


def test_curve_file_roundtrip(tmp_path, ell):
    path = tmp_path / "e.json"
    path.write_text(json.dumps(curve_to_dict(ell)))
    back = load_curve(path)
    assert np.array_equal(back.coeffs, ell.coeffs)
    sq = load_curve(FIXTURES / "square.json")
    assert sq.kind == "smoothed-polygon"
    assert stats(sq).area == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("bad", [
    {},
    {"kind": "spline"},
    {"kind": "fourier"},
    {"kind": "fourier", "coefficients": [[1.5, 1, 0]]},
    {"kind": "fourier", "coefficients": [[200, 1, 0], [1, 1, 0]]},
    {"kind": "polygon", "vertices": [[0, 0], [1]], "smoothing": 0.1},
])
def test_curve_file_errors(bad):
    with pytest.raises(CurveParseError):
        curve_from_dict(bad)


def test_mode_limit_configurable():
    c = curve_from_dict({"kind": "fourier", "coefficients": [[1, 1, 0], [200, 1e-9, 0]]},
                        max_mode=256)
    assert c.degree == 200
