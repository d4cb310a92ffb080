"""Static SVG figure: the curve, rectangles at one angle, binormal chords."""

from __future__ import annotations

import numpy as np

from .curve import ClosedCurve, evaluate, sample

SIZE = 800
MARGIN = 0.05
# fixed ramp from H = 0 (dark blue) to H = R^2 (yellow)
RAMP = ((0.0, (68, 1, 84)), (0.25, (59, 82, 139)), (0.5, (33, 145, 140)),
        (0.75, (94, 201, 98)), (1.0, (253, 231, 37)))


def ramp_color(u: float) -> str:
    u = min(max(float(u), 0.0), 1.0)
    for (u0, c0), (u1, c1) in zip(RAMP, RAMP[1:]):
        if u <= u1:
            lam = (u - u0) / (u1 - u0)
            rgb = [round(a + lam * (b - a)) for a, b in zip(c0, c1)]
            return "#{:02x}{:02x}{:02x}".format(*rgb)
    return "#{:02x}{:02x}{:02x}".format(*RAMP[-1][1])


class _Frame:
    """Map the curve's bounding box into the viewport, y pointing up."""

    def __init__(self, pts: np.ndarray):
        lo_x, hi_x = pts.real.min(), pts.real.max()
        lo_y, hi_y = pts.imag.min(), pts.imag.max()
        span = max(hi_x - lo_x, hi_y - lo_y, 1e-12)
        self.scale = SIZE * (1 - 2 * MARGIN) / span
        self.cx, self.cy = (lo_x + hi_x) / 2, (lo_y + hi_y) / 2

    def __call__(self, z: complex) -> str:
        x = SIZE / 2 + (z.real - self.cx) * self.scale
        y = SIZE / 2 - (z.imag - self.cy) * self.scale
        return f"{x:.3f},{y:.3f}"


def render_svg(curve: ClosedCurve, rectangles, binormals, hmax: float, title: str = "") -> str:
    """SVG text with rectangles colored by ``H / hmax`` on :data:`RAMP`."""
    pts = sample(curve, 1024)
    frame = _Frame(pts)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
           f'viewBox="0 0 {SIZE} {SIZE}">',
           f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>']
    if title:
        out.append(f'<title>{title}</title>')
    path = " ".join(frame(z) for z in pts)
    out.append(f'<polygon points="{path}" fill="none" stroke="black" stroke-width="2"/>')
    for b in binormals:
        z, w = evaluate(curve, b.params[0]), evaluate(curve, b.params[1])
        a, c = frame(z).split(","), frame(w).split(",")
        out.append(f'<line x1="{a[0]}" y1="{a[1]}" x2="{c[0]}" y2="{c[1]}" stroke="#999999" '
                   f'stroke-width="1" stroke-dasharray="4 3"/>')
    for r in rectangles:
        z, zp, w, wp = r.vertices
        color = ramp_color(r.hamiltonian / hmax if hmax > 0 else 0.0)
        corners = " ".join(frame(v) for v in (z, zp, w, wp))
        out.append(f'<polygon points="{corners}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
