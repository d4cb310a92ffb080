"""
Rectangles inscribed in an ellipse
==================================

The ellipse 2 cos s + i sin s has one family of inscribed rectangles up to
relabelling: the axis-aligned ones.  This script finds them, follows the
family from a thin rectangle on the major axis to one on the minor axis, and
integrates H along it.
"""

import math

from inscribed import assemble, ellipse, stats
from inscribed import spectral as sp
from inscribed.binormal import find_binormals

curve = ellipse(2.0, 1.0)
st = stats(curve)
print(f"area {st.area:.6f}  radius {st.radius:.6f}  B = area / radius^2 = {st.ratio:.6f}")

# Binormal chords: the two axes, each recorded in both orders.
for b in find_binormals(curve, 64):
    print(f"  binormal s=({b.params[0]:.4f}, {b.params[1]:.4f})  H={b.hvalue:.4f}  "
          f"det={b.hessian_det:+.4f}  index={b.morse_index}")

# Trace every rectangle family.  The four branches are one geometric family
# seen under the two relabelling symmetries.
cx = assemble(curve)
print(f"{len(cx.branches)} branches, {cx.geometric_count} geometric, "
      f"consistency ok: {cx.consistency['ok']}")
branch = next(b for b in cx.branches if b.orbit == "id")
for e in branch.endpoints:
    print(f"  end {e.kind:16s} H={e.hvalue:.6f}")

# dA/dtheta = H.  At the far end the action equals the enclosed area.
prof = sp.integrate_action(branch)
print(f"action at pi: {prof.action[-1]:.8f}   area: {st.area:.8f}")

# Sampled spectral function and its value at a right angle.
ell = sp.empirical_spectral(cx, st)
print(f"l(pi/2) = {ell.at(math.pi / 2):.6f}   4 atan 2 = {4 * math.atan(2):.6f}")
print("axioms:", {k: v["pass"] for k, v in sp.verify_axioms(ell, st).items()
                  if isinstance(v, dict)})

# Angle spectrum with and without a size threshold.
for eps in (0.0, 2.5):
    S = sp.angle_spectrum(cx, eps)
    print(f"eps={eps}: spectrum {S.to_list()}  measure {float(S.measure):.5f}")
