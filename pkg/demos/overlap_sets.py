"""
Points lying in many sets
=========================

Given sets S_1, S_2, ... of measure at least m inside a space of finite
measure, the points lying in infinitely many of them also have measure at
least m.  With finitely many interval sets we can count overlaps exactly.
"""

from fractions import Fraction as F

from inscribed.intervals import IntervalSet, overlap_lower_bound
from inscribed.spectral import infinitely_often


def show(s):
    return " u ".join(f"({lo}, {hi})" for lo, hi in s) or "empty"


# Intervals alternately longer and shorter than 1/2.
sets = [IntervalSet([(F(0), F(1, 2) + F((-1) ** n, n))]) for n in range(2, 12)]
for s in sets[:4]:
    print(show(s), s.measure)

# T_k: points in at least k of the sets.  The family shrinks as k grows.
for k in range(1, len(sets) + 1):
    T = infinitely_often(sets, k)
    print(f"k={k:2d}  T_k={show(T)}  measure {T.measure}  "
          f"bound {overlap_lower_bound(sets, k, 1)}")

# A periodic sequence: the points hit infinitely often are those in any one
# period, and T_(number of periods) of a truncation finds exactly them.
period = [IntervalSet([(F(0), F(1, 2))]), IntervalSet([(F(1, 4), F(3, 4))])]
seq = period * 5
print("periodic:", show(infinitely_often(seq, 5)))
