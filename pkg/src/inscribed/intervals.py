"""Finite unions of intervals with exact measure arithmetic.

Endpoints may be floats or :class:`fractions.Fraction`; with fractions every
operation, including :meth:`IntervalSet.measure`, is exact.  Open versus
closed ends are not tracked (everything here is up to measure zero).
"""

from __future__ import annotations

from typing import Iterable, Sequence


def _merge(pairs):
    out = []
    for lo, hi in sorted(p for p in pairs if p[0] < p[1]):
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1][1] = hi
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


class IntervalSet:
    """Sorted, pairwise-disjoint union of ``(lo, hi)`` intervals."""

    __slots__ = ("_iv",)

    def __init__(self, intervals: Iterable[Sequence] = ()):
        self._iv = _merge((lo, hi) for lo, hi in intervals)

    @property
    def intervals(self) -> tuple:
        return self._iv

    @property
    def measure(self):
        return sum((hi - lo for lo, hi in self._iv), 0)

    def __iter__(self):
        return iter(self._iv)

    def __len__(self):
        return len(self._iv)

    def __bool__(self):
        return bool(self._iv)

    def __eq__(self, other):
        return isinstance(other, IntervalSet) and self._iv == other._iv

    def __hash__(self):
        return hash(self._iv)

    def __repr__(self):
        return f"IntervalSet({list(self._iv)!r})"

    def __contains__(self, x) -> bool:
        return any(lo <= x <= hi for lo, hi in self._iv)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self._iv + other._iv)

    __or__ = union

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        out, i, j = [], 0, 0
        a, b = self._iv, other._iv
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet(out)

    __and__ = intersection

    def complement(self, lo, hi) -> "IntervalSet":
        out, cur = [], lo
        for a, b in self._iv:
            if b <= lo or a >= hi:
                continue
            if a > cur:
                out.append((cur, a))
            cur = max(cur, b)
        if cur < hi:
            out.append((cur, hi))
        return IntervalSet(out)

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        if not self._iv:
            return IntervalSet()
        lo, hi = self._iv[0][0], self._iv[-1][1]
        return self & other.complement(lo, hi)

    __sub__ = difference

    def clip(self, lo, hi) -> "IntervalSet":
        return self & IntervalSet([(lo, hi)])

    def covers(self, lo, hi) -> bool:
        return not IntervalSet([(lo, hi)]) - self

    def to_list(self) -> list:
        return [[lo, hi] for lo, hi in self._iv]


def overlap_sets(sets: Sequence[IntervalSet], k: int) -> IntervalSet:
    """Points lying in at least ``k`` of ``sets`` (exact sweep over endpoints)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > len(sets):
        return IntervalSet()
    events = {}
    for s in sets:
        for lo, hi in s:
            events[lo] = events.get(lo, 0) + 1
            events[hi] = events.get(hi, 0) - 1
    out, count, start = [], 0, None
    for x in sorted(events):
        count += events[x]
        if count >= k and start is None:
            start = x
        elif count < k and start is not None:
            out.append((start, x))
            start = None
    return IntervalSet(out)


def overlap_lower_bound(sets: Sequence[IntervalSet], k: int, total):
    """Lower bound on the measure of :func:`overlap_sets` for a finite family.

    Points outside ``T_k`` lie in at most ``k - 1`` sets, so
    ``sum mu(S_n) <= (L - k + 1) mu(T_k) + (k - 1) mu(X)``.
    """
    L = len(sets)
    if k > L:
        return 0
    return (sum((s.measure for s in sets), 0) - (k - 1) * total) / (L - k + 1)
