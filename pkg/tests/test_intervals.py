from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inscribed.intervals import IntervalSet, overlap_lower_bound, overlap_sets
from inscribed.spectral import infinitely_often

ends = st.fractions(min_value=0, max_value=3, max_denominator=50)
pairs = st.tuples(ends, ends).map(lambda p: (min(p), max(p)))
isets = st.lists(pairs, max_size=6).map(IntervalSet)


def test_normalizes():
    s = IntervalSet([(3, 4), (0, 1), (0.5, 2), (5, 5)])
    assert s.intervals == ((0, 2), (3, 4))
    assert s.measure == 3


def test_set_operations_small():
    a = IntervalSet([(0, 2), (3, 5)])
    b = IntervalSet([(1, 4)])
    assert (a | b).intervals == ((0, 5),)
    assert (a & b).intervals == ((1, 2), (3, 4))
    assert (a - b).intervals == ((0, 1), (4, 5))
    assert a.complement(0, 6).intervals == ((2, 3), (5, 6))
    assert a.covers(0.5, 1.5) and not a.covers(1.5, 3.5)
    assert 2.5 not in a and 4 in a


@settings(max_examples=300, deadline=None)
@given(isets, isets)
def test_inclusion_exclusion_exact(a, b):
    assert (a | b).measure + (a & b).measure == a.measure + b.measure
    assert (a - b).measure == a.measure - (a & b).measure
    assert all(isinstance(x, (Fr, int)) for iv in (a | b) for x in iv)


@settings(max_examples=200, deadline=None)
@given(isets)
def test_disjoint_sorted(a):
    iv = a.intervals
    assert all(lo < hi for lo, hi in iv)
    assert all(iv[i][1] < iv[i + 1][0] for i in range(len(iv) - 1))
    assert a.measure == sum(hi - lo for lo, hi in iv)


@settings(max_examples=200, deadline=None)
@given(st.lists(isets, min_size=1, max_size=7))
def test_tk_nesting_and_bound(sets):
    total = Fr(3)
    prev = None
    for k in range(1, len(sets) + 1):
        T = overlap_sets(sets, k)
        if prev is not None:
            assert (T - prev).measure == 0
        prev = T
        assert T.measure >= overlap_lower_bound(sets, k, total)


@settings(max_examples=200, deadline=None)
@given(st.lists(isets, min_size=1, max_size=6), st.integers(1, 6))
def test_tk_matches_pointwise_count(sets, k):
    T = overlap_sets(sets, k)
    cuts = sorted({x for s in sets for iv in s for x in iv} | {Fr(0), Fr(3)})
    for lo, hi in zip(cuts, cuts[1:]):
        mid = (lo + hi) / 2
        count = sum(any(a < mid < b for a, b in s) for s in sets)
        assert (mid in T) == (count >= k)


def test_lemma_sequence_example():
    # S_n = (0, 1/2 + (-1)^n / n), n = 2..9: measures oscillate around 1/2
    sets = [IntervalSet([(Fr(0), Fr(1, 2) + Fr((-1) ** n, n))]) for n in range(2, 10)]
    T8 = infinitely_often(sets, 8)
    # every set must contain the point: the smallest set is n = 3, (0, 1/6)
    assert T8.intervals == ((0, Fr(1, 6)),)
    assert T8.measure == Fr(1, 6)
    # odd tail n = 5, 7, 9: smallest is (0, 1/2 - 1/5)
    odd_tail = [sets[n - 2] for n in (5, 7, 9)]
    assert infinitely_often(odd_tail, 3).measure == Fr(3, 10)
    # sets with even index all contain (0, 1/2): every k up to their count keeps it
    assert infinitely_often(sets, 4).covers(0, Fr(1, 2))
    # the finite bound with mu(X) = 1
    for k in range(1, 9):
        assert infinitely_often(sets, k).measure >= overlap_lower_bound(sets, k, 1)
    # the lemma's liminf: tail minima increase toward 1/2, so T_k for the
    # tail starting at m covers at least min measure of that tail
    for m in range(0, 8):
        tail = sets[m:]
        assert infinitely_often(tail, len(tail)).measure == min(s.measure for s in tail)


def test_identical_and_disjoint():
    same = [IntervalSet([(0, 1)])] * 5
    for k in range(1, 6):
        assert infinitely_often(same, k) == IntervalSet([(0, 1)])
    apart = [IntervalSet([(i, i + 1)]) for i in range(0, 10, 2)]
    assert not infinitely_often(apart, 2)


def test_k_bounds():
    sets = [IntervalSet([(0, 1)])] * 3
    assert not infinitely_often(sets, 4)
    with pytest.raises(ValueError):
        infinitely_often(sets, 0)
