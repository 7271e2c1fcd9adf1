from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaussmaps.errors import PreconditionViolated, QOutOfRange
from gaussmaps.tuples import check_tuple, enumerate_admissible_tuples
from oracles import brute_force_tuples


def test_all_two_nine_entries():
    c = check_tuple([2] * 9, 2)
    assert c.gamma == Fraction(9, 2) and c.admissible


def test_five_twos_not_admissible():
    assert not check_tuple([2] * 5, 2).admissible


def test_all_two_seven_entries_m1():
    assert check_tuple([2] * 7, 1).admissible


@pytest.mark.parametrize("m, q, count", [(1, 5, 4), (1, 6, 1), (1, 7, 1), (2, 6, 24), (2, 7, 4), (2, 8, 1), (2, 9, 1)])
def test_counts(m, q, count):
    assert len(enumerate_admissible_tuples(m, q).tuples) == count


def test_exhaustive_versus_cap():
    full = enumerate_admissible_tuples(2, 5)
    capped = enumerate_admissible_tuples(2, 5, max_nu=50)
    assert len(full.tuples) == 342 and len(capped.tuples) == 225
    assert capped.truncated and not full.truncated
    assert set(capped.tuples) <= set(full.tuples)


def test_discrepancy_flag():
    for m in (1, 2, 3):
        res = enumerate_admissible_tuples(m, 2 * m + 5)
        assert res.tuples == ((2,) * (2 * m + 5),)
        assert res.discrepancy and res.note
    assert not enumerate_admissible_tuples(2, 8).discrepancy


def test_range_errors():
    with pytest.raises(QOutOfRange):
        enumerate_admissible_tuples(1, 4)
    with pytest.raises(QOutOfRange):
        enumerate_admissible_tuples(1, 8)
    with pytest.raises(PreconditionViolated):
        enumerate_admissible_tuples(0, 5)


@pytest.mark.parametrize("m, q", [(1, 5), (1, 6), (1, 7), (2, 6), (2, 7), (2, 8), (2, 9)])
def test_against_brute_force(m, q):
    assert list(enumerate_admissible_tuples(m, q, max_nu=50).tuples) == brute_force_tuples(m, q)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 2), st.data())
def test_every_output_is_admissible(m, data):
    q = data.draw(st.integers(5, 2 * m + 5))
    res = enumerate_admissible_tuples(m, q, max_nu=30)
    for t in res.tuples:
        c = check_tuple(t, m)
        assert c.admissible
        assert list(t) == sorted(t)
