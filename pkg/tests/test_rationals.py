from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracmatch.rationals import (
    S,
    class_index,
    cmp,
    even_denom,
    even_part,
    format_rat,
    in_class_range,
    in_S,
    in_value_set,
    odd_denom,
    odd_part,
    parse_rat,
    parse_value_set,
    rmin,
    sub_clamped_at_zero,
)

unit = st.fractions(min_value=0, max_value=1, max_denominator=512)


@pytest.mark.parametrize(
    "q, ev, od, n",
    [
        (F(3, 8), 8, 1, 3),
        (F(5, 12), 4, 3, 2),
        (F(1, 3), 1, 3, 0),
        (F(0), 1, 1, 0),
        (F(1), 1, 1, 0),
        (F(7, 48), 16, 3, 4),
    ],
)
def test_denominator_split(q, ev, od, n):
    assert even_denom(q) == ev
    assert odd_denom(q) == od
    assert class_index(q) == n
    assert ev * od == q.denominator


def test_integer_parts():
    assert even_part(12) == 4 and odd_part(12) == 3
    assert even_part(0) == 0 and odd_part(0) == 1
    with pytest.raises(ValueError):
        even_part(-2)


def test_class_range():
    assert in_class_range(F(5, 12), 2, 2)
    assert not in_class_range(F(5, 12), 3)
    assert in_class_range(F(1, 3), 0, 0)


def test_S_membership():
    assert in_S(F(1, 2), 1) and in_S(F(3, 4), 2)
    assert not in_S(F(3, 4), 1)
    assert not in_S(F(1, 3), 5)
    assert S(1) == [F(0), F(1, 2), F(1)]
    assert len(S(3)) == 9


def test_arithmetic_helpers():
    assert sub_clamped_at_zero(F(1, 4), F(1, 2)) == 0
    assert sub_clamped_at_zero(F(3, 4), F(1, 2)) == F(1, 4)
    assert rmin(F(1, 3), F(1, 4)) == F(1, 4)
    assert cmp(F(1, 3), F(2, 6)) == 0 and cmp(F(1, 2), F(1, 3)) == 1


@pytest.mark.parametrize("text, value", [("3/8", F(3, 8)), ("0", F(0)), ("1", F(1)), ("2/4", F(1, 2))])
def test_parse_rat(text, value):
    assert parse_rat(text) == value


@pytest.mark.parametrize("text", ["0.5", "-1/2", "1/0", "a/b", ""])
def test_parse_rat_rejects(text):
    with pytest.raises(ValueError):
        parse_rat(text)


def test_format_round_trip():
    for q in S(4) + [F(5, 12), F(7, 48)]:
        assert parse_rat(format_rat(q)) == q
    assert format_rat(F(1)) == "1" and format_rat(F(3, 8)) == "3/8"


def test_value_sets():
    assert parse_value_set("S(2)") == ("S", 2)
    assert parse_value_set("R<=3") == ("R", 3) == parse_value_set("R(<=3)")
    with pytest.raises(ValueError):
        parse_value_set("T(1)")
    assert in_value_set(F(1, 3), ("R", 0))
    assert not in_value_set(F(1, 2), ("R", 0))
    assert in_value_set(F(1, 4), ("S", 2))


@given(unit, unit)
def test_even_part_of_sum_never_exceeds_the_larger(a, b):
    assert even_denom(a + b) <= max(even_denom(a), even_denom(b))


@given(unit, unit)
def test_sum_of_different_classes_takes_the_finer(a, b):
    if class_index(a) != class_index(b):
        assert class_index(a + b) == max(class_index(a), class_index(b))


@given(unit)
def test_exactly_one_class(q):
    hits = [n for n in range(12) if in_class_range(q, n, n)]
    assert hits == [class_index(q)]


@pytest.mark.parametrize("d", range(0, 7))
def test_S_nesting_and_classes(d):
    sd = set(S(d))
    assert all(class_index(q) <= d for q in sd)
    assert sd < set(S(d + 1))
    assert all(in_S(q, d) for q in sd)
