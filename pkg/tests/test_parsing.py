import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaussmaps.errors import ParseError
from gaussmaps.mero import INF, Z, is_inf
from gaussmaps.parsing import format_point, parse_expr, parse_form, parse_point, parse_points


@pytest.mark.parametrize(
    "text, expected",
    [
        ("z", Z),
        ("z^2 + 1", Z**2 + 1),
        ("1/(z-2i)", 1 / (Z - 2j)),
        ("(1+i)*z", (1 + 1j) * Z),
        ("2i*z^3", 2j * Z**3),
        ("-z**2", -(Z**2)),
    ],
)
def test_parse_expr(text, expected):
    assert parse_expr(text).is_close(expected)


@pytest.mark.parametrize("bad", ["sin(z)", "z^0.5", "__import__('os')", "", "z +", "x"])
def test_parse_expr_rejects(bad):
    with pytest.raises(ParseError):
        parse_expr(bad)


def test_parse_form_strips_dz():
    assert parse_form("1/z^2 dz").coefficient.is_close(1 / Z**2)
    assert parse_form("1").coefficient.is_close(1)


def test_points():
    assert is_inf(parse_point("inf")) and is_inf(parse_point("∞"))
    assert parse_point("1+2i") == 1 + 2j
    assert parse_point("-0.5i") == -0.5j
    assert parse_points("0, 2, inf")[2] is INF


@given(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False))
def test_format_roundtrip(w):
    back = parse_point(format_point(w, 17))
    assert abs(back - w) <= 1e-12 * max(1.0, abs(w))


def test_format_infinity():
    assert format_point(INF) == "inf"
