from fractions import Fraction

import pytest

from levelspec.argtypes import (
    parse_n_range,
    parse_positive,
    parse_probability,
    parse_seed,
)


def test_parse_probability():
    assert parse_probability("1/2") == Fraction(1, 2)
    assert parse_probability("2/4") == Fraction(1, 2)
    assert parse_probability("0") == 0
    assert parse_probability("1") == 1
    for bad in ("3/2", "-1/3", "0.5", "1/0", ""):
        with pytest.raises(ValueError):
            parse_probability(bad)


def test_parse_n_range():
    assert parse_n_range("6") == (6,)
    assert parse_n_range("4:6") == (4, 5, 6)
    assert parse_n_range(" 2-3 ") == (2, 3)
    for bad in ("", "6:4", "0:3", "a:b"):
        with pytest.raises(ValueError):
            parse_n_range(bad)


def test_parse_seed():
    assert parse_seed("42") == 42
    assert parse_seed("0xff") == 255
    assert parse_seed(str(2**64 - 1)) == 2**64 - 1
    for bad in ("-1", str(2**64), "seed"):
        with pytest.raises(ValueError):
            parse_seed(bad)


def test_parse_positive():
    assert parse_positive("3") == 3
    with pytest.raises(ValueError):
        parse_positive("0")
    with pytest.raises(ValueError):
        parse_positive("many")
