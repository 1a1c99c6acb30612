"""Utilities for parsing command-line values: probabilities, ranges and seeds."""

from fractions import Fraction
from typing import Tuple

from .errors import FormatError
from .linalg import parse_fraction as _parse_exact

SEED_LIMIT = 1 << 64


def parse_probability(expr: str) -> Fraction:
    """Convert ``NUM/DEN`` (or an integer ``0``/``1``) into an exact probability.

    Parameters
    ----------
    expr:
        Probability expression such as ``"1/2"``.

    Returns
    -------
    fractions.Fraction
        The probability in lowest terms.

    Raises
    ------
    ValueError
        If the expression is not an exact fraction or lies outside ``[0, 1]``.
    """

    try:
        value = _parse_exact(expr)
    except FormatError as exc:
        raise ValueError(str(exc)) from exc
    if not 0 <= value <= 1:
        raise ValueError(f"probability must lie in [0, 1], got {expr}")
    return value


def parse_n_range(expr: str) -> Tuple[int, ...]:
    """Convert ``N``, ``A:B`` or ``A-B`` into the inclusive tuple of orders.

    Raises
    ------
    ValueError
        If a bound is not a positive integer or the range is empty.
    """

    expr = expr.strip()
    if not expr:
        raise ValueError("Range expression cannot be empty")
    for separator in (":", "-"):
        if separator in expr:
            low_text, high_text = expr.split(separator, 1)
            break
    else:
        low_text = high_text = expr
    try:
        low, high = int(low_text), int(high_text)
    except ValueError as exc:
        raise ValueError(f"Invalid range: {expr}") from exc
    if low < 1 or high < low:
        raise ValueError(f"Empty or non-positive range: {expr}")
    return tuple(range(low, high + 1))


def parse_seed(expr: str) -> int:
    """Decimal or ``0x`` hexadecimal 64-bit master seed."""
    try:
        seed = int(expr.strip(), 0)
    except ValueError as exc:
        raise ValueError(f"Invalid seed: {expr}") from exc
    if not 0 <= seed < SEED_LIMIT:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {expr}")
    return seed


def parse_positive(expr: str) -> int:
    try:
        value = int(expr)
    except ValueError as exc:
        raise ValueError(f"Invalid count: {expr}") from exc
    if value < 1:
        raise ValueError(f"expected a positive integer, got {expr}")
    return value
