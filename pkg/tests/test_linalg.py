import itertools
import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from levelspec.errors import DimensionError, FormatError
from levelspec.graphs import adjacency, enumerate_graphs
from levelspec.linalg import (
    MERSENNE_61,
    IntegerMatrix,
    IntegerPolynomial,
    RationalMatrix,
    char_poly,
    conjugate,
    determinant,
    format_matrix,
    invariant_factors,
    is_integral,
    parse_fraction,
    parse_matrix,
    rank_mod_prime,
    rank_rational,
    smith_normal_form,
)


def leibniz(rows):
    """Determinant by the permutation expansion."""
    n = len(rows)
    total = 0
    for perm in itertools.permutations(range(n)):
        inversions = sum(
            1 for a, b in itertools.combinations(range(n), 2) if perm[a] > perm[b]
        )
        term = -1 if inversions % 2 else 1
        for i in range(n):
            term *= rows[i][perm[i]]
        total += term
    return total


@st.composite
def integer_matrices(draw, max_order=4, bound=9, square=False):
    rows = draw(st.integers(1, max_order))
    cols = rows if square else draw(st.integers(1, max_order))
    entries = draw(
        st.lists(st.integers(-bound, bound), min_size=rows * cols, max_size=rows * cols)
    )
    return IntegerMatrix(rows, cols, tuple(entries))


def test_char_poly_matches_cofactor_oracle_on_small_graphs():
    for n in range(1, 6):
        for G in enumerate_graphs(n):
            A = adjacency(G).to_rows()
            poly = char_poly(adjacency(G))
            assert poly.degree == n and poly.is_monic
            # n + 1 evaluations pin down a degree-n polynomial.
            for x in range(n + 1):
                shifted = [
                    [(x if i == j else 0) - A[i][j] for j in range(n)] for i in range(n)
                ]
                assert poly(x) == leibniz(shifted)


@given(integer_matrices(square=True))
@settings(max_examples=100, deadline=None)
def test_char_poly_matches_sympy(M):
    x = sympy.Symbol("x")
    expected = sympy.Matrix(M.to_rows()).charpoly(x).all_coeffs()
    assert char_poly(M).coefficients == tuple(int(c) for c in reversed(expected))


def test_char_poly_formatting():
    star = IntegerMatrix.from_rows(
        [[0, 1, 1, 1, 1]] + [[1, 0, 0, 0, 0] for _ in range(4)]
    )
    assert str(char_poly(star)) == "x^5 - 4x^3"
    assert str(IntegerPolynomial((-1, 0, 1))) == "x^2 - 1"
    assert str(IntegerPolynomial((0, 0))) == "0"
    assert IntegerPolynomial((0, 0)).degree == -1


@given(integer_matrices(square=True))
@settings(max_examples=100, deadline=None)
def test_determinant_matches_leibniz(M):
    assert determinant(M) == leibniz(M.to_rows())


def test_determinant_rejects_rectangular():
    with pytest.raises(DimensionError):
        determinant(IntegerMatrix.zeros(2, 3))


def _minor_gcd(rows, k):
    m, n = len(rows), len(rows[0])
    g = 0
    for r in itertools.combinations(range(m), k):
        for c in itertools.combinations(range(n), k):
            g = math.gcd(g, leibniz([[rows[i][j] for j in c] for i in r]))
    return g


@given(integer_matrices())
@settings(max_examples=1000, deadline=None)
def test_smith_normal_form_contract(M):
    U, D, V = smith_normal_form(M)
    assert U @ M @ V == D
    assert abs(determinant(U)) == 1
    assert abs(determinant(V)) == 1
    diagonal = [D[i, i] for i in range(min(D.rows, D.cols))]
    for i in range(D.rows):
        for j in range(D.cols):
            if i != j:
                assert D[i, j] == 0
    assert all(d >= 0 for d in diagonal)
    for a, b in zip(diagonal, diagonal[1:]):
        assert b == 0 if a == 0 else b % a == 0
    # d_1 ... d_k equals the gcd of the k x k minors.
    rows = M.to_rows()
    for k in range(1, len(diagonal) + 1):
        assert math.prod(diagonal[:k]) == _minor_gcd(rows, k)


def test_invariant_factors_known_example():
    M = IntegerMatrix.from_rows(
        [[12, 6, 4, 8], [3, 9, 6, 12], [2, 16, 14, 28], [20, 10, 10, 20]]
    )
    assert invariant_factors(M) == (1, 10, 30, 0)


def test_rank_falls_back_when_prime_divides_a_pivot():
    M = IntegerMatrix.from_rows([[MERSENNE_61, 0], [0, 1]])
    assert rank_mod_prime(M) == 1
    assert rank_rational(M) == 2


@given(integer_matrices(bound=3))
@settings(max_examples=100, deadline=None)
def test_rank_matches_sympy(M):
    assert rank_rational(M) == sympy.Matrix(M.to_rows()).rank()


def test_rank_of_rational_matrix():
    M = RationalMatrix.from_rows(
        [[Fraction(1, 2), Fraction(1, 3)], [1, Fraction(2, 3)]]
    )
    assert rank_rational(M) == 1


def test_matrix_shapes_and_products():
    A = IntegerMatrix.from_rows([[1, 2], [3, 4]])
    assert A.transpose() == IntegerMatrix.from_rows([[1, 3], [2, 4]])
    assert A + A == A.scale(2)
    assert A - A == IntegerMatrix.zeros(2, 2)
    half = RationalMatrix.identity(2).scale(Fraction(1, 2))
    product = A @ half
    assert isinstance(product, RationalMatrix)
    assert product[1, 0] == Fraction(3, 2)
    with pytest.raises(DimensionError):
        A @ IntegerMatrix.zeros(3, 1)
    with pytest.raises(DimensionError):
        IntegerMatrix.from_rows([[1, 2], [3]])
    with pytest.raises(DimensionError):
        IntegerMatrix.from_rows([[Fraction(1, 2)]])
    with pytest.raises(IndexError):
        A[2, 0]


def test_conjugate_is_exact_and_checks_orders():
    Q = RationalMatrix.from_rows(
        [[Fraction(3, 5), Fraction(-4, 5)], [Fraction(4, 5), Fraction(3, 5)]]
    )
    A = IntegerMatrix.from_rows([[0, 1], [1, 0]])
    B = conjugate(Q, A)
    assert B == RationalMatrix.from_rows(
        [[Fraction(24, 25), Fraction(-7, 25)], [Fraction(-7, 25), Fraction(-24, 25)]]
    )
    assert not is_integral(B)
    assert conjugate(RationalMatrix.identity(2), A) == A.to_rational()
    with pytest.raises(DimensionError):
        conjugate(Q, IntegerMatrix.identity(3))


def test_matrix_text_codec():
    text = "# rotation\n3/5 -4/5\n\n4/5 −3/5\n"
    M = parse_matrix(text)
    assert M[1, 1] == Fraction(-3, 5)
    assert format_matrix(M) == "3/5 -4/5\n4/5 -3/5"
    assert parse_fraction(" 7 ") == 7
    with pytest.raises(FormatError):
        parse_fraction("1/0")
    with pytest.raises(FormatError):
        parse_fraction("0.5")
    with pytest.raises(FormatError):
        parse_matrix("1 2\n3\n")
    with pytest.raises(FormatError):
        parse_matrix("# nothing here\n")
