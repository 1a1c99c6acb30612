import itertools
import math
from fractions import Fraction

import pytest

from levelspec.errors import GuardExceededError, PreconditionError
from levelspec.linalg import IntegerMatrix, RationalMatrix
from levelspec.orthogonal import (
    LevelMode,
    SignedPermutation,
    block_diagonal,
    canonical_form,
    column_candidates,
    count_bound,
    enumerate_level,
    fractional_index_sets,
    is_in_can,
    is_in_scan,
    is_orthogonal,
    is_regular,
    level,
    lift_scan_to_can,
    pair_count_bound,
    rational_orthogonal,
    reconstruct,
    signed_permutation_of,
    signed_permutations,
)

ROTATION = RationalMatrix.from_rows(
    [[Fraction(3, 5), Fraction(-4, 5)], [Fraction(4, 5), Fraction(3, 5)]]
)
HALF_HADAMARD = RationalMatrix.from_rows(
    [
        [Fraction(x, 2) for x in row]
        for row in [[1, 1, 1, -1], [1, 1, -1, 1], [1, -1, 1, 1], [-1, 1, 1, 1]]
    ]
)


def test_level_and_regularity_examples():
    assert level(IntegerMatrix.identity(3)) == 1
    assert level(ROTATION) == 5
    assert level(HALF_HADAMARD) == 2
    assert is_regular(rational_orthogonal(HALF_HADAMARD))
    assert is_regular(rational_orthogonal(IntegerMatrix.identity(3)))
    assert not is_regular(rational_orthogonal(ROTATION))


def test_rational_orthogonal_rejects_other_matrices():
    assert not is_orthogonal(IntegerMatrix.zeros(2, 3))
    with pytest.raises(PreconditionError):
        rational_orthogonal(IntegerMatrix.from_rows([[1, 1], [0, 1]]))


def test_counts_of_signed_permutations():
    for n, expected in [(1, 2), (2, 8), (3, 48), (4, 384)]:
        matrices = list(enumerate_level(n, 1))
        assert len(matrices) == expected
        assert len({Q.Q for Q in matrices}) == expected
        assert all(Q.level == 1 for Q in matrices)


def test_level_five_order_two_against_brute_force():
    exact = list(enumerate_level(2, 5, LevelMode.EXACT))
    brute = 0
    for a, b, c, d in itertools.product(range(-5, 6), repeat=4):
        if a * a + b * b != 25 or c * c + d * d != 25 or a * c + b * d != 0:
            continue
        if all(x % 5 == 0 for x in (a, b, c, d)):
            continue
        brute += 1
    assert len(exact) == brute == 16
    assert all(Q.level == 5 and is_orthogonal(Q.Q) for Q in exact)
    assert len(list(enumerate_level(2, 5))) == 24


@pytest.mark.parametrize("n,ell", [(2, 5), (3, 3), (4, 2)])
def test_quotient_picks_one_matrix_per_signed_orbit(n, ell):
    full = list(enumerate_level(n, ell))
    reps = list(enumerate_level(n, ell, quotient=True))
    assert len(full) == len(reps) * 2**n * math.factorial(n)
    assert len(full) <= count_bound(n, ell)
    for Q in reps:
        for j in range(n):
            column = Q.Q.column(j)
            assert next(x for x in column if x != 0) > 0


def test_quotient_at_level_one_is_the_identity():
    for n in range(1, 5):
        reps = list(enumerate_level(n, 1, quotient=True))
        assert [Q.Q for Q in reps] == [RationalMatrix.identity(n)]


def test_exact_level_three_matrices_have_level_three():
    matrices = list(enumerate_level(3, 3, "exact-level"))
    assert matrices
    for Q in matrices:
        assert Q.level == 3 == level(Q.Q)
        assert is_orthogonal(Q.Q)
        assert Q.scaled == Q.Q.scale(3).to_integer()


def test_enumeration_guards():
    with pytest.raises(GuardExceededError):
        list(enumerate_level(7, 1))
    with pytest.raises(GuardExceededError):
        list(enumerate_level(2, 6))
    with pytest.raises(PreconditionError):
        list(enumerate_level(0, 1))


def test_column_candidates():
    full = column_candidates(2, 5)
    assert len(full) == 12
    assert all(a * a + b * b == 25 for a, b in full)
    normalized = column_candidates(2, 5, normalized=True)
    assert len(normalized) == 6
    assert all(next(x for x in v if x) > 0 for v in normalized)


def test_count_bounds():
    assert count_bound(1, 1) == 2
    assert count_bound(2, 5) == 4**50
    assert pair_count_bound(4, 0) == (1, 1)
    assert pair_count_bound(4, 2) == (144, 256)
    assert pair_count_bound(6, 2) == (900, 1296)
    with pytest.raises(PreconditionError):
        pair_count_bound(3, 4)


def test_signed_permutations():
    perms = list(signed_permutations(3))
    assert len({P.matrix() for P in perms}) == 48
    for P in perms:
        assert P.matrix() @ P.inverse().matrix() == IntegerMatrix.identity(3)
        assert signed_permutation_of(P.matrix()) == P
    with pytest.raises(PreconditionError):
        SignedPermutation((0, 0), (1, 1))
    with pytest.raises(PreconditionError):
        signed_permutation_of(IntegerMatrix.from_rows([[2, 0], [0, 1]]))


def test_fractional_index_sets():
    Q = rational_orthogonal(block_diagonal(ROTATION, 4))
    sets = fractional_index_sets(Q)
    assert sets.fri == sets.fci == (0, 1)
    assert sets.iri == sets.ici == (2, 3)


def test_canonical_form_of_a_scrambled_block():
    D = block_diagonal(ROTATION, 5)
    left = SignedPermutation((3, 0, 4, 1, 2), (1, -1, 1, 1, -1)).matrix()
    right = SignedPermutation((2, 4, 0, 1, 3), (-1, 1, 1, -1, 1)).matrix()
    Q = rational_orthogonal(left @ D @ right)
    cf = canonical_form(Q)
    assert cf.s == 2
    assert cf.Q_s.level == 5
    assert reconstruct(cf).Q == Q.Q
    assert cf.P_R.matrix().transpose() @ Q.Q @ cf.P_C.matrix() == cf.block().Q
    assert is_in_can(cf.block(), 2)


def test_canonical_form_of_signed_permutation_is_empty_block():
    P = SignedPermutation((1, 2, 0), (-1, 1, -1)).as_orthogonal()
    cf = canonical_form(P)
    assert cf.s == 0
    assert cf.block().Q == RationalMatrix.identity(3)
    assert reconstruct(cf).Q == P.Q


def test_canonical_form_over_level_three_enumeration():
    for Q in enumerate_level(3, 3, LevelMode.EXACT):
        cf = canonical_form(Q)
        assert reconstruct(cf).Q == Q.Q
        assert cf.s >= 2
        assert is_in_can(cf.block(), cf.s)
        for k in range(cf.s):
            assert sum(1 for x in cf.Q_s.Q.row(k) if x) >= 2
            assert sum(1 for x in cf.Q_s.Q.column(k) if x) >= 2


def test_scan_members_lift_to_can():
    tail = IntegerMatrix.from_rows([[0, -1], [1, 0]])
    Q = rational_orthogonal(block_diagonal(ROTATION, 4, tail=tail))
    assert is_in_scan(Q, 2)
    assert not is_in_can(Q, 2)
    lifted, P = lift_scan_to_can(Q)
    assert is_in_can(lifted, 2)
    assert lifted.Q == Q.Q @ P.matrix()
    assert lifted.level == 5
    with pytest.raises(PreconditionError):
        rows_moved = SignedPermutation((2, 3, 0, 1), (1, 1, 1, 1)).matrix()
        lift_scan_to_can(rational_orthogonal(rows_moved @ block_diagonal(ROTATION, 4)))
