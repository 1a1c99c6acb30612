"""Rational orthogonal matrices: levels, enumeration and canonical forms."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Iterator, List, Sequence, Tuple

from .errors import ClaimViolationError, PreconditionError, check_guard
from .linalg import IntegerMatrix, Matrix, RationalMatrix

MAX_ENUM_ORDER = 6
MAX_ENUM_LEVEL = 5

Vector = Tuple[int, ...]


class LevelMode(str, Enum):
    EXACT = "exact-level"
    DIVIDES = "level-divides"


def level(M: Matrix) -> int:
    """Least positive ``l`` with ``l * M`` integral."""
    if isinstance(M, IntegerMatrix):
        return 1
    return math.lcm(1, *(x.denominator for x in M.entries))


def is_orthogonal(M: Matrix) -> bool:
    if not M.is_square:
        return False
    return M.transpose() @ M == _identity_like(M)


def _identity_like(M: Matrix) -> Matrix:
    identity = IntegerMatrix.identity(M.rows)
    return identity if isinstance(M, IntegerMatrix) else identity.to_rational()


@dataclass(frozen=True)
class RationalOrthogonalMatrix:
    """A rational ``Q`` with ``Q^T Q = I`` and its cached level.

    Build instances through :func:`rational_orthogonal` unless the
    orthogonality is known by construction.
    """

    Q: RationalMatrix
    level: int

    @property
    def n(self) -> int:
        return self.Q.rows

    @cached_property
    def scaled(self) -> IntegerMatrix:
        """``level * Q`` as an integer matrix."""
        return self.Q.scale(self.level).to_integer()

    def __getitem__(self, index: Tuple[int, int]) -> Fraction:
        return self.Q[index]

    def __str__(self) -> str:
        return str(self.Q)


def rational_orthogonal(M: Matrix) -> RationalOrthogonalMatrix:
    if not is_orthogonal(M):
        raise PreconditionError("matrix is not orthogonal")
    Q = M if isinstance(M, RationalMatrix) else M.to_rational()
    return RationalOrthogonalMatrix(Q=Q, level=level(Q))


def is_regular(Q: RationalOrthogonalMatrix) -> bool:
    return all(sum(Q.Q.row(i)) == 1 for i in range(Q.n))


@dataclass(frozen=True)
class SignedPermutation:
    """Signed permutation matrix ``P`` with ``P[perm[j], j] = signs[j]``."""

    perm: Tuple[int, ...]
    signs: Tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.perm) != list(range(len(self.perm))):
            raise PreconditionError(f"{self.perm} is not a permutation")
        if len(self.signs) != len(self.perm) or any(
            s not in (1, -1) for s in self.signs
        ):
            raise PreconditionError("signs must be +1/-1, one per column")

    @classmethod
    def identity(cls, n: int) -> "SignedPermutation":
        return cls(tuple(range(n)), (1,) * n)

    @property
    def n(self) -> int:
        return len(self.perm)

    def matrix(self) -> IntegerMatrix:
        entries = [0] * (self.n * self.n)
        for j, (i, sign) in enumerate(zip(self.perm, self.signs)):
            entries[i * self.n + j] = sign
        return IntegerMatrix(self.n, self.n, tuple(entries))

    def inverse(self) -> "SignedPermutation":
        perm = [0] * self.n
        signs = [1] * self.n
        for j, (i, sign) in enumerate(zip(self.perm, self.signs)):
            perm[i], signs[i] = j, sign
        return SignedPermutation(tuple(perm), tuple(signs))

    def as_orthogonal(self) -> RationalOrthogonalMatrix:
        return RationalOrthogonalMatrix(Q=self.matrix().to_rational(), level=1)


def signed_permutations(n: int) -> Iterator[SignedPermutation]:
    for perm in itertools.permutations(range(n)):
        for signs in itertools.product((1, -1), repeat=n):
            yield SignedPermutation(perm, signs)


def _sign_patterns(magnitudes: Vector, normalized: bool) -> Iterator[Vector]:
    support = [i for i, a in enumerate(magnitudes) if a]
    for signs in itertools.product((1, -1), repeat=len(support)):
        if normalized and signs and signs[0] < 0:
            continue
        vector = list(magnitudes)
        for i, sign in zip(support, signs):
            vector[i] *= sign
        yield tuple(vector)


def column_candidates(n: int, ell: int, normalized: bool = False) -> Tuple[Vector, ...]:
    """Integer vectors of length ``n`` and squared norm ``ell**2``.

    Magnitude patterns come in colexicographic order, each followed by its
    sign patterns; ``normalized`` keeps only vectors whose first nonzero entry
    is positive.
    """
    target = ell * ell
    magnitudes = [
        m
        for m in itertools.product(range(ell + 1), repeat=n)
        if sum(a * a for a in m) == target
    ]
    magnitudes.sort(key=lambda m: tuple(reversed(m)))
    return tuple(v for m in magnitudes for v in _sign_patterns(m, normalized))


def _dot(u: Vector, v: Vector) -> int:
    return sum(a * b for a, b in zip(u, v))


def _column_sets(
    candidates: Sequence[Vector], n: int, quotient: bool
) -> Iterator[List[int]]:
    chosen: List[int] = []

    def extend(compatible: List[int]) -> Iterator[List[int]]:
        if len(chosen) == n:
            yield list(chosen)
            return
        for position, k in enumerate(compatible):
            pool = compatible[position + 1 :] if quotient else compatible
            column = candidates[k]
            remaining = [m for m in pool if _dot(column, candidates[m]) == 0]
            if len(remaining) < n - len(chosen) - 1:
                continue
            chosen.append(k)
            yield from extend(remaining)
            chosen.pop()

    yield from extend(list(range(len(candidates))))


def enumerate_level(
    n: int,
    ell: int,
    mode: LevelMode | str = LevelMode.DIVIDES,
    *,
    quotient: bool = False,
    max_order: int = MAX_ENUM_ORDER,
    max_level: int = MAX_ENUM_LEVEL,
) -> Iterator[RationalOrthogonalMatrix]:
    """Stream every ``Q = C / ell`` with orthonormal integer columns ``C``.

    With ``quotient`` only one representative per orbit of right
    multiplication by signed permutations is produced: columns normalized to
    a positive leading entry and strictly increasing in candidate order.
    """
    mode = LevelMode(mode)
    if n < 1 or ell < 1:
        raise PreconditionError("order and level must be positive")
    check_guard("order", n, max_order)
    check_guard("level", ell, max_level)
    candidates = column_candidates(n, ell, normalized=quotient)
    for columns in _column_sets(candidates, n, quotient):
        C = [candidates[k] for k in columns]
        found = ell // math.gcd(ell, *(a for column in C for a in column))
        if mode is LevelMode.EXACT and found != ell:
            continue
        entries = tuple(Fraction(C[j][i], ell) for i in range(n) for j in range(n))
        yield RationalOrthogonalMatrix(Q=RationalMatrix(n, n, entries), level=found)


def count_bound(n: int, ell: int) -> int:
    """``(2n)^(ell^2 n)``, the bound on all ``Q`` of level dividing ``ell``."""
    return (2 * n) ** (ell * ell * n)


def can_count_bound(s: int, ell: int) -> int:
    return count_bound(s, ell)


def pair_count_bound(n: int, s: int) -> Tuple[int, int]:
    """``(n(n-1)...(n-s+1))^2`` and its ``n^(2s)`` majorant."""
    if not 0 <= s <= n:
        raise PreconditionError(f"block size {s} must lie in 0..{n}")
    falling = math.perm(n, s)
    return falling * falling, n ** (2 * s)


@dataclass(frozen=True)
class FractionalIndexSets:
    fri: Tuple[int, ...]
    fci: Tuple[int, ...]
    iri: Tuple[int, ...]
    ici: Tuple[int, ...]


def fractional_index_sets(Q: RationalOrthogonalMatrix) -> FractionalIndexSets:
    rows = range(Q.n)
    fri = tuple(i for i in rows if any(x.denominator != 1 for x in Q.Q.row(i)))
    fci = tuple(j for j in rows if any(x.denominator != 1 for x in Q.Q.column(j)))
    if len(fri) != len(fci):
        raise ClaimViolationError(
            f"{len(fri)} fractional rows but {len(fci)} fractional columns"
        )
    return FractionalIndexSets(
        fri=fri,
        fci=fci,
        iri=tuple(i for i in rows if i not in fri),
        ici=tuple(j for j in rows if j not in fci),
    )


@dataclass(frozen=True)
class CanonicalForm:
    """``P_R^T Q P_C = diag(Q_s, I_{n-s})`` with ``Q_s`` free of +-1 entries."""

    P_R: SignedPermutation
    P_C: SignedPermutation
    s: int
    Q_s: RationalOrthogonalMatrix

    @property
    def n(self) -> int:
        return self.P_R.n

    def block(self) -> RationalOrthogonalMatrix:
        """The CAN member ``diag(Q_s, I_{n-s})``."""
        return RationalOrthogonalMatrix(
            Q=block_diagonal(self.Q_s.Q, self.n), level=self.Q_s.level
        )


def block_diagonal(
    Q_s: RationalMatrix, n: int, tail: Matrix | None = None
) -> RationalMatrix:
    """``diag(Q_s, tail)`` of order ``n``; ``tail`` defaults to the identity."""
    s = Q_s.rows
    tail = tail if tail is not None else IntegerMatrix.identity(n - s)
    rows = [[Fraction(0)] * n for _ in range(n)]
    for i in range(s):
        for j in range(s):
            rows[i][j] = Q_s[i, j]
    for i in range(n - s):
        for j in range(n - s):
            rows[s + i][s + j] = Fraction(tail[i, j])
    return RationalMatrix.from_rows(rows, cols=n)


def canonical_form(Q: RationalOrthogonalMatrix) -> CanonicalForm:
    """Deterministic canonical form of ``Q``.

    Fractional rows and columns go first in ascending order; each integral
    row is paired with the column holding its unique +-1, signed so the
    trailing block is the identity.
    """
    sets = fractional_index_sets(Q)
    s = len(sets.fri)
    columns, signs = list(sets.fci), [1] * s
    for r in sets.iri:
        c = next(j for j in range(Q.n) if Q.Q[r, j] != 0)
        columns.append(c)
        signs.append(int(Q.Q[r, c]))
    P_R = SignedPermutation(sets.fri + sets.iri, (1,) * Q.n)
    P_C = SignedPermutation(tuple(columns), tuple(signs))
    block = RationalMatrix.from_rows(
        [[Q.Q[i, j] for j in sets.fci] for i in sets.fri], cols=s
    )
    return CanonicalForm(
        P_R=P_R,
        P_C=P_C,
        s=s,
        Q_s=RationalOrthogonalMatrix(Q=block, level=level(block)),
    )


def reconstruct(cf: CanonicalForm) -> RationalOrthogonalMatrix:
    """``P_R diag(Q_s, I) P_C^T``; inverts :func:`canonical_form`."""
    Q = cf.P_R.matrix() @ cf.block().Q @ cf.P_C.matrix().transpose()
    return RationalOrthogonalMatrix(Q=Q, level=cf.Q_s.level)


def _fully_fractional(Q: RationalMatrix, s: int) -> bool:
    return all(abs(Q[i, j]) != 1 for i in range(s) for j in range(s))


def _block_split(Q: RationalOrthogonalMatrix, s: int) -> RationalMatrix | None:
    """Trailing block of ``Q`` when ``Q = diag(Q_s, T)``, else None."""
    n = Q.n
    if not 0 <= s <= n:
        return None
    crossing = itertools.chain(
        ((i, j) for i in range(s) for j in range(s, n)),
        ((i, j) for i in range(s, n) for j in range(s)),
    )
    if any(Q.Q[i, j] != 0 for i, j in crossing):
        return None
    return RationalMatrix.from_rows(
        [[Q.Q[i, j] for j in range(s, n)] for i in range(s, n)], cols=n - s
    )


def is_in_can(Q: RationalOrthogonalMatrix, s: int) -> bool:
    tail = _block_split(Q, s)
    if tail is None or tail != RationalMatrix.identity(Q.n - s):
        return False
    return _fully_fractional(Q.Q, s)


def is_in_scan(Q: RationalOrthogonalMatrix, s: int) -> bool:
    tail = _block_split(Q, s)
    if tail is None or level(tail) != 1:
        return False
    return _fully_fractional(Q.Q, s)


def lift_scan_to_can(
    Q: RationalOrthogonalMatrix,
) -> Tuple[RationalOrthogonalMatrix, SignedPermutation]:
    """Return ``(Q P, P)`` with ``Q P`` in CAN for ``Q`` in sCAN.

    ``P = diag(I_s, T^T)`` undoes the signed permutation ``T`` in the
    trailing block; right multiplication keeps membership in ``Q(A)``.
    """
    s = len(fractional_index_sets(Q).fri)
    if not is_in_scan(Q, s):
        raise PreconditionError("matrix is not of the form diag(Q_s, P)")
    tail = _block_split(Q, s).to_integer()
    inverse = signed_permutation_of(tail).inverse()
    P = SignedPermutation(
        tuple(range(s)) + tuple(s + i for i in inverse.perm),
        (1,) * s + inverse.signs,
    )
    lifted = Q.Q @ P.matrix()
    return RationalOrthogonalMatrix(Q=lifted, level=Q.level), P


def signed_permutation_of(M: IntegerMatrix) -> SignedPermutation:
    perm, signs = [], []
    for j in range(M.cols):
        support = [i for i in range(M.rows) if M[i, j] != 0]
        if len(support) != 1 or abs(M[support[0], j]) != 1:
            raise PreconditionError("matrix is not a signed permutation")
        perm.append(support[0])
        signs.append(M[support[0], j])
    return SignedPermutation(tuple(perm), tuple(signs))
