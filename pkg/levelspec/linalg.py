"""Exact dense linear algebra over the integers and the rationals.

Every value here is immutable and every operation is exact: integers are
Python ``int`` and rationals are :class:`fractions.Fraction`, which keeps
itself in lowest terms with a positive denominator.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple, Union

from .errors import DimensionError, FormatError

# 2^61 - 1 is prime; fixing it keeps rank computations reproducible.
MERSENNE_61 = (1 << 61) - 1

Number = Union[int, Fraction]


def _check_entries(rows: int, cols: int, entries: tuple) -> None:
    if rows < 0 or cols < 0:
        raise DimensionError(f"negative shape {rows}x{cols}")
    if len(entries) != rows * cols:
        raise DimensionError(
            f"{len(entries)} entries do not fill a {rows}x{cols} matrix"
        )


class _DenseMatrix:
    """Row-major storage and the shape helpers both matrix kinds share."""

    rows: int
    cols: int
    entries: tuple

    def __getitem__(self, index: Tuple[int, int]):
        i, j = index
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"({i}, {j}) outside a {self.rows}x{self.cols} matrix")
        return self.entries[i * self.cols + j]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def column(self, j: int) -> tuple:
        return self.entries[j :: self.cols] if self.cols else ()

    def to_rows(self) -> List[list]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self):
        return type(self)(
            self.cols,
            self.rows,
            tuple(
                self.entries[i * self.cols + j]
                for j in range(self.cols)
                for i in range(self.rows)
            ),
        )

    def _same_shape(self, other: "_DenseMatrix") -> None:
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionError(
                f"shape mismatch {self.rows}x{self.cols} vs {other.rows}x{other.cols}"
            )

    def __matmul__(self, other: "_DenseMatrix"):
        if not isinstance(other, _DenseMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise DimensionError(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}"
            )
        product = _multiply(self.to_rows(), other.to_rows(), other.cols)
        if isinstance(self, IntegerMatrix) and isinstance(other, IntegerMatrix):
            return IntegerMatrix.from_rows(product, cols=other.cols)
        return RationalMatrix.from_rows(product, cols=other.cols)

    def __str__(self) -> str:
        return format_matrix(self)


def _as_int(x: Number) -> int:
    if isinstance(x, Fraction) and x.denominator != 1:
        raise DimensionError(f"non-integral entry {x} in an integer matrix")
    return int(x)


def _multiply(a: List[list], b: List[list], b_cols: int) -> List[list]:
    columns = [[row[j] for row in b] for j in range(b_cols)]
    return [[sum(x * y for x, y in zip(row, col)) for col in columns] for row in a]


@dataclass(frozen=True)
class IntegerMatrix(_DenseMatrix):
    rows: int
    cols: int
    entries: Tuple[int, ...]

    def __post_init__(self) -> None:
        _check_entries(self.rows, self.cols, self.entries)

    @classmethod
    def from_rows(
        cls, rows: Sequence[Sequence[int]], cols: int | None = None
    ) -> "IntegerMatrix":
        rows = [list(r) for r in rows]
        width = len(rows[0]) if rows else (cols or 0)
        if any(len(r) != width for r in rows):
            raise DimensionError("ragged rows")
        return cls(len(rows), width, tuple(_as_int(x) for r in rows for x in r))

    @classmethod
    def identity(cls, n: int) -> "IntegerMatrix":
        return cls(n, n, tuple(int(i == j) for i in range(n) for j in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntegerMatrix":
        return cls(rows, cols, (0,) * (rows * cols))

    def __add__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        self._same_shape(other)
        entries = tuple(x + y for x, y in zip(self.entries, other.entries))
        return IntegerMatrix(self.rows, self.cols, entries)

    def __sub__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        self._same_shape(other)
        entries = tuple(x - y for x, y in zip(self.entries, other.entries))
        return IntegerMatrix(self.rows, self.cols, entries)

    def scale(self, k: int) -> "IntegerMatrix":
        return IntegerMatrix(self.rows, self.cols, tuple(k * x for x in self.entries))

    def to_rational(self) -> "RationalMatrix":
        entries = tuple(Fraction(x) for x in self.entries)
        return RationalMatrix(self.rows, self.cols, entries)


@dataclass(frozen=True)
class RationalMatrix(_DenseMatrix):
    rows: int
    cols: int
    entries: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        _check_entries(self.rows, self.cols, self.entries)
        if not all(type(x) is Fraction for x in self.entries):
            entries = tuple(Fraction(x) for x in self.entries)
            object.__setattr__(self, "entries", entries)

    @classmethod
    def from_rows(
        cls, rows: Sequence[Sequence[Number]], cols: int | None = None
    ) -> "RationalMatrix":
        rows = [list(r) for r in rows]
        width = len(rows[0]) if rows else (cols or 0)
        if any(len(r) != width for r in rows):
            raise DimensionError("ragged rows")
        return cls(len(rows), width, tuple(Fraction(x) for r in rows for x in r))

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return IntegerMatrix.identity(n).to_rational()

    def scale(self, k: Number) -> "RationalMatrix":
        return RationalMatrix(self.rows, self.cols, tuple(k * x for x in self.entries))

    def to_integer(self) -> IntegerMatrix:
        if not is_integral(self):
            raise DimensionError("matrix has non-integral entries")
        entries = tuple(x.numerator for x in self.entries)
        return IntegerMatrix(self.rows, self.cols, entries)


Matrix = Union[IntegerMatrix, RationalMatrix]


@dataclass(frozen=True)
class IntegerPolynomial:
    """Integer polynomial, coefficients in ascending degree order.

    Trailing zero coefficients are dropped, so the zero polynomial has no
    coefficients and degree -1.
    """

    coefficients: Tuple[int, ...]

    def __post_init__(self) -> None:
        coefficients = [int(c) for c in self.coefficients]
        while coefficients and coefficients[-1] == 0:
            coefficients.pop()
        object.__setattr__(self, "coefficients", tuple(coefficients))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_monic(self) -> bool:
        return bool(self.coefficients) and self.coefficients[-1] == 1

    def __call__(self, x: Number) -> Number:
        value: Number = 0
        for c in reversed(self.coefficients):
            value = value * x + c
        return value

    def __str__(self) -> str:
        if not self.coefficients:
            return "0"
        terms = []
        for power in range(self.degree, -1, -1):
            c = self.coefficients[power]
            if c == 0:
                continue
            magnitude = abs(c)
            if power == 0:
                body = str(magnitude)
            else:
                base = "x" if power == 1 else f"x^{power}"
                body = base if magnitude == 1 else f"{magnitude}{base}"
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        first_sign, first_body = terms[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in terms[1:]:
            text += f" {sign} {body}"
        return text


def _require_square(M: _DenseMatrix, what: str) -> None:
    if not M.is_square:
        raise DimensionError(f"{what} needs a square matrix, got {M.rows}x{M.cols}")


def char_poly(M: IntegerMatrix) -> IntegerPolynomial:
    """Return ``det(xI - M)`` by the Faddeev-LeVerrier recurrence.

    All divisions in the recurrence are exact over the integers; a nonzero
    remainder would mean a broken invariant, so it raises instead of rounding.
    """
    _require_square(M, "char_poly")
    n = M.rows
    a = M.to_rows()
    coefficients = [0] * (n + 1)
    coefficients[n] = 1
    current = [[0] * n for _ in range(n)]
    for k in range(1, n + 1):
        shift = coefficients[n - k + 1]
        current = _multiply(a, current, n)
        for i in range(n):
            current[i][i] += shift
        trace = sum(sum(a[i][t] * current[t][i] for t in range(n)) for i in range(n))
        quotient, remainder = divmod(-trace, k)
        if remainder:
            raise ArithmeticError("Faddeev-LeVerrier division was not exact")
        coefficients[n - k] = quotient
    return IntegerPolynomial(tuple(coefficients))


def determinant(M: IntegerMatrix) -> int:
    """Fraction-free (Bareiss) determinant."""
    _require_square(M, "determinant")
    n = M.rows
    if n == 0:
        return 1
    a = M.to_rows()
    sign, previous = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // previous
        previous = a[k][k]
    return sign * a[n - 1][n - 1]


def _bareiss_rank(a: List[List[int]], cols: int) -> int:
    rank, previous = 0, 1
    rows = len(a)
    for col in range(cols):
        pivot = next((i for i in range(rank, rows) if a[i][col] != 0), None)
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        p = a[rank][col]
        for i in range(rank + 1, rows):
            factor = a[i][col]
            for j in range(col + 1, cols):
                a[i][j] = (a[i][j] * p - factor * a[rank][j]) // previous
            a[i][col] = 0
        previous = p
        rank += 1
        if rank == rows:
            break
    return rank


def rank_mod_prime(M: IntegerMatrix, prime: int = MERSENNE_61) -> int:
    a = [[x % prime for x in row] for row in M.to_rows()]
    rank = 0
    for col in range(M.cols):
        pivot = next((i for i in range(rank, M.rows) if a[i][col]), None)
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        inverse = pow(a[rank][col], -1, prime)
        pivot_row = [(x * inverse) % prime for x in a[rank]]
        a[rank] = pivot_row
        for i in range(rank + 1, M.rows):
            factor = a[i][col]
            if factor:
                a[i] = [(x - factor * y) % prime for x, y in zip(a[i], pivot_row)]
        rank += 1
        if rank == M.rows:
            break
    return rank


def _clear_denominators(M: Matrix) -> IntegerMatrix:
    if isinstance(M, IntegerMatrix):
        return M
    rows = []
    for i in range(M.rows):
        row = M.row(i)
        scale = math.lcm(*(x.denominator for x in row)) if row else 1
        rows.append([(x * scale).numerator for x in row])
    return IntegerMatrix.from_rows(rows, cols=M.cols)


def rank_rational(M: Matrix, prime: int = MERSENNE_61) -> int:
    """Exact rank over the rationals.

    The rank modulo ``prime`` never exceeds the rational rank, so a full
    modular rank is already certified; anything lower is recomputed exactly
    by fraction-free elimination.
    """
    integral = _clear_denominators(M)
    bound = min(integral.rows, integral.cols)
    if bound == 0:
        return 0
    if rank_mod_prime(integral, prime) == bound:
        return bound
    return _bareiss_rank(integral.to_rows(), integral.cols)


class _SmithState:
    """Working copy of M with the row/column transforms that reach D."""

    def __init__(self, M: IntegerMatrix) -> None:
        self.m, self.n = M.rows, M.cols
        self.a = M.to_rows()
        self.u = IntegerMatrix.identity(self.m).to_rows()
        self.v = IntegerMatrix.identity(self.n).to_rows()

    def swap_rows(self, i: int, j: int) -> None:
        if i != j:
            self.a[i], self.a[j] = self.a[j], self.a[i]
            self.u[i], self.u[j] = self.u[j], self.u[i]

    def swap_cols(self, i: int, j: int) -> None:
        if i != j:
            for matrix in (self.a, self.v):
                for row in matrix:
                    row[i], row[j] = row[j], row[i]

    def add_row(self, target: int, source: int, k: int) -> None:
        for matrix in (self.a, self.u):
            matrix[target] = [
                x + k * y for x, y in zip(matrix[target], matrix[source])
            ]

    def add_col(self, target: int, source: int, k: int) -> None:
        for matrix in (self.a, self.v):
            for row in matrix:
                row[target] += k * row[source]

    def negate_row(self, i: int) -> None:
        self.a[i] = [-x for x in self.a[i]]
        self.u[i] = [-x for x in self.u[i]]

    def pivot(self, t: int) -> Tuple[int, int] | None:
        best = None
        for i in range(t, self.m):
            for j in range(t, self.n):
                x = self.a[i][j]
                if x and (best is None or abs(x) < abs(self.a[best[0]][best[1]])):
                    best = (i, j)
        return best


def smith_normal_form(
    M: IntegerMatrix,
) -> Tuple[IntegerMatrix, IntegerMatrix, IntegerMatrix]:
    """Return unimodular ``U``, ``V`` and diagonal ``D`` with ``U M V = D``.

    Pivots are the entries of least nonzero absolute value, which keeps the
    intermediate entries small; the diagonal ends up non-negative with each
    entry dividing the next.
    """
    state = _SmithState(M)
    a = state.a
    for t in range(min(state.m, state.n)):
        while True:
            position = state.pivot(t)
            if position is None:
                break
            state.swap_rows(t, position[0])
            state.swap_cols(t, position[1])
            p = a[t][t]
            clean = True
            for i in range(t + 1, state.m):
                q = a[i][t] // p
                if q:
                    state.add_row(i, t, -q)
                clean = clean and a[i][t] == 0
            for j in range(t + 1, state.n):
                q = a[t][j] // p
                if q:
                    state.add_col(j, t, -q)
                clean = clean and a[t][j] == 0
            if not clean:
                continue
            offender = next(
                (
                    i
                    for i in range(t + 1, state.m)
                    for j in range(t + 1, state.n)
                    if a[i][j] % p
                ),
                None,
            )
            if offender is None:
                break
            state.add_row(t, offender, 1)
        if a[t][t] < 0:
            state.negate_row(t)
    return (
        IntegerMatrix.from_rows(state.u, cols=state.m),
        IntegerMatrix.from_rows(a, cols=state.n),
        IntegerMatrix.from_rows(state.v, cols=state.n),
    )


def invariant_factors(M: IntegerMatrix) -> Tuple[int, ...]:
    _, D, _ = smith_normal_form(M)
    return tuple(D[i, i] for i in range(min(D.rows, D.cols)))


def conjugate(Q: Matrix, A: Matrix) -> RationalMatrix:
    """Return ``Q^T A Q`` exactly."""
    _require_square(Q, "conjugate")
    _require_square(A, "conjugate")
    if Q.rows != A.rows:
        raise DimensionError(f"order mismatch: Q is {Q.rows}, A is {A.rows}")
    result = Q.transpose() @ (A @ Q)
    if isinstance(result, IntegerMatrix):
        return result.to_rational()
    return result


def is_integral(M: Matrix) -> bool:
    if isinstance(M, IntegerMatrix):
        return True
    return all(x.denominator == 1 for x in M.entries)


def format_fraction(x: Number) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_matrix(M: Matrix) -> str:
    """One row per line, entries as exact integers or ``p/q`` fractions."""
    lines = (" ".join(format_fraction(x) for x in M.row(i)) for i in range(M.rows))
    return "\n".join(lines)


_FRACTION = re.compile(r"^[+-]?\d+(/\d+)?$")


def parse_fraction(token: str) -> Fraction:
    token = token.strip().replace("−", "-")
    if not _FRACTION.match(token):
        raise FormatError(f"not an exact fraction: {token!r}")
    try:
        return Fraction(token)
    except ZeroDivisionError as exc:
        raise FormatError(f"zero denominator: {token!r}") from exc


def parse_matrix(text: str) -> RationalMatrix:
    rows = [
        [parse_fraction(token) for token in line.split()]
        for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not rows:
        raise FormatError("empty matrix text")
    if any(len(r) != len(rows[0]) for r in rows):
        raise FormatError("matrix rows have different lengths")
    return RationalMatrix.from_rows(rows)
