"""Mechanical checks of the counting argument behind the level bound.

Everything here works on a matrix ``Q`` in canonical block form
``diag(Q_s, I_{n-s})``: the column supports ``K``, the overlap sets ``N``,
the alternating greedy choice of ``I`` and ``J``, the per-entry dependency
structure of ``Q^T A Q``, and the numeric bounds built on top of them.
Indices are 0-based; the fractional block occupies ``0 .. s-1``.

Real-valued bounds are upper bounds: they are computed in interval
arithmetic (``mpmath.iv``) and reported as decimals rounded toward
``+inf``.
"""

from __future__ import annotations

import itertools
import logging
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from decimal import MAX_EMAX, MIN_EMIN, ROUND_CEILING, Context, Decimal
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, Sequence, Tuple

from mpmath import iv, mpf

from .errors import ClaimViolationError, LevelSpecError, PreconditionError
from .graphs import adjacency
from .linalg import IntegerMatrix, conjugate, format_matrix
from .orthogonal import (
    MAX_ENUM_LEVEL,
    MAX_ENUM_ORDER,
    LevelMode,
    RationalOrthogonalMatrix,
    canonical_form,
    enumerate_level,
    fractional_index_sets,
    is_in_can,
    reconstruct,
)
from .sampling import GnpSampler, uniform_below

EXHAUSTIVE_CELLS = 16
SIGNIFICANT_DIGITS = 12
_PRECISIONS = (128, 512, 2048)
_CEILING = Context(
    prec=SIGNIFICANT_DIGITS, rounding=ROUND_CEILING, Emax=MAX_EMAX, Emin=MIN_EMIN
)

log = logging.getLogger(__name__)

Pair = FrozenSet[int]


def column_support(Q: RationalOrthogonalMatrix, j: int) -> FrozenSet[int]:
    return frozenset(u for u in range(Q.n) if Q.Q[u, j] != 0)


def block_size(Q: RationalOrthogonalMatrix) -> int:
    """``s`` for ``Q`` in CAN(n, l; s); PreconditionError otherwise."""
    s = len(fractional_index_sets(Q).fri)
    if not is_in_can(Q, s):
        raise PreconditionError("matrix is not of the form diag(Q_s, I)")
    return s


@dataclass(frozen=True)
class SupportMaps:
    n: int
    s: int
    ell: int
    K: Dict[int, FrozenSet[int]]
    N: Dict[int, FrozenSet[int]]
    L: Dict[int, int]


def support_maps(Q: RationalOrthogonalMatrix) -> SupportMaps:
    """Column supports, overlap sets and row loads, with their caps enforced.

    Raises ClaimViolationError when ``|K(j)| > l^2``, ``L(k) > l^2`` or
    ``|N(i)| > l^4``.
    """
    s, ell = block_size(Q), Q.level
    K = {j: column_support(Q, j) for j in range(Q.n)}
    N = {i: frozenset(j for j in range(s) if K[j] & K[i]) for i in range(s)}
    L = {k: sum(1 for j in range(s) if k in K[j]) for k in range(Q.n)}
    for j, rows in K.items():
        if len(rows) > ell**2:
            raise ClaimViolationError(f"|K({j})| = {len(rows)} exceeds {ell**2}")
    for k, load in L.items():
        if load > ell**2:
            raise ClaimViolationError(f"L({k}) = {load} exceeds {ell**2}")
    for i, overlap in N.items():
        if len(overlap) > ell**4:
            raise ClaimViolationError(f"|N({i})| = {len(overlap)} exceeds {ell**4}")
    return SupportMaps(n=Q.n, s=s, ell=ell, K=K, N=N, L=L)


@dataclass(frozen=True)
class IndexSelection:
    I: Tuple[int, ...]
    J: Tuple[int, ...]
    trace: Tuple[Tuple[Tuple[int, ...], int], ...]
    s: int
    n: int
    ell: int

    @property
    def steps_lower_bound(self) -> int:
        return -(-self.s // self.ell**4)

    @property
    def min_I(self) -> int:
        return -(-self.steps_lower_bound // 2)

    @property
    def min_J(self) -> int:
        return self.steps_lower_bound // 2 + self.n - self.s


def greedy_select(
    Q: RationalOrthogonalMatrix, maps: SupportMaps | None = None
) -> IndexSelection:
    """Alternate the smallest remaining index into ``I`` and ``J``.

    ``S_1 = {0..s-1}``; step ``k`` takes ``i_k = min S_k`` and sets
    ``S_{k+1} = S_k - N(i_k)``. Odd steps feed ``I``, even steps ``J``;
    the trailing indices ``s..n-1`` are appended to ``J``.
    """
    maps = maps or support_maps(Q)
    if maps.s < 2:
        raise PreconditionError(f"greedy selection needs s >= 2, got {maps.s}")
    I: List[int] = []
    J: List[int] = []
    trace = []
    remaining = set(range(maps.s))
    for step in itertools.count(1):
        if not remaining:
            break
        chosen = min(remaining)
        trace.append((tuple(sorted(remaining)), chosen))
        (I if step % 2 else J).append(chosen)
        remaining -= maps.N[chosen]
    J.extend(range(maps.s, maps.n))
    return IndexSelection(
        I=tuple(I), J=tuple(J), trace=tuple(trace), s=maps.s, n=maps.n, ell=maps.ell
    )


def selection_violations(selection: IndexSelection, maps: SupportMaps) -> List[str]:
    failures = []
    chosen = selection.I + selection.J
    I, J = set(selection.I), set(selection.J)
    if I & J or not I <= set(range(selection.s)):
        failures.append("index-sets")
    if any(maps.K[a] & maps.K[b] for a, b in itertools.combinations(chosen, 2)):
        failures.append("disjoint-supports")
    seen: set = set()
    for i, j in itertools.product(selection.I, selection.J):
        block = {frozenset((u, v)) for u in maps.K[i] for v in maps.K[j]}
        if block & seen:
            failures.append("disjoint-products")
            break
        seen |= block
    if len(selection.I) < selection.min_I:
        failures.append("size-I")
    if len(selection.J) < selection.min_J:
        failures.append("size-J")
    return failures


def entry_dependency(Q: RationalOrthogonalMatrix, i: int, j: int) -> FrozenSet[Pair]:
    """Vertex pairs whose adjacency variables ``(Q^T A Q)[i, j]`` depends on."""
    left, right = column_support(Q, i), column_support(Q, j)
    if left & right:
        raise PreconditionError(f"columns {i} and {j} have overlapping supports")
    return frozenset(frozenset((u, v)) for u in left for v in right)


def restricted_entry(
    Q: RationalOrthogonalMatrix, A: IntegerMatrix, i: int, j: int
) -> Fraction:
    """``(Q^T A Q)[i, j]`` summed over ``K(i) x K(j)`` only."""
    return sum(
        (
            Q.Q[u, i] * A[u, v] * Q.Q[v, j]
            for u in column_support(Q, i)
            for v in column_support(Q, j)
        ),
        Fraction(0),
    )


def _assignments(cells: int, samples: int, seed: int, i: int, j: int) -> Iterator[int]:
    if cells <= EXHAUSTIVE_CELLS:
        yield from range(1 << cells)
        return
    for t in range(samples):
        yield uniform_below(1 << cells, seed, i, j, t)


def involution_audit(
    Q: RationalOrthogonalMatrix, i: int, j: int, samples: int = 256, seed: int = 0
) -> bool:
    """Flipping the designated cell never keeps ``b_{i,j}`` integral.

    Cells are ``(u, v)`` in ``K(i) x K(j)`` with weight ``q_{u,i} q_{v,j}``;
    the designated cell is the first one whose weight is not an integer.
    All ``2^cells`` assignments are checked up to ``EXHAUSTIVE_CELLS`` cells,
    otherwise ``samples`` keyed draws.
    """
    cells = sorted(entry_dependency(Q, i, j), key=sorted)
    oriented = []
    left = column_support(Q, i)
    for pair in cells:
        u, v = sorted(pair)
        oriented.append((u, v) if u in left else (v, u))
    weights = [Q.Q[u, i] * Q.Q[v, j] for u, v in oriented]
    flip = next((k for k, w in enumerate(weights) if w.denominator != 1), None)
    if flip is None:
        raise PreconditionError(f"every weight of block ({i}, {j}) is integral")
    modulus = math.lcm(*(w.denominator for w in weights))
    scaled = [(w * modulus).numerator for w in weights]
    for X in _assignments(len(weights), samples, seed, i, j):
        total = sum(w for k, w in enumerate(scaled) if X >> k & 1)
        if total % modulus:
            continue
        flipped = total - scaled[flip] if X >> flip & 1 else total + scaled[flip]
        if flipped % modulus == 0:
            log.debug("involution counterexample at (%d, %d), assignment %d", i, j, X)
            return False
    return True


def p_hat(p: Fraction) -> Fraction:
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise PreconditionError(f"p must lie in [0, 1], got {p}")
    return max(p, 1 - p)


@dataclass(frozen=True)
class BoundReport:
    """Exact and directed-rounded bounds; unfilled fields stay None."""

    n: int
    ell: int
    p_hat: Fraction
    selected_exponent: int | None = None
    selected_bound: Fraction | None = None
    closed_form_exponent: Fraction | None = None
    exponent_check: bool | None = None
    vacuous: bool = False
    epsilon_n: Decimal | None = None
    series_bound: Decimal | None = None
    divergent: bool | None = None
    n_star: int | None = None


def closed_form_exponent(n: int, ell: int, s: int) -> Fraction:
    ratio = Fraction(s, 2 * ell**4)
    return ratio * (ratio + n - s - 1)


def lemma_bound(Q: RationalOrthogonalMatrix, p: Fraction) -> BoundReport:
    """``Pr(Q^T A Q integral) <= p_hat^(|I| |J|)`` for the greedy ``I, J``."""
    selection = greedy_select(Q)
    base = p_hat(p)
    exponent = len(selection.I) * len(selection.J)
    closed = closed_form_exponent(selection.n, selection.ell, selection.s)
    return BoundReport(
        n=selection.n,
        ell=selection.ell,
        p_hat=base,
        selected_exponent=exponent,
        selected_bound=min(Fraction(1), base**exponent),
        closed_form_exponent=closed,
        exponent_check=exponent >= closed,
        vacuous=closed <= 0 or base == 1,
    )


@contextmanager
def _interval_precision(bits: int):
    saved = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = saved


def _log_rational(x: Fraction):
    return iv.log(iv.mpf(x.numerator)) - iv.log(iv.mpf(x.denominator))


def _log_epsilon(n: int, ell: int, base: Fraction):
    """Interval enclosing ``log(n^2 (2n)^(l^2) p_hat^((n-1)/(4 l^8)))``."""
    exponent = iv.mpf(n - 1) / iv.mpf(4 * ell**8)
    return (
        2 * iv.log(iv.mpf(n))
        + ell * ell * iv.log(iv.mpf(2 * n))
        + exponent * _log_rational(base)
    )


def _ceiling(interval) -> Decimal:
    value = mpf(interval.b, prec=iv.prec, rounding="c")
    man, exp = value.man_exp
    exact = Fraction(int(man)) * Fraction(2) ** exp
    if exact <= 0:
        return _CEILING.plus(Decimal(0))
    return _CEILING.divide(Decimal(exact.numerator), Decimal(exact.denominator))


def epsilon_below_one(n: int, ell: int, base: Fraction) -> bool:
    """``epsilon_n < 1``, decided by intervals and, if they never separate, exactly."""
    for bits in _PRECISIONS:
        with _interval_precision(bits):
            enclosure = _log_epsilon(n, ell, base)
            if enclosure.b < 0:
                return True
            if enclosure.a >= 0:
                return False
    # (n^2 (2n)^(l^2))^q a^(n-1) < b^(n-1) with q = 4 l^8 and p_hat = a/b
    q = 4 * ell**8
    scale = n * n * (2 * n) ** (ell * ell)
    return scale**q * base.numerator ** (n - 1) < base.denominator ** (n - 1)


def n_star(ell: int, p: Fraction) -> int | None:
    """Least ``n`` with ``epsilon_n < 1``; None when ``p_hat = 1``.

    ``log epsilon_n`` is concave in ``n`` and ``epsilon_1 = 2^(l^2) > 1``, so
    the orders with ``epsilon_n < 1`` form an up-set: double, then bisect.
    """
    base = p_hat(p)
    if base == 1:
        return None
    high = 2
    while not epsilon_below_one(high, ell, base):
        high *= 2
    low = high // 2
    while high - low > 1:
        middle = (low + high) // 2
        if epsilon_below_one(middle, ell, base):
            high = middle
        else:
            low = middle
    return high


def epsilon_upper(n: int, ell: int, p: Fraction) -> Decimal:
    with _interval_precision(_PRECISIONS[0]):
        return _ceiling(iv.exp(_log_epsilon(n, ell, p_hat(p))))


def epsilon_series(
    n: int, ell: int, p: Fraction, with_threshold: bool = True
) -> BoundReport:
    """``epsilon_n`` and ``epsilon_n^2 / (1 - epsilon_n)`` as upper bounds."""
    if n < 1 or ell < 1:
        raise PreconditionError("order and level must be positive")
    base = p_hat(p)
    divergent = not epsilon_below_one(n, ell, base)
    with _interval_precision(_PRECISIONS[0]):
        upper = _ceiling(iv.exp(_log_epsilon(n, ell, base)))
    series = None
    for bits in () if divergent else _PRECISIONS:
        with _interval_precision(bits):
            epsilon = iv.exp(_log_epsilon(n, ell, base))
            gap = 1 - epsilon
            if gap.a > 0:
                series = _ceiling(epsilon**2 / gap)
                break
    if series is None and not divergent:
        log.warning("series bound at n=%d is not separated from 1 at %d bits", n, bits)
    return BoundReport(
        n=n,
        ell=ell,
        p_hat=base,
        epsilon_n=upper,
        series_bound=series,
        divergent=divergent,
        vacuous=divergent,
        n_star=n_star(ell, base) if with_threshold else None,
    )


def exponent_chain_margin(n: int, ell: int, s: int) -> Fraction:
    """``(s/2l^4 + n - s - 1) - (n - 1)/(2 l^4)``, exactly."""
    if not 2 <= s <= n:
        raise PreconditionError(f"need 2 <= s <= n, got s={s}, n={n}")
    quarter = 2 * ell**4
    return Fraction(s, quarter) + n - s - 1 - Fraction(n - 1, quarter)


def exponent_chain_audit(n: int, ell: int, s: int) -> bool:
    return exponent_chain_margin(n, ell, s) >= 0


@dataclass(frozen=True)
class UnionBound:
    n: int
    ell: int
    p_hat: Fraction
    can_sum: Decimal
    vacuous_terms: Tuple[int, ...]
    epsilon_sum: Decimal


def union_bound(n: int, ell: int, p: Fraction) -> UnionBound:
    """Upper bounds for the two finite sums over block sizes ``s = 2..n``.

    ``can_sum`` adds ``n^(2s) (2s)^(l^2 s) p_hat^e(s)`` with ``e(s)`` the
    closed-form exponent (terms with ``e(s) <= 0`` are counted as 1-bounded
    probabilities and listed as vacuous); ``epsilon_sum`` adds ``epsilon_n^s``.
    """
    base = p_hat(p)
    vacuous = []
    with _interval_precision(_PRECISIONS[0]):
        log_base = _log_rational(base)
        epsilon = iv.exp(_log_epsilon(n, ell, base))
        can_total = iv.mpf(0)
        epsilon_total = iv.mpf(0)
        for s in range(2, n + 1):
            exponent = closed_form_exponent(n, ell, s)
            if exponent <= 0 or base == 1:
                vacuous.append(s)
                probability = iv.mpf(1)
            else:
                ratio = iv.mpf(exponent.numerator) / iv.mpf(exponent.denominator)
                probability = iv.exp(ratio * log_base)
            pairs = iv.mpf(n) ** (2 * s) * iv.mpf(2 * s) ** (ell * ell * s)
            can_total += pairs * probability
            epsilon_total += epsilon**s
        return UnionBound(
            n=n,
            ell=ell,
            p_hat=base,
            can_sum=_ceiling(can_total),
            vacuous_terms=tuple(vacuous),
            epsilon_sum=_ceiling(epsilon_total),
        )


@dataclass(frozen=True)
class AuditRecord:
    n: int
    level: int
    s: int
    matrix: str
    failures: Tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "level": self.level,
            "s": self.s,
            "matrix": self.matrix,
            "passed": self.passed,
            "failures": list(self.failures),
        }


def _block_shape_ok(cf_block: RationalOrthogonalMatrix) -> bool:
    rows = cf_block.Q.to_rows()
    columns = [cf_block.Q.column(j) for j in range(cf_block.n)]
    lines = itertools.chain(rows, columns)
    return all(sum(1 for x in line if x) >= 2 for line in lines)


def audit_matrix(
    Q: RationalOrthogonalMatrix, seed: int = 0, samples: int = 256
) -> AuditRecord:
    """Run every structural check on ``Q`` and name the ones that fail."""
    cf = canonical_form(Q)
    failures: List[str] = []
    if reconstruct(cf).Q != Q.Q:
        failures.append("reconstruction")
    if Q.level >= 2 and (cf.s < 2 or not _block_shape_ok(cf.Q_s)):
        failures.append("block-shape")
    record = dict(n=Q.n, level=Q.level, s=cf.s, matrix=format_matrix(Q.Q))
    if cf.s < 2:
        return AuditRecord(failures=tuple(failures), **record)

    block = cf.block()
    try:
        maps = support_maps(block)
    except ClaimViolationError:
        failures.append("support-caps")
        return AuditRecord(failures=tuple(failures), **record)
    selection = greedy_select(block, maps)
    failures.extend(selection_violations(selection, maps))

    A = adjacency(GnpSampler(Q.n, Fraction(1, 2), seed).sample(0))
    B = conjugate(block.Q, A)
    for i, j in itertools.product(selection.I, selection.J):
        if B[i, j] != restricted_entry(block, A, i, j):
            failures.append("entry-dependency")
            break
    try:
        if not all(
            involution_audit(block, i, j, samples=samples, seed=seed)
            for i, j in itertools.product(selection.I, selection.J)
        ):
            failures.append("involution")
    except LevelSpecError:
        failures.append("involution")
    return AuditRecord(failures=tuple(failures), **record)


@dataclass
class AuditSummary:
    checked: int = 0
    passed: int = 0
    by_check: Dict[str, int] = field(default_factory=dict)
    failures: List[AuditRecord] = field(default_factory=list)
    records: List[AuditRecord] = field(default_factory=list)

    def add(self, record: AuditRecord) -> None:
        self.checked += 1
        self.records.append(record)
        if record.passed:
            self.passed += 1
            return
        self.failures.append(record)
        for name in record.failures:
            self.by_check[name] = self.by_check.get(name, 0) + 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "checked": self.checked,
            "passed": self.passed,
            "failed": self.checked - self.passed,
            "by_check": dict(sorted(self.by_check.items())),
            "failures": [record.to_dict() for record in self.failures],
            "records": [record.to_dict() for record in self.records],
        }


def audit_enumeration(
    n_values: Iterable[int],
    levels: Sequence[int],
    *,
    seed: int = 0,
    quotient: bool = True,
    max_order: int = MAX_ENUM_ORDER,
    max_level: int = MAX_ENUM_LEVEL,
    logger: logging.Logger | None = None,
) -> AuditSummary:
    """Audit every enumerated ``Q`` of exact level ``>= 2`` over the grid."""
    logger = logger or log
    summary = AuditSummary()
    for n in n_values:
        for ell in levels:
            if ell < 2:
                continue
            before = summary.checked
            for Q in enumerate_level(
                n,
                ell,
                LevelMode.EXACT,
                quotient=quotient,
                max_order=max_order,
                max_level=max_level,
            ):
                summary.add(audit_matrix(Q, seed=seed))
            checked = summary.checked - before
            logger.info(f"[audit] n={n} level={ell}: {checked} matrices")
    return summary
