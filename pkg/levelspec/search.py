"""Cospectral mates certified by rational orthogonal conjugators of bounded level."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, Iterator, List, Sequence, Tuple

from .errors import FormatError, PreconditionError, check_guard
from .graphs import (
    Graph,
    adjacency,
    are_isomorphic,
    enumerate_graphs,
    spectrum_key,
    walk_matrix,
)
from .io_graph import from_graph6, to_graph6
from .linalg import (
    IntegerMatrix,
    RationalMatrix,
    conjugate,
    format_fraction,
    is_integral,
    parse_fraction,
)
from .orthogonal import (
    MAX_ENUM_LEVEL,
    MAX_ENUM_ORDER,
    LevelMode,
    RationalOrthogonalMatrix,
    SignedPermutation,
    enumerate_level,
    is_orthogonal,
    is_regular,
    level,
)

MAX_CENSUS_ORDER = 6

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MateCertificate:
    """``Q^T A_G Q = A_H`` with ``H`` not isomorphic to ``G``."""

    G: Graph
    H: Graph
    Q: RationalOrthogonalMatrix
    level: int
    generalized: bool


@lru_cache(maxsize=64)
def _representatives(
    n: int, ell: int, quotient: bool, max_order: int, max_level: int
) -> Tuple[RationalOrthogonalMatrix, ...]:
    return tuple(
        enumerate_level(
            n,
            ell,
            LevelMode.DIVIDES,
            quotient=quotient,
            max_order=max_order,
            max_level=max_level,
        )
    )


def conjugates_integrally(Q: RationalOrthogonalMatrix, A: IntegerMatrix) -> bool:
    modulus = Q.level * Q.level
    if modulus == 1:
        return True
    n = Q.n
    columns = [Q.scaled.column(j) for j in range(n)]
    rows = A.to_rows()
    images = [
        [sum(a * c for a, c in zip(row, column)) for row in rows]
        for column in columns
    ]
    for i in range(n):
        for j in range(n):
            if sum(x * y for x, y in zip(columns[i], images[j])) % modulus:
                return False
    return True


def q_set(
    A: IntegerMatrix,
    ell: int,
    *,
    quotient: bool = False,
    max_order: int = MAX_ENUM_ORDER,
    max_level: int = MAX_ENUM_LEVEL,
) -> Iterator[RationalOrthogonalMatrix]:
    """Enumerated ``Q`` of level dividing ``ell`` with ``Q^T A Q`` integral."""
    if not A.is_square:
        raise PreconditionError("q_set needs a square matrix")
    for Q in _representatives(A.rows, ell, quotient, max_order, max_level):
        if conjugates_integrally(Q, A):
            yield Q


def _with_signs(
    Q: RationalOrthogonalMatrix, signs: Sequence[int]
) -> RationalOrthogonalMatrix:
    entries = tuple(Q.Q[i, j] * signs[j] for i in range(Q.n) for j in range(Q.n))
    return RationalOrthogonalMatrix(Q=RationalMatrix(Q.n, Q.n, entries), level=Q.level)


def _regularized(Q: RationalOrthogonalMatrix) -> RationalOrthogonalMatrix | None:
    """``Q D`` with ``D`` a sign diagonal making the rows sum to 1, if one exists.

    ``Q s = e`` forces ``s = Q^T e``, so a regular member of the orbit
    ``Q P`` exists exactly when ``Q^T e`` is a sign vector.
    """
    signs = [sum(Q.Q.column(j)) for j in range(Q.n)]
    if any(abs(x) != 1 for x in signs):
        return None
    return _with_signs(Q, [int(x) for x in signs])


def _balancing_signs(B: RationalMatrix) -> List[int] | None:
    """Signs ``d`` making ``D B D`` a 0/1 adjacency matrix, if any exist.

    ``B`` must be integral with a zero diagonal and entries in {-1, 0, 1};
    the signs are then propagated along the nonzero entries of ``B``.
    """
    if not is_integral(B):
        return None
    n = B.rows
    signs = [0] * n
    for root in range(n):
        if signs[root]:
            continue
        signs[root] = 1
        stack = [root]
        while stack:
            i = stack.pop()
            if B[i, i] != 0:
                return None
            for j in range(n):
                b = B[i, j]
                if b == 0:
                    continue
                if abs(b) != 1 or B[j, i] != b:
                    return None
                wanted = signs[i] * int(b)
                if not signs[j]:
                    signs[j] = wanted
                    stack.append(j)
                elif signs[j] != wanted:
                    return None
    return signs


def _is_adjacency(B: RationalMatrix) -> bool:
    return is_integral(B) and all(
        B[i, j] in (0, 1) and B[i, j] == B[j, i] and (i != j or B[i, i] == 0)
        for i in range(B.rows)
        for j in range(B.cols)
    )


def _match(found: Sequence[MateCertificate], H: Graph, found_level: int) -> int | None:
    return next(
        (
            k
            for k, c in enumerate(found)
            if c.level == found_level and are_isomorphic(c.H, H)
        ),
        None,
    )


def _collect(
    G: Graph,
    candidates: Iterator[RationalOrthogonalMatrix],
    require_generalized: bool,
) -> List[MateCertificate]:
    A = adjacency(G)
    found: List[MateCertificate] = []
    for Q in candidates:
        if Q.level < 2:
            continue
        signs = _balancing_signs(conjugate(Q.Q, A))
        if signs is None:
            continue
        regular = _regularized(Q)
        generalized = regular is not None and _is_adjacency(conjugate(regular.Q, A))
        if require_generalized and not generalized:
            continue
        witness = regular if generalized else _with_signs(Q, signs)
        H = Graph.from_adjacency(conjugate(witness.Q, A).to_integer())
        if are_isomorphic(G, H):
            continue
        cert = MateCertificate(
            G=G, H=H, Q=witness, level=Q.level, generalized=generalized
        )
        k = _match(found, H, Q.level)
        if k is None:
            found.append(cert)
        elif cert.generalized and not found[k].generalized:
            found[k] = cert
    return sorted(found, key=lambda c: (c.level, to_graph6(c.H)))


def find_mates(
    G: Graph,
    ell: int,
    require_generalized: bool = False,
    *,
    quotient: bool = True,
    max_order: int = MAX_ENUM_ORDER,
    max_level: int = MAX_ENUM_LEVEL,
) -> List[MateCertificate]:
    """All mates of ``G`` reachable by a conjugator of level ``l' | ell``, ``l' >= 2``.

    Certificates are deduplicated by ``(H up to isomorphism, level)``; when
    the orbit of a conjugator under signed permutations holds a regular
    member that member is the witness and the certificate is generalized.
    """
    if G.n < 2 or ell < 2:
        return []
    check_guard("order", G.n, max_order)
    candidates = q_set(
        adjacency(G), ell, quotient=quotient, max_order=max_order, max_level=max_level
    )
    mates = _collect(G, candidates, require_generalized)
    log.debug("find_mates n=%d level=%d -> %d certificates", G.n, ell, len(mates))
    return mates


def brute_force_mates(
    G: Graph,
    ell: int,
    require_generalized: bool = False,
    *,
    max_order: int = MAX_ENUM_ORDER,
    max_level: int = MAX_ENUM_LEVEL,
) -> List[MateCertificate]:
    """Reference search: every enumerated ``Q`` conjugated in full, no quotient."""
    if G.n < 2 or ell < 2:
        return []
    A = adjacency(G)
    everything = enumerate_level(
        G.n, ell, LevelMode.DIVIDES, max_order=max_order, max_level=max_level
    )
    integral = (Q for Q in everything if is_integral(conjugate(Q.Q, A)))
    if not require_generalized:
        return _collect(G, integral, False)
    return _collect(G, (Q for Q in integral if is_regular(Q)), True)


def verify_level_divisibility(cert: MateCertificate) -> bool:
    """``level(Q)`` divides the last invariant factor of ``W(G)``."""
    if not cert.generalized:
        raise PreconditionError("divisibility audit needs a generalized certificate")
    report = walk_matrix(cert.G)
    if not report.controllable:
        raise PreconditionError("divisibility audit needs a controllable graph")
    return report.d_n % cert.Q.level == 0


def reverify(cert: MateCertificate) -> List[str]:
    """Names of the checks ``cert`` fails; empty when it is valid."""
    failures: List[str] = []
    Q = cert.Q.Q
    if cert.G.n != cert.H.n or Q.rows != cert.G.n or not Q.is_square:
        return ["dimensions"]
    if not is_orthogonal(Q):
        failures.append("orthogonality")
    if level(Q) != cert.level or cert.level < 2:
        failures.append("level")
    if conjugate(Q, adjacency(cert.G)) != adjacency(cert.H).to_rational():
        failures.append("conjugation")
    if are_isomorphic(cert.G, cert.H):
        failures.append("non-isomorphism")
    if cert.generalized:
        if not is_regular(cert.Q):
            failures.append("regularity")
        report = walk_matrix(cert.G)
        if report.controllable and report.d_n % level(Q) != 0:
            failures.append("level-divisibility")
    return failures


def cospectral_census(
    n: int, max_order: int = MAX_CENSUS_ORDER
) -> List[Tuple[Graph, Graph]]:
    """Non-isomorphic cospectral pairs on ``n`` vertices, one per isomorphism pair."""
    check_guard("order", n, max_order)
    buckets: Dict[Tuple[int, ...], List[Graph]] = {}
    for G in enumerate_graphs(n):
        classes = buckets.setdefault(spectrum_key(G).coefficients, [])
        if not any(are_isomorphic(G, R) for R in classes):
            classes.append(G)
    pairs = []
    for key in sorted(buckets):
        pairs.extend(itertools.combinations(buckets[key], 2))
    return pairs


def closure_audit(
    A: IntegerMatrix, Q: RationalOrthogonalMatrix, P: SignedPermutation
) -> bool:
    if not is_integral(conjugate(Q.Q, A)):
        raise PreconditionError("Q^T A Q is not integral")
    return is_integral(conjugate(Q.Q @ P.matrix(), A))


def certificate_to_dict(cert: MateCertificate) -> Dict[str, Any]:
    return {
        "G": to_graph6(cert.G),
        "H": to_graph6(cert.H),
        "Q": [[format_fraction(x) for x in cert.Q.Q.row(i)] for i in range(cert.Q.n)],
        "level": cert.level,
        "generalized": cert.generalized,
    }


def certificate_from_dict(data: Dict[str, Any]) -> MateCertificate:
    try:
        rows = [[parse_fraction(str(x)) for x in row] for row in data["Q"]]
        G, H = from_graph6(data["G"]), from_graph6(data["H"])
        claimed, generalized = int(data["level"]), bool(data["generalized"])
    except (KeyError, TypeError) as exc:
        raise FormatError(f"incomplete certificate: {exc}") from exc
    if not rows or any(len(row) != len(rows) for row in rows):
        raise FormatError("certificate matrix must be square and non-empty")
    Q = RationalMatrix.from_rows(rows)
    return MateCertificate(
        G=G,
        H=H,
        Q=RationalOrthogonalMatrix(Q=Q, level=level(Q)),
        level=claimed,
        generalized=generalized,
    )


def mates_agree(
    first: Sequence[MateCertificate], second: Sequence[MateCertificate]
) -> bool:
    if len(first) != len(second):
        return False
    return all(_match(second, c.H, c.level) is not None for c in first)
